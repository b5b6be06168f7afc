#pragma once

#include <cmath>

#include "she/types.hpp"

namespace she {

/// Regulated dc-link voltage and the thyristor firing angle that produces it.
struct Regulation {
  double dc_link_volts;
  double firing_angle_deg;

  friend bool operator==(const Regulation&, const Regulation&) = default;
};

/// Dc-link voltage that lets the inverter run at unity modulation index for
/// a demanded per-unit output: E = vo_pu * v_dc. Demands above nominal are
/// rejected (the strategy fixes the modulation index at 1, never above).
inline double required_dc_link(double vo_pu, const InverterConfig& config) {
  if (!(vo_pu > 0.0) || !(vo_pu <= 1.0) || !std::isfinite(vo_pu))
    throw DomainError("vo_pu must lie in (0, 1], got " + detail::num(vo_pu));
  return vo_pu * config.v_dc;
}

/// Average six-pulse rectifier output at firing angle alpha: (3/pi) v_s cos(alpha).
/// Rectifier mode only, alpha in [0, 90].
inline double rectifier_voltage(const RectifierConfig& rect, double alpha_deg) {
  if (!(alpha_deg >= 0.0) || !(alpha_deg <= 90.0))
    throw DomainError("firing angle " + detail::num(alpha_deg) +
                      " out of [0, 90] degrees");
  return RectifierConfig::kGain * rect.v_s * std::cos(deg_to_rad(alpha_deg));
}

/// Firing angle producing the target dc-link voltage:
/// alpha = arccos(pi * e / (3 v_s)), in degrees. Targets above the
/// rectifier ceiling (3/pi) v_s raise InfeasibleError carrying the minimum
/// secondary voltage that would satisfy the demand.
inline double firing_angle(double e_target, const RectifierConfig& rect) {
  if (!(e_target >= 0.0) || !std::isfinite(e_target))
    throw DomainError("target dc-link voltage must be >= 0");
  double ratio = e_target / (RectifierConfig::kGain * rect.v_s);
  if (ratio > 1.0) {
    if (ratio > 1.0 + 1e-12) {
      const double min_vs = e_target / RectifierConfig::kGain;
      throw InfeasibleError(
          "dc-link target " + detail::num(e_target) + " V exceeds rectifier ceiling " +
              detail::num(RectifierConfig::kGain * rect.v_s) +
              " V; requires secondary voltage of at least " + detail::num(min_vs) + " V",
          min_vs);
    }
    ratio = 1.0;  // boundary demand, off by rounding only
  }
  return rad_to_deg(std::acos(ratio));
}

/// Full strategy for one demand: regulated dc-link from the demand, firing
/// angle from the dc-link. Both six-pulse units run at the same angle.
inline Regulation regulate(double vo_pu, const InverterConfig& config,
                           const RectifierConfig& rect) {
  const double e = required_dc_link(vo_pu, config);
  return Regulation{e, firing_angle(e, rect)};
}

}  // namespace she
