#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <utility>
#include <vector>

#include "she/format.hpp"
#include "she/types.hpp"

namespace she {

/// Peak harmonic magnitudes of a staircase output.
/// `components` maps odd orders >= 3 to |Vn| in volts; even orders are
/// identically zero and never stored. `thd` is a ratio, not a percentage.
struct HarmonicSpectrum {
  double fundamental_peak;
  std::map<int, double> components;
  int max_order;
  double thd;
};

/// One synthesized period. `samples` holds (time fraction in [0,1), volts)
/// pairs on a uniform grid; `levels` counts the distinct voltages reached.
struct Waveform {
  std::vector<std::pair<double, double>> samples;
  int levels;
};

namespace detail {

inline void require_pairing(const AngleSet& angles, const InverterConfig& config) {
  if (static_cast<std::size_t>(config.n_sources) != angles.size())
    throw DomainError("angle count " + std::to_string(angles.size()) +
                      " does not match n_sources " + std::to_string(config.n_sources));
}

/// Sum of cos(n * theta_k) over all angles, theta in degrees.
inline double cos_sum(std::span<const double> degrees, int n) {
  double s = 0.0;
  for (double d : degrees) s += std::cos(deg_to_rad(static_cast<double>(n) * d));
  return s;
}

inline void require_odd_order(int n, const char* what) {
  if (n < 1 || n % 2 == 0)
    throw DomainError(std::string(what) + " must be a positive odd integer, got " +
                      std::to_string(n));
}

}  // namespace detail

/**
 * Signed peak coefficient of harmonic `n` of the staircase output:
 * (4 v_dc / (n pi)) * sum_k cos(n theta_k). The sign is kept so numerical
 * cross-checks can compare against a DFT; spectra report magnitudes.
 */
inline double harmonic_magnitude(const AngleSet& angles, int n,
                                 const InverterConfig& config) {
  detail::require_odd_order(n, "harmonic order");
  detail::require_pairing(angles, config);
  return 4.0 * config.v_dc / (n * kPi) * detail::cos_sum(angles.degrees(), n);
}

/// Fundamental amplitude per unit of the total dc-link voltage
/// (n_sources * v_dc). Independent of v_dc by construction.
inline double fundamental_pu(const AngleSet& angles, const InverterConfig& config) {
  detail::require_pairing(angles, config);
  return 4.0 / (kPi * config.n_sources) * detail::cos_sum(angles.degrees(), 1);
}

/**
 * Total harmonic distortion over odd orders 3..max_order, as a ratio of the
 * fundamental. The dc-link voltage cancels, so the result depends on the
 * angles alone. Throws DomainError when the fundamental is zero (every
 * angle at 90).
 */
inline double thd(const AngleSet& angles, int max_order = 999) {
  detail::require_odd_order(max_order, "max_order");
  if (max_order < 3) throw DomainError("max_order must be >= 3");
  const double c1 = detail::cos_sum(angles.degrees(), 1);
  if (c1 == 0.0)
    throw DomainError("THD undefined: fundamental is zero (all angles at 90)");
  double sum_sq = 0.0;
  for (int n = 3; n <= max_order; n += 2) {
    const double cn = detail::cos_sum(angles.degrees(), n) / n;
    sum_sq += cn * cn;
  }
  return std::sqrt(sum_sq) / c1;
}

/// Full odd-order spectrum up to max_order, magnitudes in volts.
inline HarmonicSpectrum spectrum(const AngleSet& angles, const InverterConfig& config,
                                 int max_order = 999) {
  HarmonicSpectrum s{};
  s.fundamental_peak = std::abs(harmonic_magnitude(angles, 1, config));
  s.max_order = max_order;
  s.thd = thd(angles, max_order);
  for (int n = 3; n <= max_order; n += 2)
    s.components[n] = std::abs(harmonic_magnitude(angles, n, config));
  return s;
}

/**
 * Instantaneous staircase voltage at electrical angle `omega_t_deg` within
 * one period [0, 360). The wave rises by v_dc at every switching angle in
 * the first quarter, mirrors across the quarter period, and negates in the
 * second half. Angles at exactly 90 have zero-width steps and never fire.
 */
inline double staircase_value(const AngleSet& angles, const InverterConfig& config,
                              double omega_t_deg) {
  detail::require_pairing(angles, config);
  double deg = std::fmod(omega_t_deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  double sign = 1.0;
  if (deg >= 180.0) {
    sign = -1.0;
    deg -= 180.0;
  }
  if (deg > 90.0) deg = 180.0 - deg;
  int count = 0;
  for (double th : angles.degrees())
    if (th < 90.0 && th <= deg) ++count;
  return sign * count * config.v_dc;
}

/// One period sampled at cell midpoints t_j = (j + 1/2) / samples_per_period.
inline Waveform synthesize_waveform(const AngleSet& angles, const InverterConfig& config,
                                    int samples_per_period) {
  detail::require_pairing(angles, config);
  if (samples_per_period < 4 * static_cast<int>(angles.size()))
    throw DomainError("samples_per_period must be at least 4x the angle count");
  Waveform w{};
  w.samples.reserve(samples_per_period);
  std::set<double> distinct;
  const double n = samples_per_period;
  for (int j = 0; j < samples_per_period; ++j) {
    // 360*(j + 1/2): exact in double, so mirrored samples fold identically.
    const double deg = (360.0 * j + 180.0) / n;
    const double v = staircase_value(angles, config, deg);
    w.samples.emplace_back((j + 0.5) / n, v);
    distinct.insert(v);
  }
  w.levels = static_cast<int>(distinct.size());
  return w;
}

/**
 * THD from a discrete Fourier analysis of one sampled period, over odd
 * orders up to max_order. Requires samples_per_period >= 4 * max_order.
 * Serves as the numerical cross-check of the analytic path.
 */
inline double fft_thd(const Waveform& wave, int max_order) {
  detail::require_odd_order(max_order, "max_order");
  const std::size_t n_samples = wave.samples.size();
  if (n_samples < 4 * static_cast<std::size_t>(max_order))
    throw SamplingError("need at least 4*max_order samples, got " +
                        std::to_string(n_samples));
  // Per-sample rotators: z = e^{i 2 pi t}, advanced by z^2 per odd order.
  std::vector<double> zr(n_samples), zi(n_samples), sr(n_samples), si(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) {
    const double ph = 2.0 * kPi * wave.samples[j].first;
    zr[j] = std::cos(ph);
    zi[j] = std::sin(ph);
    sr[j] = zr[j] * zr[j] - zi[j] * zi[j];
    si[j] = 2.0 * zr[j] * zi[j];
  }
  double fundamental = 0.0;
  double sum_sq = 0.0;
  for (int n = 1; n <= max_order; n += 2) {
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < n_samples; ++j) {
      const double v = wave.samples[j].second;
      a += v * zr[j];
      b += v * zi[j];
      const double r = zr[j] * sr[j] - zi[j] * si[j];
      zi[j] = zr[j] * si[j] + zi[j] * sr[j];
      zr[j] = r;
    }
    const double mag = std::hypot(a, b) * 2.0 / static_cast<double>(n_samples);
    if (n == 1)
      fundamental = mag;
    else
      sum_sq += mag * mag;
  }
  if (fundamental == 0.0)
    throw DomainError("THD undefined: sampled fundamental is zero");
  return std::sqrt(sum_sq) / fundamental;
}

/// CSV export: `order,magnitude_volts,percent_of_fundamental`, fundamental
/// first, one row per odd order, newline-terminated.
inline void write_spectrum_csv(const HarmonicSpectrum& s, std::ostream& out) {
  out << "order,magnitude_volts,percent_of_fundamental\n";
  out << "1," << fmt_double(s.fundamental_peak) << ",100\n";
  for (const auto& [n, mag] : s.components) {
    const double pct = s.fundamental_peak == 0.0 ? 0.0 : 100.0 * mag / s.fundamental_peak;
    out << n << ',' << fmt_double(mag) << ',' << fmt_double(pct) << '\n';
  }
}

}  // namespace she
