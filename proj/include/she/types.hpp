#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace she {

inline constexpr double kPi = std::numbers::pi;

namespace detail {
inline std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}
}  // namespace detail

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or value outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A demanded dc-link voltage the rectifier cannot produce. Carries the
/// smallest secondary voltage that would make the demand feasible.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double min_secondary_volts)
      : Error(what), min_secondary_volts_(min_secondary_volts) {}
  double min_secondary_volts() const { return min_secondary_volts_; }

 private:
  double min_secondary_volts_;
};

/// The optimizer could not produce a finite-cost solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized data. `line` is 1-based, 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A waveform with too few samples for the requested spectral analysis.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/**
 * Ordered switching angles of a staircase waveform, degrees in [0, 90].
 *
 * Angles must be strictly ascending; the only duplicates allowed are a
 * trailing run at exactly 90 (a step at 90 has zero width and never fires,
 * so repeated boundary angles are degenerate but well defined). Instances
 * are immutable.
 */
class AngleSet {
 public:
  /// Requires `degrees` already sorted ascending; throws DomainError on any
  /// out-of-range value, on non-ascending input, or on duplicates below 90.
  explicit AngleSet(std::vector<double> degrees) : degrees_(std::move(degrees)) {
    check(degrees_);
  }

  std::size_t size() const { return degrees_.size(); }
  double operator[](std::size_t i) const { return degrees_[i]; }
  std::span<const double> degrees() const { return degrees_; }

  friend bool operator==(const AngleSet&, const AngleSet&) = default;

 private:
  static void check(const std::vector<double>& d) {
    if (d.empty()) throw DomainError("angle set must contain at least one angle");
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(d[i] >= 0.0 && d[i] <= 90.0))
        throw DomainError("angle " + detail::num(d[i]) + " at index " +
                          std::to_string(i) + " out of [0, 90]");
    }
    for (std::size_t i = 1; i < d.size(); ++i) {
      if (d[i] < d[i - 1])
        throw DomainError("angles not sorted ascending at index " + std::to_string(i));
      if (d[i] == d[i - 1] && d[i] != 90.0)
        throw DomainError("duplicate angle " + detail::num(d[i]) + " at index " +
                          std::to_string(i) + "; equal angles are only allowed at 90");
    }
  }

  std::vector<double> degrees_;
};

/// Sorts `raw` ascending and returns it as a validated AngleSet.
/// Out-of-range values are reported with their index in the original input.
inline AngleSet validate_angles(std::vector<double> raw) {
  if (raw.empty()) throw DomainError("angle list must not be empty");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0 && raw[i] <= 90.0))
      throw DomainError("angle " + detail::num(raw[i]) + " at index " +
                        std::to_string(i) + " out of [0, 90]");
  }
  std::sort(raw.begin(), raw.end());
  return AngleSet(std::move(raw));
}

/// Number of isolated dc sources and the nominal volts each contributes.
struct InverterConfig {
  InverterConfig(int n_sources, double v_dc) : n_sources(n_sources), v_dc(v_dc) {
    if (n_sources < 1) throw DomainError("n_sources must be >= 1");
    if (!(v_dc > 0.0) || !std::isfinite(v_dc))
      throw DomainError("v_dc must be positive and finite");
  }

  int n_sources;
  double v_dc;

  friend bool operator==(const InverterConfig&, const InverterConfig&) = default;
};

/// Fundamental output amplitude normalized by the total dc-link voltage.
/// Valid range is (0, 4/pi]; 4/pi is attained when every angle is zero.
class ModulationIndex {
 public:
  static constexpr double kMax = 4.0 / kPi;

  explicit ModulationIndex(double value) : value_(value) {
    if (!std::isfinite(value) || value <= 0.0)
      throw DomainError("modulation index must be positive");
    if (value > kMax)
      throw DomainError("modulation index " + detail::num(value) +
                        " exceeds 4/pi");
  }

  double value() const { return value_; }

  friend bool operator==(const ModulationIndex&, const ModulationIndex&) = default;

 private:
  double value_;
};

/// Six-pulse controlled rectifier: average output is gain * v_s * cos(alpha).
struct RectifierConfig {
  static constexpr double kGain = 3.0 / kPi;

  explicit RectifierConfig(double v_s) : v_s(v_s) {
    if (!(v_s > 0.0) || !std::isfinite(v_s))
      throw DomainError("secondary voltage v_s must be positive and finite");
  }

  double v_s;

  friend bool operator==(const RectifierConfig&, const RectifierConfig&) = default;
};

}  // namespace she
