#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "she/dclink.hpp"
#include "she/format.hpp"
#include "she/harmonics.hpp"
#include "she/solver.hpp"
#include "she/types.hpp"

namespace she {

enum class LutMode { conventional, proposed };

inline std::string_view to_string(LutMode mode) {
  return mode == LutMode::conventional ? "conventional" : "proposed";
}

/// One operating point of the look-up table. `firing_angle_deg` is empty
/// when the demanded dc-link voltage exceeds the rectifier ceiling.
/// `thd` is a ratio; the CSV column stores it as a percentage.
struct LutEntry {
  double vo_pu;
  LutMode mode;
  AngleSet angles;
  double dc_link_volts;
  std::optional<double> firing_angle_deg;
  double thd;

  friend bool operator==(const LutEntry&, const LutEntry&) = default;
};

inline constexpr std::string_view kLutCsvHeader =
    "vo_pu,mode,theta1_deg,theta2_deg,dc_link_volts,firing_angle_deg,thd_percent";

namespace detail {

inline std::optional<double> try_firing_angle(double e, const RectifierConfig& rect) {
  try {
    return firing_angle(e, rect);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

}  // namespace detail

/**
 * Build the operating table over the demanded per-unit voltages. Each demand
 * yields two entries: conventional (angles solved at m = demand, dc-link at
 * nominal v_dc) and proposed (the shared m = 1 angles, dc-link scaled to
 * demand * v_dc, firing angle from the rectifier equation). The single m = 1
 * solve is shared by every proposed entry, so their angles and THD are
 * identical by construction. Rectifier infeasibility is recorded per entry
 * as an absent firing angle; it never aborts the build. Rows come back
 * sorted by vo_pu ascending, conventional before proposed.
 */
inline std::vector<LutEntry> build_lut(std::span<const double> demands,
                                       const InverterConfig& config,
                                       const RectifierConfig& rect,
                                       const PsoParams& params = {},
                                       int max_order = 999) {
  if (demands.empty()) throw DomainError("demand list must not be empty");
  for (std::size_t i = 0; i < demands.size(); ++i)
    if (!(demands[i] > 0.0) || !(demands[i] <= 1.0) || !std::isfinite(demands[i]))
      throw DomainError("demand " + detail::num(demands[i]) + " at index " +
                        std::to_string(i) + " out of (0, 1]");

  PsoParams shared_params = params;
  shared_params.seed = params.seed + demands.size();
  const SolveResult shared = solve(ModulationIndex(1.0), config, shared_params);
  const double shared_thd = thd(shared.angles, max_order);

  std::vector<LutEntry> lut;
  lut.reserve(2 * demands.size());
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const double demand = demands[i];

    PsoParams p = params;
    p.seed = params.seed + i;
    // A demand of exactly 1 poses the same problem as the shared solve;
    // reuse it so both modes carry identical angles on that row.
    const SolveResult conventional =
        demand == 1.0 ? shared : solve(ModulationIndex(demand), config, p);
    lut.push_back(LutEntry{demand, LutMode::conventional, conventional.angles,
                           config.v_dc, detail::try_firing_angle(config.v_dc, rect),
                           demand == 1.0 ? shared_thd : thd(conventional.angles, max_order)});

    const double e = demand * config.v_dc;
    lut.push_back(LutEntry{demand, LutMode::proposed, shared.angles, e,
                           detail::try_firing_angle(e, rect), shared_thd});
  }
  std::stable_sort(lut.begin(), lut.end(), [](const LutEntry& a, const LutEntry& b) {
    if (a.vo_pu != b.vo_pu) return a.vo_pu < b.vo_pu;
    return static_cast<int>(a.mode) < static_cast<int>(b.mode);
  });
  return lut;
}

/// Entry of the given mode with the nearest demand. Exact matches win; ties
/// between two neighbors resolve toward the lower demand.
inline const LutEntry& lookup(std::span<const LutEntry> lut, double vo_pu,
                              LutMode mode) {
  const LutEntry* best = nullptr;
  double best_dist = 0.0;
  for (const LutEntry& e : lut) {
    if (e.mode != mode) continue;
    const double dist = std::abs(e.vo_pu - vo_pu);
    if (best == nullptr || dist < best_dist ||
        (dist == best_dist && e.vo_pu < best->vo_pu)) {
      best = &e;
      best_dist = dist;
    }
  }
  if (best == nullptr)
    throw DomainError("lookup on an empty table (no " +
                      std::string(to_string(mode)) + " entries)");
  return *best;
}

/// CSV serialization of a two-angle table. All numeric fields use shortest
/// round-trip formatting except thd_percent, which is fixed at 2 decimals.
/// An infeasible firing angle serializes as an empty field.
inline std::string serialize_lut(std::span<const LutEntry> lut) {
  std::string out{kLutCsvHeader};
  out += '\n';
  for (const LutEntry& e : lut) {
    if (e.angles.size() != 2)
      throw DomainError("LUT CSV schema holds exactly two angles per row, got " +
                        std::to_string(e.angles.size()));
    out += fmt_double(e.vo_pu);
    out += ',';
    out += to_string(e.mode);
    out += ',';
    out += fmt_double(e.angles[0]);
    out += ',';
    out += fmt_double(e.angles[1]);
    out += ',';
    out += fmt_double(e.dc_link_volts);
    out += ',';
    if (e.firing_angle_deg) out += fmt_double(*e.firing_angle_deg);
    out += ',';
    out += fmt_fixed(100.0 * e.thd, 2);
    out += '\n';
  }
  return out;
}

/// Parse a table serialized by serialize_lut. Errors carry 1-based line
/// numbers; a row with too few fields names the first missing column.
inline std::vector<LutEntry> load_lut(std::string_view csv) {
  static constexpr std::string_view kColumns[] = {
      "vo_pu",         "mode",             "theta1_deg", "theta2_deg",
      "dc_link_volts", "firing_angle_deg", "thd_percent"};

  if (csv.empty()) throw ParseError("empty LUT file", 0);

  std::vector<std::string_view> lines;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    lines.push_back(csv.substr(0, nl));
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty LUT file", 0);

  if (lines[0] != kLutCsvHeader)
    throw ParseError("line 1: header must be exactly '" + std::string(kLutCsvHeader) +
                         "'",
                     1);

  std::vector<LutEntry> lut;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t line_no = r + 1;
    std::vector<std::string_view> fields;
    std::string_view rest = lines[r];
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != 7) {
      const std::string_view missing =
          fields.size() < 7 ? kColumns[fields.size()] : "(extra fields)";
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 columns, got " +
                           std::to_string(fields.size()) + "; missing column '" +
                           std::string(missing) + "'",
                       line_no);
    }

    const double vo_pu = parse_double(fields[0], line_no, kColumns[0]);
    LutMode mode;
    if (fields[1] == "conventional")
      mode = LutMode::conventional;
    else if (fields[1] == "proposed")
      mode = LutMode::proposed;
    else
      throw ParseError("line " + std::to_string(line_no) + ": mode must be " +
                           "'conventional' or 'proposed', got '" + std::string(fields[1]) +
                           "'",
                       line_no);
    const double t1 = parse_double(fields[2], line_no, kColumns[2]);
    const double t2 = parse_double(fields[3], line_no, kColumns[3]);
    const double dc = parse_double(fields[4], line_no, kColumns[4]);
    std::optional<double> alpha;
    if (!fields[5].empty()) alpha = parse_double(fields[5], line_no, kColumns[5]);
    const double thd_pct = parse_double(fields[6], line_no, kColumns[6]);

    try {
      lut.push_back(LutEntry{vo_pu, mode, AngleSet({t1, t2}), dc, alpha, thd_pct / 100.0});
    } catch (const DomainError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return lut;
}

}  // namespace she
