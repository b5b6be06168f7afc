#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "she/dclink.hpp"
#include "she/format.hpp"
#include "she/harmonics.hpp"
#include "she/lut.hpp"
#include "she/solver.hpp"
#include "she/types.hpp"

namespace she::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kInfeasible = 3;
inline constexpr int kIo = 4;

namespace detail {

using json = nlohmann::ordered_json;

/// Options shared by the solver-backed commands. Environment variables
/// SHE_VDC and SHE_SEED supply defaults; flags always win.
struct CommonOpts {
  double vdc = 200.0;
  int sources = 2;
  std::uint64_t seed = 42;
  int swarm = 50;
  int iters = 500;
  int max_order = 999;
  double vs = 250.0;
};

inline void apply_env(CommonOpts& opts) {
  if (const char* v = std::getenv("SHE_VDC")) {
    try {
      opts.vdc = std::stod(v);
    } catch (const std::exception&) {
      throw DomainError("SHE_VDC is not a number: '" + std::string(v) + "'");
    }
  }
  if (const char* v = std::getenv("SHE_SEED")) {
    try {
      opts.seed = std::stoull(v);
    } catch (const std::exception&) {
      throw DomainError("SHE_SEED is not an integer: '" + std::string(v) + "'");
    }
  }
}

inline PsoParams pso_params(const CommonOpts& opts) {
  PsoParams p;
  p.swarm_size = opts.swarm;
  p.max_iters = opts.iters;
  p.seed = opts.seed;
  return p;
}

inline ModulationIndex parse_m(double m) {
  if (!(m > 0.0)) throw DomainError("m must be positive, got " + she::detail::num(m));
  if (m > ModulationIndex::kMax)
    throw DomainError("m exceeds 4/pi (" + she::detail::num(ModulationIndex::kMax) +
                      "), got " + she::detail::num(m));
  return ModulationIndex(m);
}

inline int write_file(const std::string& path, const std::string& content,
                      std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot open '" << path << "' for writing\n";
    return kIo;
  }
  f << content;
  f.flush();
  if (!f) {
    err << "error: failed while writing '" << path << "'\n";
    return kIo;
  }
  return kOk;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline int cmd_solve(double m_flag, const CommonOpts& opts, bool as_json,
                     std::ostream& out) {
  const ModulationIndex m = parse_m(m_flag);
  const InverterConfig config(opts.sources, opts.vdc);
  const SolveResult r = solve(m, config, pso_params(opts));
  const double thd_pct = 100.0 * thd(r.angles, opts.max_order);

  if (as_json) {
    json j;
    j["target_m"] = r.target_m;
    j["theta_deg"] = std::vector<double>(r.angles.degrees().begin(),
                                         r.angles.degrees().end());
    j["achieved_pu"] = r.achieved_pu;
    if (r.residuals.count(3)) j["residual_v3_pu"] = r.residuals.at(3);
    json res = json::object();
    for (const auto& [n, v] : r.residuals) res[std::to_string(n)] = v;
    j["residuals"] = res;
    j["cost"] = r.cost;
    j["thd_percent"] = thd_pct;
    j["iterations"] = r.iterations;
    j["seed"] = r.seed;
    out << j.dump() << '\n';
    return kOk;
  }

  out << "target_m = " << fmt_double(r.target_m) << '\n';
  for (std::size_t i = 0; i < r.angles.size(); ++i)
    out << "theta" << i + 1 << "_deg = " << fmt_fixed(r.angles[i], 4) << '\n';
  out << "achieved_pu = " << fmt_double(r.achieved_pu) << '\n';
  for (const auto& [n, v] : r.residuals)
    out << "residual_v" << n << "_pu = " << fmt_double(v) << '\n';
  out << "cost = " << fmt_double(r.cost) << '\n';
  out << "thd_percent = " << fmt_fixed(thd_pct, 2) << '\n';
  out << "iterations = " << r.iterations << '\n';
  out << "seed = " << r.seed << '\n';
  return kOk;
}

inline int cmd_sweep(double from, double to, double step, const std::string& out_path,
                     const std::string& mode, const CommonOpts& opts, std::ostream& out,
                     std::ostream& err) {
  if (!(step > 0.0)) throw DomainError("step must be positive");
  if (from > to) throw DomainError("from must not exceed to");
  const long long from_n = std::llround(from * 1e9);
  const long long to_n = std::llround(to * 1e9);
  const long long step_n = std::llround(step * 1e9);
  if (step_n <= 0) throw DomainError("step is too small");
  if (from_n <= 0 || to_n > 1000000000LL)
    throw DomainError("sweep demands must lie in (0, 1]");

  std::vector<double> demands;
  for (long long v = from_n; v <= to_n; v += step_n)
    demands.push_back(static_cast<double>(v) / 1e9);

  const InverterConfig config(opts.sources, opts.vdc);
  const RectifierConfig rect(opts.vs);
  std::vector<LutEntry> lut =
      build_lut(demands, config, rect, pso_params(opts), opts.max_order);
  if (mode != "both") {
    const LutMode keep = mode == "conventional" ? LutMode::conventional : LutMode::proposed;
    std::erase_if(lut, [&](const LutEntry& e) { return e.mode != keep; });
  }

  const int rc = write_file(out_path, serialize_lut(lut), err);
  if (rc != kOk) return rc;

  double worst = 0.0;
  for (const LutEntry& e : lut) worst = std::max(worst, e.thd);
  out << "rows=" << lut.size() << " worst_thd_percent=" << fmt_fixed(100.0 * worst, 2)
      << '\n';
  return kOk;
}

inline int cmd_spectrum(const std::string& angles_flag, const CommonOpts& opts,
                        const std::string& out_path, std::ostream& out,
                        std::ostream& err) {
  std::vector<double> raw;
  std::string_view rest = angles_flag;
  for (;;) {
    const auto comma = rest.find(',');
    raw.push_back(parse_double(rest.substr(0, comma), 0, "--angles"));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  const AngleSet angles = validate_angles(raw);
  const InverterConfig config(static_cast<int>(angles.size()), opts.vdc);
  const HarmonicSpectrum s = spectrum(angles, config, opts.max_order);

  std::ostringstream csv;
  write_spectrum_csv(s, csv);
  if (out_path.empty()) {
    out << csv.str();
    return kOk;
  }
  return write_file(out_path, csv.str(), err);
}

inline int cmd_regulate(double vo_pu, const CommonOpts& opts, bool as_json,
                        std::ostream& out) {
  const InverterConfig config(opts.sources, opts.vdc);
  const RectifierConfig rect(opts.vs);
  const Regulation r = regulate(vo_pu, config, rect);

  if (as_json) {
    json j;
    j["vo_pu"] = vo_pu;
    j["dc_link_volts"] = r.dc_link_volts;
    j["firing_angle_deg"] = r.firing_angle_deg;
    out << j.dump() << '\n';
    return kOk;
  }
  out << "dc_link_volts = " << fmt_double(r.dc_link_volts) << '\n';
  out << "firing_angle_deg = " << fmt_fixed(r.firing_angle_deg, 4) << '\n';
  return kOk;
}

inline int cmd_compare(const std::string& out_path, const CommonOpts& opts,
                       std::ostream& out, std::ostream& err) {
  std::vector<double> demands;
  for (int i = 1; i <= 10; ++i) demands.push_back(i / 10.0);

  const InverterConfig config(opts.sources, opts.vdc);
  const RectifierConfig rect(opts.vs);
  const std::vector<LutEntry> lut =
      build_lut(demands, config, rect, pso_params(opts), opts.max_order);

  out << "vo_pu  conventional_thd_percent  proposed_thd_percent\n";
  for (int i = 9; i >= 0; --i) {
    const LutEntry& conv = lookup(lut, demands[i], LutMode::conventional);
    const LutEntry& prop = lookup(lut, demands[i], LutMode::proposed);
    out << pad(fmt_double(demands[i]), 5) << "  "
        << pad(fmt_fixed(100.0 * conv.thd, 2), 24) << "  "
        << fmt_fixed(100.0 * prop.thd, 2) << '\n';
  }
  if (!out_path.empty()) return write_file(out_path, serialize_lut(lut), err);
  return kOk;
}

}  // namespace detail

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name. Exit codes: 0 success, 2 usage/validation, 3 infeasible
/// demand or solver failure, 4 I/O failure.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selective-harmonic-elimination toolkit for cascaded H-bridge"
               " inverters: PSO angle solving, distortion analysis, and"
               " dc-link regulation",
               "she"};
  app.require_subcommand(1);

  detail::CommonOpts opts;
  try {
    detail::apply_env(opts);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  double m_flag = 0.0;
  double from = 0.0, to = 0.0, step = 0.0;
  double vo_pu = 0.0;
  std::string out_path;
  std::string mode = "both";
  std::string angles_flag;
  bool as_json = false;

  auto add_solver_opts = [&opts](CLI::App* sub) {
    sub->add_option("--vdc", opts.vdc, "volts per dc source");
    sub->add_option("--sources", opts.sources, "number of isolated dc sources");
    sub->add_option("--seed", opts.seed, "optimizer seed");
    sub->add_option("--swarm", opts.swarm, "swarm size");
    sub->add_option("--iters", opts.iters, "max iterations");
    sub->add_option("--max-order", opts.max_order, "highest harmonic order");
  };

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "solve switching angles for one modulation index");
  solve_cmd->add_option("--m", m_flag, "target modulation index")->required();
  add_solver_opts(solve_cmd);
  solve_cmd->add_flag("--json", as_json, "emit a single JSON object");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "solve a demand range and write the table as CSV");
  sweep_cmd->add_option("--from", from, "first demand (per unit)")->required();
  sweep_cmd->add_option("--to", to, "last demand (per unit)")->required();
  sweep_cmd->add_option("--step", step, "demand increment")->required();
  sweep_cmd->add_option("--out", out_path, "output CSV path")->required();
  sweep_cmd->add_option("--mode", mode, "table rows to keep")
      ->check(CLI::IsMember({"conventional", "proposed", "both"}));
  sweep_cmd->add_option("--vs", opts.vs, "rectifier secondary voltage");
  add_solver_opts(sweep_cmd);

  CLI::App* spectrum_cmd =
      app.add_subcommand("spectrum", "harmonic spectrum of given angles as CSV");
  spectrum_cmd->add_option("--angles", angles_flag, "comma-separated degrees")
      ->required();
  spectrum_cmd->add_option("--vdc", opts.vdc, "volts per dc source");
  spectrum_cmd->add_option("--max-order", opts.max_order, "highest harmonic order");
  spectrum_cmd->add_option("--out", out_path, "output CSV path (default stdout)");

  CLI::App* regulate_cmd = app.add_subcommand(
      "regulate", "dc-link voltage and firing angle for a demanded output");
  regulate_cmd->add_option("--vo-pu", vo_pu, "demanded output, per unit")->required();
  regulate_cmd->add_option("--vdc", opts.vdc, "volts per dc source");
  regulate_cmd->add_option("--vs", opts.vs, "rectifier secondary voltage");
  regulate_cmd->add_option("--sources", opts.sources, "number of isolated dc sources");
  regulate_cmd->add_flag("--json", as_json, "emit a single JSON object");

  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "conventional vs proposed distortion over the standard demand grid");
  compare_cmd->add_option("--out", out_path, "also write the full table as CSV");
  compare_cmd->add_option("--vs", opts.vs, "rectifier secondary voltage");
  add_solver_opts(compare_cmd);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run 'she --help' for usage\n";
    return kUsage;
  }

  try {
    if (solve_cmd->parsed()) return detail::cmd_solve(m_flag, opts, as_json, out);
    if (sweep_cmd->parsed())
      return detail::cmd_sweep(from, to, step, out_path, mode, opts, out, err);
    if (spectrum_cmd->parsed())
      return detail::cmd_spectrum(angles_flag, opts, out_path, out, err);
    if (regulate_cmd->parsed()) return detail::cmd_regulate(vo_pu, opts, as_json, out);
    if (compare_cmd->parsed()) return detail::cmd_compare(out_path, opts, out, err);
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  err << "error: no command given\n";
  return kUsage;
}

}  // namespace she::cli
