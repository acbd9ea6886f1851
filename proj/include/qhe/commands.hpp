#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhe/analysis.hpp"
#include "qhe/dynamics.hpp"
#include "qhe/engine.hpp"
#include "qhe/ergotropy.hpp"
#include "qhe/serialize.hpp"
#include "qhe/svg.hpp"
#include "qhe/verify.hpp"

namespace qhe {

// Exit-code contract shared by all commands.
enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 1,
  exit_numeric_error = 2,
  exit_verification_failure = 3,
};

struct EvolveConfig {
  StateVector init{0.5, 0.5, 0.0, 0.0, 0.0};
  double t_max = 50.0;
  double dt = 1e-3;
  std::size_t stride = 1;
};

struct SweepConfig {
  SweepSpec spec;
};

struct FiguresConfig {
  std::vector<std::string> panels;  // empty = all panels
};

struct VerifyConfig {
  VerifyTolerances tol;
};

// A run is one command applied to one parameter set. A config file may
// carry at most one command block; CLI --set overrides are applied to the
// merged JSON before parsing.
struct RunConfig {
  EngineParams params;
  GeneratorVariant variant = GeneratorVariant::TraceConserving;
  std::filesystem::path out_dir = ".";
  std::optional<EvolveConfig> evolve_cfg;
  std::optional<SweepConfig> sweep_cfg;
  std::optional<FiguresConfig> figures_cfg;
  std::optional<VerifyConfig> verify_cfg;
  bool steady_cfg = false;
};

namespace cfg_detail {

inline EvolveConfig evolve_from_json(const json& j) {
  EvolveConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "init") c.init = state_from_json(value);
    else if (key == "t_max") c.t_max = value.get<double>();
    else if (key == "dt") c.dt = value.get<double>();
    else if (key == "stride") c.stride = value.get<std::size_t>();
    else throw std::invalid_argument("evolve: unknown key \"" + key + "\"");
  }
  if (!(c.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (!(c.t_max >= c.dt)) throw std::invalid_argument("evolve: t_max must be at least dt");
  return c;
}

inline SweepConfig sweep_from_json(const json& j) {
  SweepConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "variable") c.spec.var = sweep_variable_from_string(value.get<std::string>());
    else if (key == "from") c.spec.from = value.get<double>();
    else if (key == "to") c.spec.to = value.get<double>();
    else if (key == "steps") c.spec.steps = value.get<int>();
    else throw std::invalid_argument("sweep: unknown key \"" + key + "\"");
  }
  c.spec.validate();
  return c;
}

inline FiguresConfig figures_from_json(const json& j) {
  FiguresConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "panels") c.panels = value.get<std::vector<std::string>>();
    else throw std::invalid_argument("figures: unknown key \"" + key + "\"");
  }
  return c;
}

inline VerifyConfig verify_from_json(const json& j) {
  VerifyConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "col_sum_tol") c.tol.col_sum = value.get<double>();
    else if (key == "residual_tol") c.tol.residual_rel = value.get<double>();
    else if (key == "row_swap_tol") c.tol.row_swap = value.get<double>();
    else if (key == "evolve_gap_tol") c.tol.evolve_gap = value.get<double>();
    else if (key == "trace_drift_tol") c.tol.trace_drift = value.get<double>();
    else if (key == "perm_oracle_tol") c.tol.perm_oracle = value.get<double>();
    else if (key == "nonnegativity_tol") c.tol.nonnegativity = value.get<double>();
    else if (key == "eigen_tol") c.tol.eigen = value.get<double>();
    else if (key == "dilute_boundary_tol") c.tol.dilute_boundary = value.get<double>();
    else throw std::invalid_argument("verify: unknown key \"" + key + "\"");
  }
  return c;
}

// Dotted-path override, e.g. "params.p_h=0.3". The value is parsed as JSON
// when possible, otherwise taken as a string.
inline void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("--set expects key=value, got \"" + spec + "\"");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }

  json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) throw std::invalid_argument("--set: empty path segment in \"" + spec + "\"");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace cfg_detail

// Merges a config file (optional), repeatable --set overrides, and the
// --out/--variant flags into one validated RunConfig for `command`.
inline RunConfig load_config(const std::string& command,
                             const std::optional<std::filesystem::path>& config_path,
                             const std::vector<std::string>& overrides,
                             const std::optional<std::string>& out_dir,
                             const std::optional<std::string>& variant_flag) {
  json root = json::object();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + config_path->string());
    try {
      root = json::parse(in);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config parse error in " + config_path->string() + ": " +
                                  e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config: expected a JSON object");
  }
  for (const std::string& spec : overrides) cfg_detail::apply_override(root, spec);

  RunConfig cfg;
  int command_blocks = 0;
  for (const auto& [key, value] : root.items()) {
    if (key == "params") {
      auto [p, v] = params_from_json(value);
      cfg.params = p;
      cfg.variant = v;
    } else if (key == "out") {
      cfg.out_dir = value.get<std::string>();
    } else if (key == "steady") {
      cfg.steady_cfg = true;
      ++command_blocks;
      if (!value.is_object() || !value.empty())
        throw std::invalid_argument("steady: takes no options");
    } else if (key == "evolve") {
      cfg.evolve_cfg = cfg_detail::evolve_from_json(value);
      ++command_blocks;
    } else if (key == "sweep") {
      cfg.sweep_cfg = cfg_detail::sweep_from_json(value);
      ++command_blocks;
    } else if (key == "figures") {
      cfg.figures_cfg = cfg_detail::figures_from_json(value);
      ++command_blocks;
    } else if (key == "verify") {
      cfg.verify_cfg = cfg_detail::verify_from_json(value);
      ++command_blocks;
    } else if (key == "manifest") {
      // written by commands; accepted so a manifest can be replayed as-is
    } else {
      throw std::invalid_argument("config: unknown key \"" + key + "\"");
    }
  }
  if (command_blocks > 1)
    throw std::invalid_argument("config: at most one command block may be present");

  const bool mismatched =
      (cfg.evolve_cfg && command != "evolve") || (cfg.sweep_cfg && command != "sweep") ||
      (cfg.figures_cfg && command != "figures") || (cfg.verify_cfg && command != "verify") ||
      (cfg.steady_cfg && command != "steady");
  if (command_blocks == 1 && mismatched)
    throw std::invalid_argument("config: command block does not match command \"" + command +
                                "\"");

  if (out_dir) cfg.out_dir = *out_dir;
  if (variant_flag) cfg.variant = variant_from_string(*variant_flag);
  cfg.params.validate();
  return cfg;
}

// Whole-file atomic write: temp file in the target directory, then rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

inline json error_json(const std::string& type, const std::string& message) {
  return json{{"error", json{{"type", type}, {"message", message}}}};
}

// ---- steady ----

inline int cmd_steady(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Occupations occ = occupations(cfg.params);
    const StateVector s = steady_state(
        build_generator(occ, cfg.params.g, cfg.params.r, cfg.params.p_c, cfg.params.p_h,
                        cfg.variant));
    const double e0 = incoherent_ergotropy(cfg.params, cfg.variant);
    const ErgotropyReport rep = make_ergotropy_report(s, cfg.params, e0);

    json j = report_to_json(rep);
    j["state"] = state_to_json(s);
    j["flux"] = flux(cfg.params.g, occ, s);
    j["work"] = work(cfg.params, s);
    j["power"] = j["flux"].get<double>() * j["work"].get<double>();
    out << j.dump(2) << '\n';
    return exit_ok;
  } catch (const numeric_error& e) {
    out << error_json("numeric", e.what()).dump(2) << '\n';
    err << "steady: " << e.what() << '\n';
    return exit_numeric_error;
  } catch (const std::domain_error& e) {
    out << error_json("numeric", e.what()).dump(2) << '\n';
    err << "steady: " << e.what() << '\n';
    return exit_numeric_error;
  }
}

// ---- evolve ----

inline json evolve_manifest(const RunConfig& cfg, const EvolveConfig& ev,
                            const std::string& csv_name) {
  json j;
  j["params"] = params_to_json(cfg.params, cfg.variant);
  j["evolve"] = json{{"init", state_to_json(ev.init)},
                     {"t_max", ev.t_max},
                     {"dt", ev.dt},
                     {"stride", ev.stride}};
  j["manifest"] = json{{"command", "evolve"}, {"outputs", json::array({csv_name})}};
  return j;
}

inline int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const EvolveConfig ev = cfg.evolve_cfg.value_or(EvolveConfig{});
  try {
    const Generator gen = build_generator(cfg.params, cfg.variant);
    if (ev.dt * gen.inf_norm() > 0.1)
      err << "warning: dt * ||L||_inf = " << fmt17(ev.dt * gen.inf_norm())
          << " > 0.1, integration may be inaccurate\n";

    const Trajectory traj = evolve(gen, ev.init, ev.t_max, ev.dt, ev.stride);

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_file_atomic(cfg.out_dir / "trajectory.csv", csv.str());
    write_file_atomic(cfg.out_dir / "trajectory_manifest.json",
                      evolve_manifest(cfg, ev, "trajectory.csv").dump(2) + "\n");

    json summary;
    summary["final_trace"] = traj.states.back().trace();
    summary["steps_recorded"] = traj.times.size();
    if (cfg.variant == GeneratorVariant::TraceConserving) {
      const StateVector target = steady_state(gen);
      double gap = 0.0;
      const auto a = traj.states.back().data(), b = target.data();
      for (int i = 0; i < 5; ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
      summary["gap_to_steady_state"] = gap;
    }
    out << summary.dump(2) << '\n';
    return exit_ok;
  } catch (const numeric_error& e) {
    err << "evolve: " << e.what() << '\n';
    return exit_numeric_error;
  }
}

// ---- sweep ----

inline json sweep_manifest(const EngineParams& params, GeneratorVariant variant,
                           const SweepSpec& spec, const std::string& csv_name) {
  json j;
  j["params"] = params_to_json(params, variant);
  j["sweep"] = json{{"variable", to_string(spec.var)},
                    {"from", spec.from},
                    {"to", spec.to},
                    {"steps", spec.steps}};
  j["manifest"] = json{{"command", "sweep"},
                       {"outputs", json::array({csv_name, "crossovers.json"})}};
  return j;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SweepConfig sc = cfg.sweep_cfg.value_or(SweepConfig{});
  try {
    const SweepResult result = sweep(cfg.params, sc.spec, cfg.variant);
    const CrossoverSet crossings = detect_crossovers(result);

    std::ostringstream csv;
    write_sweep_csv(csv, result);
    write_file_atomic(cfg.out_dir / "sweep.csv", csv.str());
    write_file_atomic(cfg.out_dir / "crossovers.json", crossovers_to_json(crossings).dump(2) + "\n");
    write_file_atomic(cfg.out_dir / "sweep_manifest.json",
                      sweep_manifest(cfg.params, cfg.variant, sc.spec, "sweep.csv").dump(2) + "\n");

    std::size_t failed = 0;
    for (const auto& row : result.rows)
      if (!row.ok) ++failed;
    if (failed) err << "sweep: " << failed << " of " << result.rows.size() << " rows failed\n";

    json summary;
    summary["rows"] = result.rows.size();
    summary["failed_rows"] = failed;
    summary["crossovers"] = crossovers_to_json(crossings)["boundaries"];
    out << summary.dump(2) << '\n';
    return exit_ok;
  } catch (const numeric_error& e) {
    err << "sweep: " << e.what() << '\n';
    return exit_numeric_error;
  }
}

// ---- figures ----

namespace fig_detail {

inline std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline std::vector<Series> sweep_population_series(const SweepResult& r) {
  Series plus{"p_plus", {}, {}}, minus{"p_minus", {}, {}}, bb{"rho_bb", {}, {}},
      aa{"rho_aa", {}, {}}, erg{"ergotropy", {}, {}};
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    plus.x.push_back(row.var_value);
    plus.y.push_back(row.rho_plus);
    minus.x.push_back(row.var_value);
    minus.y.push_back(row.rho_minus);
    bb.x.push_back(row.var_value);
    bb.y.push_back(row.state.rhobb);
    aa.x.push_back(row.var_value);
    aa.y.push_back(row.state.rhoaa);
    erg.x.push_back(row.var_value);
    erg.y.push_back(row.ergotropy);
  }
  return {plus, minus, bb, aa, erg};
}

inline json panel_manifest(const std::string& panel, const EngineParams& params,
                           GeneratorVariant variant, const std::vector<std::string>& outputs) {
  json j;
  j["params"] = params_to_json(params, variant);
  j["figures"] = json{{"panels", json::array({panel})}};
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o);
  j["manifest"] = json{{"command", "figures"}, {"outputs", outs}};
  return j;
}

}  // namespace fig_detail

// Canonical panels. All use the run's base parameters with the panel's
// coherence / temperature settings applied on top, so a config can move the
// whole bundle to a different cavity occupation or bath setup.
inline const std::vector<std::string>& all_figure_panels() {
  static const std::vector<std::string> panels = {"1b", "1c", "1d", "2a", "2b",
                                                  "2c", "2d", "3a", "3b", "3c"};
  return panels;
}

inline int cmd_figures(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const FiguresConfig fc = cfg.figures_cfg.value_or(FiguresConfig{});
  const std::vector<std::string>& panels = fc.panels.empty() ? all_figure_panels() : fc.panels;

  json status = json::object();
  int hard_failures = 0;

  for (const std::string& panel : panels) {
    try {
      EngineParams p = cfg.params;
      std::ostringstream csv;
      std::string svg;
      std::vector<std::string> outputs = {panel + ".csv", panel + ".svg"};

      if (panel == "1b") {
        p.p_c = 0.1;
        p.p_h = 0.5;
        const Generator gen = build_generator(p, cfg.variant);
        const Trajectory traj = evolve(gen, {0.5, 0.5, 0.0, 0.0, 0.0}, 50.0, 1e-3, 50);
        write_trajectory_csv(csv, traj);
        Series plus{"p_plus", {}, {}}, minus{"p_minus", {}, {}}, bb{"rho_bb", {}, {}},
            aa{"rho_aa", {}, {}};
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
          const ActiveSpectrum a = active_spectrum(traj.states[i]);
          plus.x.push_back(traj.times[i]);
          plus.y.push_back(a.rho_plus);
          minus.x.push_back(traj.times[i]);
          minus.y.push_back(a.rho_minus);
          bb.x.push_back(traj.times[i]);
          bb.y.push_back(traj.states[i].rhobb);
          aa.x.push_back(traj.times[i]);
          aa.y.push_back(traj.states[i].rhoaa);
        }
        svg = line_chart_svg("time evolution of the active spectrum", "t", "eigenvalue",
                             {plus, minus, bb, aa});
      } else if (panel == "1c" || panel == "1d" || panel == "2a" || panel == "3a") {
        if (panel == "1c") p.p_c = 0.1;
        if (panel == "1d") p.p_c = 0.2;
        if (panel == "2a") { p.p_c = 0.1; p.T_h = 5.0; }
        if (panel == "3a") p.p_c = 0.6;
        const SweepResult r = sweep(p, SweepSpec{SweepVariable::PH, 0.0, 1.0, 201}, cfg.variant);
        write_sweep_csv(csv, r);
        svg = line_chart_svg("steady-state spectrum vs p_h (p_c = " + fig_detail::fmt_short(p.p_c) + ")", "p_h",
                             "value", fig_detail::sweep_population_series(r));
      } else if (panel == "2b" || panel == "2c" || panel == "2d") {
        p.p_c = 0.1;
        p.T_h = 5.0;
        double from = 0.0, to = 0.28;
        if (panel == "2c") { from = 0.28; to = 0.65; }
        if (panel == "2d") { from = 0.65; to = 1.0; }
        const SweepResult r = sweep(p, SweepSpec{SweepVariable::PH, from, to, 101}, cfg.variant);
        write_sweep_csv(csv, r);
        Series ratio{"E/E0", {}, {}};
        for (const auto& row : r.rows)
          if (row.ok && row.ratio) {
            ratio.x.push_back(row.var_value);
            ratio.y.push_back(*row.ratio);
          }
        svg = line_chart_svg("ergotropy ratio on p_h in [" + fig_detail::fmt_short(from) + ", " + fig_detail::fmt_short(to) + "]",
                             "p_h", "E/E0", {ratio});
      } else if (panel == "3b" || panel == "3c") {
        const bool power_panel = panel == "3c";
        std::vector<Series> series;
        std::ostringstream all_csv;
        bool first = true;
        for (double pc : {0.1, 0.2, 0.6}) {
          EngineParams q = p;
          q.p_c = pc;
          const SweepResult r = sweep(q, SweepSpec{SweepVariable::PH, 0.0, 1.0, 201}, cfg.variant);
          std::ostringstream block;
          write_sweep_csv(block, r);
          std::string text = block.str();
          if (!first) text.erase(0, text.find('\n') + 1);  // keep one header
          all_csv << text;
          first = false;
          Series s{"p_c = " + fig_detail::fmt_short(pc), {}, {}};
          for (const auto& row : r.rows)
            if (row.ok) {
              s.x.push_back(row.ergotropy);
              s.y.push_back(power_panel ? row.power_p : row.flux_j);
            }
          series.push_back(std::move(s));
        }
        csv << all_csv.str();
        svg = line_chart_svg(power_panel ? "power vs ergotropy" : "flux vs ergotropy",
                             "ergotropy", power_panel ? "power" : "flux", series);
      } else {
        throw std::invalid_argument("unknown figure panel \"" + panel + "\"");
      }

      write_file_atomic(cfg.out_dir / (panel + ".csv"), csv.str());
      write_file_atomic(cfg.out_dir / (panel + ".svg"), svg);
      outputs.push_back(panel + "_manifest.json");
      write_file_atomic(cfg.out_dir / (panel + "_manifest.json"),
                        fig_detail::panel_manifest(panel, cfg.params, cfg.variant, outputs)
                                .dump(2) +
                            "\n");
      status[panel] = "ok";
    } catch (const std::invalid_argument& e) {
      status[panel] = std::string("error: ") + e.what();
      err << "figures: " << panel << ": " << e.what() << '\n';
      ++hard_failures;
    } catch (const std::exception& e) {
      status[panel] = std::string("error: ") + e.what();
      err << "figures: " << panel << ": " << e.what() << '\n';
    }
  }

  write_file_atomic(cfg.out_dir / "figures_status.json", status.dump(2) + "\n");
  out << status.dump(2) << '\n';
  return hard_failures ? exit_config_error : exit_ok;
}

// ---- verify ----

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const VerifyConfig vc = cfg.verify_cfg.value_or(VerifyConfig{});
  const VerificationReport report = run_verification(vc.tol);
  const json j = verification_to_json(report);
  write_file_atomic(cfg.out_dir / "verify_report.json", j.dump(2) + "\n");
  out << j.dump(2) << '\n';
  if (!report.hard_pass()) {
    for (const auto& s : report.suites)
      if (s.hard && !s.pass) err << "verify: FAIL " << s.name << ": " << s.detail << '\n';
    return exit_verification_failure;
  }
  return exit_ok;
}

}  // namespace qhe
