// Acceptance suite: one criterion per function, one PASS/FAIL line each,
// soft comparisons reported as INFO lines. Exit code is the number of
// failed criteria. An optional argv[1] selects a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qhe/analysis.hpp"
#include "qhe/commands.hpp"
#include "qhe/dynamics.hpp"
#include "qhe/engine.hpp"
#include "qhe/ergotropy.hpp"
#include "test_support.hpp"

using namespace qhe;
namespace fs = std::filesystem;

namespace {

int failures = 0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void pass(const std::string& name, const std::string& detail) {
  std::cout << "[PASS] " << name << ": " << detail << "\n";
}

void fail(const std::string& name, const std::string& detail) {
  std::cout << "[FAIL] " << name << ": " << detail << "\n";
  ++failures;
}

void info(const std::string& name, const std::string& detail) {
  std::cout << "[INFO] " << name << ": " << detail << "\n";
}

void check(bool ok, const std::string& name, const std::string& detail) {
  ok ? pass(name, detail) : fail(name, detail);
}

EngineParams base_params(double p_c, double p_h) {
  EngineParams p;  // defaults are the reference operating point, n_ell = 0
  p.p_c = p_c;
  p.p_h = p_h;
  return p;
}

const Signature kSymmetric{Level::Plus, Level::Minus, Level::Bb, Level::Aa};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// C1: zero-ergotropy regime. Sweep p_h at p_c = 0.1: the passive ordering
// stays (plus, minus, bb, aa) across the range and the ergotropy vanishes
// there to 1e-12.
void criterion1() {
  const SweepResult r = sweep(base_params(0.1, 0.0), SweepSpec{SweepVariable::PH, 0.0, 1.0, 201});
  bool all_ok = true, signature_constant = true;
  double worst = 0.0;
  for (const SweepRow& row : r.rows) {
    if (!row.ok) {
      all_ok = false;
      continue;
    }
    if (row.signature != kSymmetric) signature_constant = false;
    if (row.signature == kSymmetric) worst = std::max(worst, std::abs(row.ergotropy));
  }
  check(all_ok && signature_constant && worst <= 1e-12, "C1 zero-ergotropy regime",
        "signature (+,-,bb,aa) across 201 points: " + std::string(signature_constant ? "yes" : "no") +
            ", max |ergotropy| at that signature = " + num(worst));
}

// C2: ergotropy onset at p_c = 0.2: a single crossover via rho_minus/rho_bb
// inversion where the ergotropy turns positive, onset and crossover within
// one grid cell, monotone growth beyond. Deviation from the published 0.49
// is reported.
void criterion2() {
  const SweepSpec spec{SweepVariable::PH, 0.0, 1.0, 201};
  const SweepResult r = sweep(base_params(0.2, 0.0), spec);
  const CrossoverSet crossings = detect_crossovers(r);
  const double cell = (spec.to - spec.from) / (spec.steps - 1);

  int onset_index = -1;
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (r.rows[i].ok && r.rows[i].ergotropy > 1e-12) {
      onset_index = static_cast<int>(i);
      break;
    }

  const Signature swapped{Level::Plus, Level::Bb, Level::Minus, Level::Aa};
  const bool single = crossings.boundaries.size() == 1;
  const bool via_minus_bb =
      single && crossings.boundaries[0].before == kSymmetric &&
      crossings.boundaries[0].after == swapped;

  bool coincide = false, monotone = true;
  if (single && onset_index > 0) {
    coincide = std::abs(r.rows[onset_index].var_value - crossings.boundaries[0].value) <=
               cell + 1e-12;
    for (std::size_t i = onset_index + 1; i < r.rows.size(); ++i)
      if (r.rows[i].ergotropy < r.rows[i - 1].ergotropy - 1e-12) monotone = false;
  }

  std::ostringstream detail;
  detail << crossings.boundaries.size() << " crossover(s), onset "
         << (onset_index >= 0 ? "at p_h = " + num(r.rows[onset_index].var_value)
                              : "not found");
  check(single && via_minus_bb && onset_index > 0 && coincide && monotone,
        "C2 ergotropy onset", detail.str());
  if (single)
    info("C2 ergotropy onset", "crossover at p_h = " + num(crossings.boundaries[0].value) +
                                    ", deviation from published 0.49 = " +
                                    num(std::abs(crossings.boundaries[0].value - 0.49)));
  else
    info("C2 ergotropy onset",
         "no rho_minus/rho_bb crossover exists on [0, 1] for the trace-conserving generator "
         "at these parameters; published onset 0.49 not reproducible");
}

// C3: direct solve and long-time integration agree to 1e-6 over randomized
// parameter sets; each direct solve stays under 50 ms.
void criterion3() {
  std::mt19937_64 rng(0xACCE5501ULL);
  double worst_gap = 0.0, worst_ms = 0.0;
  for (int k = 0; k < 20; ++k) {
    const EngineParams p = support::random_params(rng);
    const Generator gen = build_generator(p);
    const auto t0 = std::chrono::steady_clock::now();
    const StateVector target = steady_state(gen);
    const auto t1 = std::chrono::steady_clock::now();
    worst_ms = std::max(worst_ms, std::chrono::duration<double, std::milli>(t1 - t0).count());
    const Trajectory traj = evolve(gen, {0.5, 0.5, 0.0, 0.0, 0.0}, 200.0, 1e-3, 200000);
    worst_gap = std::max(worst_gap, support::sup_gap(traj.states.back(), target));
  }
  check(worst_gap <= 1e-6 && worst_ms < 50.0, "C3 steady-state/integration equivalence",
        "max sup-norm gap = " + num(worst_gap) + ", max solve time = " + num(worst_ms) +
            " ms over 20 randomized parameter sets");
}

// C4: the trace-conserving generator holds the trace to 1e-9 over t in
// [0, 100] at dt = 1e-3, and the verbatim generator fails the column-sum
// audit by exactly +r in columns 1 and 2.
void criterion4() {
  const Generator gen = build_generator(base_params(0.1, 0.5));
  const Trajectory traj = evolve(gen, {0.5, 0.5, 0.0, 0.0, 0.0}, 100.0, 1e-3, 100);
  double drift = 0.0;
  for (const StateVector& s : traj.states) drift = std::max(drift, std::abs(s.trace() - 1.0));

  double defect_err = 0.0, others = 0.0;
  for (double r_val : {1.0, 2.5}) {
    EngineParams p = base_params(0.3, 0.7);
    p.r = r_val;
    const auto sums = population_column_sums(build_generator(p, GeneratorVariant::Verbatim));
    defect_err = std::max({defect_err, std::abs(sums[0] - r_val), std::abs(sums[1] - r_val)});
    others = std::max({others, std::abs(sums[2]), std::abs(sums[3]), std::abs(sums[4])});
  }
  check(drift <= 1e-9 && defect_err <= 1e-12 && others <= 1e-14, "C4 trace conservation",
        "max |trace - 1| = " + num(drift) + "; verbatim column defect matches +r within " +
            num(defect_err));
}

// C5: rearrangement ergotropy equals the brute-force minimum over all 24
// eigenvalue-to-energy assignments; nonnegativity over 1000 random cases.
void criterion5() {
  std::mt19937_64 rng(0xACCE5502ULL);
  double worst_gap = 0.0;
  for (int k = 0; k < 200; ++k) {
    const EngineParams p = support::random_params(rng);
    const StateVector s = support::random_valid_state(rng);
    worst_gap = std::max(worst_gap,
                         std::abs(ergotropy_general(s, p) - support::oracle_ergotropy(s, p)));
  }
  double most_negative = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const EngineParams p = support::random_params(rng);
    const StateVector s = support::random_valid_state(rng);
    most_negative = std::min(most_negative, ergotropy_general(s, p));
  }
  check(worst_gap <= 1e-12 && most_negative >= -1e-12, "C5 ergotropy oracle equivalence",
        "max |general - oracle| = " + num(worst_gap) + ", most negative value = " +
            num(most_negative));
}

// C6: the dilute-occupation oracle finds the incoherent inversion boundary
// at n_c/n_h = 1/3 (g = r = 1) and nothing when g^2 > 2r.
void criterion6() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(i / 40.0);
  const auto boundaries = inversion_oracle(base_params(0.0, 0.0), grid, 0.01);
  const bool found = boundaries.size() == 1;
  const double dev = found ? std::abs(boundaries[0] - 1.0 / 3.0) : 1.0;

  EngineParams strong = base_params(0.0, 0.0);
  strong.g = 2.0;
  const auto none = inversion_oracle(strong, grid, 0.01);

  check(found && dev <= 1e-3 && none.empty(), "C6 incoherent inversion boundary",
        (found ? "boundary at n_c/n_h = " + num(boundaries[0]) + " (|dev from 1/3| = " +
                     num(dev) + ")"
               : "no boundary found") +
            "; boundaries for g^2 > 2r: " + std::to_string(none.size()));
}

// C7: the published threshold formula evaluates to 0.4611 in its stated
// limit; the sign-change oracle is required to agree within 1e-2. The
// published onset for the p_c = 0.6 scan (0.38) is compared as a soft report.
void criterion7() {
  const QuasiprobThreshold th = negative_quasiprob_threshold(1e-6, 1.0, 0.0, 0.0, 1.0, 1.0);
  const bool formula_ok =
      th.n1 == 161.0 && std::abs(th.p_h_threshold - 0.46107219255619003) <= 1e-12;

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  EngineParams p = base_params(0.0, 0.0);
  const auto changes = quasiprob_sign_oracle(p, grid, OccupationInjection{1e-6, 1.0, 0.0});
  const bool oracle_agrees =
      changes.size() == 1 && std::abs(changes[0] - th.p_h_threshold) <= 1e-2;

  check(formula_ok && oracle_agrees, "C7 negative-quasiprobability threshold",
        "formula p_h = " + num(th.p_h_threshold) + ", oracle " +
            (changes.empty() ? std::string("found no sign change of rho_minus on [0, 1]")
                             : "sign change at p_h = " + num(changes[0])));

  const auto fig3a = quasiprob_sign_oracle(base_params(0.6, 0.0), grid);
  info("C7 negative-quasiprobability threshold",
       std::string("p_c = 0.6 scan: ") +
           (fig3a.empty() ? "no sign change found; published onset 0.38 not reproduced"
                          : "sign change at p_h = " + num(fig3a[0]) +
                                ", deviation from published 0.38 = " +
                                num(std::abs(fig3a[0] - 0.38))));
}

// C8: multiple-ergotropy intervals at T_h = 5, p_c = 0.1: at least three
// distinct passive orderings separated by two crossovers. Boundary
// locations vs the published 0.28 / 0.65 and the ratio behavior are
// reported softly.
void criterion8() {
  EngineParams p = base_params(0.1, 0.0);
  p.T_h = 5.0;
  const SweepResult r = sweep(p, SweepSpec{SweepVariable::PH, 0.0, 1.0, 201});
  const CrossoverSet crossings = detect_crossovers(r);

  std::set<std::string> distinct;
  for (const SweepRow& row : r.rows)
    if (row.ok) distinct.insert(signature_compact(row.signature));

  check(distinct.size() >= 3 && crossings.boundaries.size() == 2,
        "C8 multiple-ergotropy intervals",
        std::to_string(distinct.size()) + " distinct signature(s), " +
            std::to_string(crossings.boundaries.size()) + " crossover(s)");

  std::ostringstream detail;
  detail << "boundaries:";
  for (const Crossover& c : crossings.boundaries) detail << ' ' << num(c.value);
  if (crossings.boundaries.empty()) detail << " none";
  detail << " (published: 0.28, 0.65); signatures seen:";
  for (const auto& s : distinct) detail << " [" << s << "]";
  info("C8 multiple-ergotropy intervals", detail.str());

  const double e0 = r.rows.front().ok ? r.rows.front().e0 : std::nan("");
  info("C8 multiple-ergotropy intervals",
       "incoherent reference E0 = " + num(e0) +
           (e0 > 1e-15 ? "" : "; ratio E/E0 undefined at these parameters, published fivefold "
                              "growth not comparable"));
}

// C9: flux and power peak at interior p_h while the ergotropy maximum sits
// at p_h = 1, for p_c in {0.1, 0.2, 0.6}; the ergotropy at maximum power is
// reported with its spread across the three runs.
void criterion9() {
  const SweepSpec spec{SweepVariable::PH, 0.0, 1.0, 101};
  bool flux_interior = true, power_interior = true, ergotropy_at_one = true,
       non_coincident = true;
  std::vector<double> ergotropy_at_max_power;

  for (double pc : {0.1, 0.2, 0.6}) {
    const EngineParams p = base_params(pc, 0.0);
    const OptimizeResult f = optimize(Metric::Flux, p, spec);
    const OptimizeResult w = optimize(Metric::Power, p, spec);
    const OptimizeResult e = optimize(Metric::Ergotropy, p, spec);

    const auto interior = [&](const OptimizeResult& res) {
      return !res.degenerate && res.arg > spec.from + 1e-3 && res.arg < spec.to - 1e-3;
    };
    flux_interior = flux_interior && interior(f);
    power_interior = power_interior && interior(w);
    ergotropy_at_one = ergotropy_at_one && !e.degenerate && std::abs(e.arg - 1.0) <= 1e-3;
    non_coincident = non_coincident && std::abs(f.arg - e.arg) > 1e-3 &&
                     std::abs(w.arg - e.arg) > 1e-3;
    ergotropy_at_max_power.push_back(w.ergotropy_at_arg);

    info("C9 flux/power trade-off",
         "p_c = " + num(pc) + ": flux max at p_h = " + num(f.arg) + ", power max at p_h = " +
             num(w.arg) + ", ergotropy max at p_h = " + num(e.arg) +
             (e.degenerate ? " (degenerate: ergotropy flat over the sweep)" : ""));
  }

  check(flux_interior && power_interior && ergotropy_at_one && non_coincident,
        "C9 flux/power trade-off",
        std::string("flux interior: ") + (flux_interior ? "yes" : "no") +
            ", power interior: " + (power_interior ? "yes" : "no") +
            ", ergotropy max at p_h = 1: " + (ergotropy_at_one ? "yes" : "no"));

  double lo = ergotropy_at_max_power[0], hi = lo;
  for (double v : ergotropy_at_max_power) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double spread = (std::abs(hi) > 1e-15) ? (hi - lo) / std::abs(hi) : 0.0;
  info("C9 flux/power trade-off",
       "ergotropy at max power = {" + num(ergotropy_at_max_power[0]) + ", " +
           num(ergotropy_at_max_power[1]) + ", " + num(ergotropy_at_max_power[2]) +
           "}, relative spread = " + num(spread));
}

// C10: byte-identical regeneration of every CSV from its manifest.
void criterion10() {
  const fs::path base =
      fs::temp_directory_path() / ("qhe_acceptance_" + std::to_string(std::random_device{}()));
  const fs::path dir_a = base / "a", dir_b = base / "b", dir_c = base / "c", dir_d = base / "d";
  bool ok = true;
  std::string detail;
  try {
    std::ostringstream sink, sink_err;

    RunConfig sweep_cfg;
    sweep_cfg.params.p_c = 0.2;
    sweep_cfg.out_dir = dir_a;
    SweepConfig sc;
    sc.spec = SweepSpec{SweepVariable::PH, 0.0, 1.0, 201};
    sweep_cfg.sweep_cfg = sc;
    if (cmd_sweep(sweep_cfg, sink, sink_err) != exit_ok) throw std::runtime_error("sweep failed");
    const RunConfig sweep_replay = load_config("sweep", dir_a / "sweep_manifest.json", {},
                                               dir_b.string(), std::nullopt);
    if (cmd_sweep(sweep_replay, sink, sink_err) != exit_ok)
      throw std::runtime_error("sweep replay failed");
    const bool sweep_same = slurp(dir_a / "sweep.csv") == slurp(dir_b / "sweep.csv") &&
                            slurp(dir_a / "crossovers.json") == slurp(dir_b / "crossovers.json");

    RunConfig ev_cfg;
    ev_cfg.params.p_c = 0.1;
    ev_cfg.params.p_h = 0.5;
    ev_cfg.out_dir = dir_c;
    EvolveConfig ev;
    ev.t_max = 20.0;
    ev.stride = 100;
    ev_cfg.evolve_cfg = ev;
    if (cmd_evolve(ev_cfg, sink, sink_err) != exit_ok) throw std::runtime_error("evolve failed");
    const RunConfig ev_replay = load_config("evolve", dir_c / "trajectory_manifest.json", {},
                                            dir_d.string(), std::nullopt);
    if (cmd_evolve(ev_replay, sink, sink_err) != exit_ok)
      throw std::runtime_error("evolve replay failed");
    const bool ev_same = slurp(dir_c / "trajectory.csv") == slurp(dir_d / "trajectory.csv");

    ok = sweep_same && ev_same;
    detail = std::string("sweep CSV byte-identical: ") + (sweep_same ? "yes" : "no") +
             ", trajectory CSV byte-identical: " + (ev_same ? "yes" : "no");
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  fs::remove_all(base);
  check(ok, "C10 determinism", detail);
}

}  // namespace

int main(int argc, char** argv) {
  const int select = argc > 1 ? std::atoi(argv[1]) : 0;
  const auto run = [&](int n, void (*fn)()) {
    if (select == 0 || select == n) fn();
  };
  run(1, criterion1);
  run(2, criterion2);
  run(3, criterion3);
  run(4, criterion4);
  run(5, criterion5);
  run(6, criterion6);
  run(7, criterion7);
  run(8, criterion8);
  run(9, criterion9);
  run(10, criterion10);
  return failures;
}
