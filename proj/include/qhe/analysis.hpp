#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhe/dynamics.hpp"
#include "qhe/engine.hpp"
#include "qhe/ergotropy.hpp"

namespace qhe {

// Photon flux into the work mode, j = g^2 (n_tilde_ell rhoaa - n_ell rhobb).
inline double flux(double g, const Occupations& o, const StateVector& s) {
  return g * g * (o.n_tilde_ell * s.rhoaa - o.n_ell * s.rhobb);
}

inline double flux(const EngineParams& p, const StateVector& s) {
  return flux(p.g, occupations(p), s);
}

// Work per emitted photon, W = (eps_a - eps_b) - T_c log(rhoaa / rhobb).
inline double work(const EngineParams& p, const StateVector& s) {
  if (!(s.rhoaa > 0.0) || !(s.rhobb > 0.0))
    throw std::domain_error("work: upper populations must be positive");
  return (p.eps_a - p.eps_b) - p.T_c * std::log(s.rhoaa / s.rhobb);
}

inline double power(double g, const Occupations& o, const EngineParams& p, const StateVector& s) {
  return flux(g, o, s) * work(p, s);
}

inline double power(const EngineParams& p, const StateVector& s) {
  return flux(p, s) * work(p, s);
}

// Published bounds on n_c/n_h for population inversion between the upper
// two levels, evaluated exactly as printed. x_minus <= x_plus is the
// mathematical root order; the source text labels them the other way
// around, which the steady-state oracle below adjudicates.
struct InversionBounds {
  double x_minus = 0.0;
  double x_plus = 0.0;
  double b_term = 0.0;
  double discriminant = 0.0;
  bool real = false;
};

inline InversionBounds inversion_bounds(double g, double r, double p_c, double p_h) {
  if (!(p_c < 1.0))
    throw std::domain_error("inversion_bounds: singular at p_c = 1 (denominator 1 - p_c^2)");
  const double g2 = g * g;
  InversionBounds out;
  out.b_term = (g2 * (1.0 - p_c * p_h) - r * (p_h * p_h - p_c * p_c)) /
               ((g2 + 2.0 * r) * (1.0 - p_c * p_c));
  out.discriminant = out.b_term * out.b_term -
                     (g2 - 2.0 * r) * (1.0 + p_h * p_h) / ((g2 + 2.0 * r) * (1.0 + p_c * p_c));
  out.real = out.discriminant >= 0.0;
  if (out.real) {
    const double root = std::sqrt(out.discriminant);
    out.x_minus = out.b_term - root;
    out.x_plus = out.b_term + root;
  } else {
    out.x_minus = out.x_plus = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

inline InversionBounds inversion_bounds(const EngineParams& p) {
  return inversion_bounds(p.g, p.r, p.p_c, p.p_h);
}

// Published closed form for the hot coherence value beyond which the
// steady-state quasiprobability rho_minus turns negative, stated for the
// regime n_c << n_h with g = r = 1. Outside that regime the value is
// advisory only.
struct QuasiprobThreshold {
  double n1 = 0.0;
  double p_h_threshold = 0.0;
  bool advisory = false;  // true when evaluated outside the stated regime
};

inline QuasiprobThreshold negative_quasiprob_threshold(double n_c, double n_h, double n_ell,
                                                       double p_c, double g, double r) {
  QuasiprobThreshold out;
  const double m = n_ell + 2.0;
  const double ntl = n_ell + 1.0;
  const double nth = n_h + 1.0;
  out.n1 = 8.0 * n_h * n_h * m * m + 8.0 * n_h * m * (3.0 * n_ell + 5.0) +
           17.0 * n_ell * n_ell + ntl * ntl * p_c * p_c + 2.0 * ntl * ntl * p_c +
           58.0 * n_ell + 49.0;
  out.p_h_threshold =
      (std::sqrt(out.n1) - (2.0 * n_h * m + n_ell * (p_c + 3.0) + p_c + 5.0)) / (2.0 * nth * m);
  out.advisory = !(n_c <= 1e-3 * n_h) || g != 1.0 || r != 1.0;
  return out;
}

inline QuasiprobThreshold negative_quasiprob_threshold(const EngineParams& p) {
  const Occupations o = occupations(p);
  return negative_quasiprob_threshold(o.n_c, o.n_h, o.n_ell, p.p_c, p.g, p.r);
}

// Occupation-injection block for the brute-force verifiers: Bose-Einstein
// factors set directly so limits like n_c << n_h are exact.
struct OccupationInjection {
  double n_c = 0.0;
  double n_h = 0.0;
  double n_ell = 0.0;
};

namespace detail {

// Bisection on a sign change of f over [lo, hi]; f(lo) and f(hi) must have
// opposite signs. Returns the midpoint of the final bracket.
inline double bisect_sign_change(const std::function<double(double)>& f, double lo, double hi,
                                 double f_lo, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Brute-force verifier for the inversion bounds: scans n_c/n_h over
// `ratio_grid` at fixed n_h = scale, solves each steady state exactly and
// bisection-refines every sign change of rhoaa - rhobb to 1e-8 in the
// ratio. No sign change means no inversion boundary in the scanned window.
inline std::vector<double> inversion_oracle(const EngineParams& params,
                                            std::span<const double> ratio_grid, double scale,
                                            GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  if (ratio_grid.size() < 2)
    throw std::invalid_argument("inversion_oracle: need at least two grid points");
  for (std::size_t i = 1; i < ratio_grid.size(); ++i)
    if (!(ratio_grid[i] > ratio_grid[i - 1]))
      throw std::invalid_argument("inversion_oracle: ratio grid must be ascending");
  if (!(scale > 0.0)) throw std::invalid_argument("inversion_oracle: scale must be positive");

  const double n_ell = params.cavity_occupation();
  const auto gap = [&](double ratio) {
    const Occupations o = make_occupations(ratio * scale, scale, n_ell, params.p_c, params.p_h);
    const StateVector s =
        steady_state(build_generator(o, params.g, params.r, params.p_c, params.p_h, variant));
    return s.rhoaa - s.rhobb;
  };

  std::vector<double> boundaries;
  double prev = gap(ratio_grid[0]);
  for (std::size_t i = 1; i < ratio_grid.size(); ++i) {
    const double cur = gap(ratio_grid[i]);
    if ((prev <= 0.0) != (cur <= 0.0))
      boundaries.push_back(
          detail::bisect_sign_change(gap, ratio_grid[i - 1], ratio_grid[i], prev, 1e-8));
    prev = cur;
  }
  return boundaries;
}

// Verifier for the negative-quasiprobability threshold: locates sign
// changes of the steady-state rho11 - rho12 over a p_h grid, refined to
// 1e-6. Occupations may be injected to realize the n_c << n_h limit.
inline std::vector<double> quasiprob_sign_oracle(
    const EngineParams& params, std::span<const double> p_h_grid,
    std::optional<OccupationInjection> injection = std::nullopt,
    GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  if (p_h_grid.size() < 2)
    throw std::invalid_argument("quasiprob_sign_oracle: need at least two grid points");
  for (std::size_t i = 1; i < p_h_grid.size(); ++i)
    if (!(p_h_grid[i] > p_h_grid[i - 1]))
      throw std::invalid_argument("quasiprob_sign_oracle: p_h grid must be ascending");

  const auto rho_minus_at = [&](double p_h) {
    const Occupations o = injection
                              ? make_occupations(injection->n_c, injection->n_h, injection->n_ell,
                                                 params.p_c, p_h)
                              : [&] {
                                  EngineParams q = params;
                                  q.p_h = p_h;
                                  return occupations(q);
                                }();
    const StateVector s =
        steady_state(build_generator(o, params.g, params.r, params.p_c, p_h, variant));
    return s.rho11 - s.rho12;
  };

  std::vector<double> changes;
  double prev = rho_minus_at(p_h_grid[0]);
  for (std::size_t i = 1; i < p_h_grid.size(); ++i) {
    const double cur = rho_minus_at(p_h_grid[i]);
    if ((prev <= 0.0) != (cur <= 0.0))
      changes.push_back(
          detail::bisect_sign_change(rho_minus_at, p_h_grid[i - 1], p_h_grid[i], prev, 1e-6));
    prev = cur;
  }
  return changes;
}

// ---- parameter sweeps ----

enum class SweepVariable { PH, PC, TH, NEll };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::PH: return "p_h";
    case SweepVariable::PC: return "p_c";
    case SweepVariable::TH: return "T_h";
    case SweepVariable::NEll: return "n_ell";
  }
  return "?";
}

inline SweepVariable sweep_variable_from_string(const std::string& s) {
  if (s == "p_h") return SweepVariable::PH;
  if (s == "p_c") return SweepVariable::PC;
  if (s == "T_h") return SweepVariable::TH;
  if (s == "n_ell") return SweepVariable::NEll;
  throw std::invalid_argument("unknown sweep variable: " + s);
}

inline EngineParams with_variable(const EngineParams& base, SweepVariable var, double x) {
  EngineParams p = base;
  switch (var) {
    case SweepVariable::PH: p.p_h = x; break;
    case SweepVariable::PC: p.p_c = x; break;
    case SweepVariable::TH: p.T_h = x; break;
    case SweepVariable::NEll:
      p.n_ell = x;
      p.T_ell.reset();
      break;
  }
  return p;
}

struct SweepSpec {
  SweepVariable var = SweepVariable::PH;
  double from = 0.0;
  double to = 1.0;
  int steps = 201;

  double value_at(int i) const {
    return from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }

  void validate() const {
    if (!(from < to)) throw std::invalid_argument("sweep: require from < to");
    if (steps < 2) throw std::invalid_argument("sweep: require steps >= 2");
    const bool unit = var == SweepVariable::PH || var == SweepVariable::PC;
    if (unit && (from < 0.0 || to > 1.0))
      throw std::invalid_argument("sweep: coherence parameters live in [0, 1]");
    if (var == SweepVariable::TH && !(from > 0.0))
      throw std::invalid_argument("sweep: T_h must stay positive");
    if (var == SweepVariable::NEll && from < 0.0)
      throw std::invalid_argument("sweep: n_ell must stay >= 0");
  }
};

struct SweepRow {
  double var_value = 0.0;
  double p_c = 0.0;
  double p_h = 0.0;
  StateVector state;
  double rho_plus = 0.0;
  double rho_minus = 0.0;
  Signature signature{};
  double ergotropy = 0.0;
  double e0 = 0.0;
  std::optional<double> ratio;
  double flux_j = 0.0;
  double work_w = 0.0;
  double power_p = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  EngineParams base;
  SweepSpec spec;
  GeneratorVariant variant = GeneratorVariant::TraceConserving;
  std::vector<SweepRow> rows;
};

// One steady-state solve per grid point. The incoherent reference E0 uses
// the row's parameters with both coherence parameters cleared; for p_c/p_h
// sweeps that base does not change across rows and is solved once. Per-row
// solver failures are recorded in the row and do not abort the sweep.
inline SweepResult sweep(const EngineParams& base, const SweepSpec& spec,
                         GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  base.validate();
  spec.validate();

  SweepResult result{base, spec, variant, {}};
  result.rows.reserve(static_cast<std::size_t>(spec.steps));

  const bool e0_constant = spec.var == SweepVariable::PH || spec.var == SweepVariable::PC;
  std::optional<double> e0_cache;

  for (int i = 0; i < spec.steps; ++i) {
    SweepRow row;
    row.var_value = spec.value_at(i);
    const EngineParams p = with_variable(base, spec.var, row.var_value);
    row.p_c = p.p_c;
    row.p_h = p.p_h;
    try {
      const Occupations occ = occupations(p);
      row.state = steady_state(build_generator(occ, p.g, p.r, p.p_c, p.p_h, variant));
      const ActiveSpectrum spectrum = active_spectrum(row.state);
      row.rho_plus = spectrum.rho_plus;
      row.rho_minus = spectrum.rho_minus;

      double e0;
      if (e0_constant && e0_cache) {
        e0 = *e0_cache;
      } else {
        e0 = incoherent_ergotropy(p, variant);
        if (e0_constant) e0_cache = e0;
      }

      const ErgotropyReport rep = make_ergotropy_report(row.state, p, e0);
      row.signature = rep.signature;
      row.ergotropy = rep.ergotropy;
      row.e0 = rep.e0;
      row.ratio = rep.ratio;
      row.flux_j = flux(p.g, occ, row.state);
      row.work_w = work(p, row.state);
      row.power_p = row.flux_j * row.work_w;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.ergotropy = row.e0 = row.flux_j = row.work_w = row.power_p = nan;
      row.rho_plus = row.rho_minus = nan;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

// ---- passive-state crossovers ----

struct Crossover {
  double value = 0.0;
  Signature before{};
  Signature after{};
};

struct CrossoverSet {
  std::vector<Crossover> boundaries;
};

// Finds adjacent sweep rows whose passive orderings differ and refines each
// boundary to 1e-6 in the swept variable by re-solving the steady state.
inline CrossoverSet detect_crossovers(const SweepResult& sweep_result) {
  const auto signature_at = [&](double x) {
    const EngineParams p = with_variable(sweep_result.base, sweep_result.spec.var, x);
    const StateVector s = steady_state(build_generator(p, sweep_result.variant));
    return passive_state(s, p).signature;
  };

  CrossoverSet out;
  const auto& rows = sweep_result.rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i - 1].ok || !rows[i].ok) continue;
    if (rows[i - 1].signature == rows[i].signature) continue;

    double lo = rows[i - 1].var_value;
    double hi = rows[i].var_value;
    Signature sig_lo = rows[i - 1].signature;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      if (signature_at(mid) == sig_lo)
        lo = mid;
      else
        hi = mid;
    }
    out.boundaries.push_back({0.5 * (lo + hi), sig_lo, signature_at(hi)});
  }
  return out;
}

// ---- single-variable optimization ----

enum class Metric { Flux, Power, Ergotropy };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::Flux: return "flux";
    case Metric::Power: return "power";
    case Metric::Ergotropy: return "ergotropy";
  }
  return "?";
}

struct OptimizeResult {
  double arg = 0.0;
  double value = 0.0;
  double ergotropy_at_arg = 0.0;
  bool degenerate = false;  // metric flat over the grid
};

// Coarse grid argmax followed by golden-section refinement to 1e-6 in the
// variable. A metric flat to 1e-15 over the grid is flagged degenerate and
// reported at the grid start.
inline OptimizeResult optimize(Metric metric, const EngineParams& base, const SweepSpec& spec,
                               GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  base.validate();
  spec.validate();

  const auto eval = [&](double x) {
    const EngineParams p = with_variable(base, spec.var, x);
    const Occupations occ = occupations(p);
    const StateVector s = steady_state(build_generator(occ, p.g, p.r, p.p_c, p.p_h, variant));
    switch (metric) {
      case Metric::Flux: return flux(p.g, occ, s);
      case Metric::Power: return power(p.g, occ, p, s);
      case Metric::Ergotropy: return ergotropy_general(s, p);
    }
    return 0.0;
  };
  const auto ergotropy_at = [&](double x) {
    const EngineParams p = with_variable(base, spec.var, x);
    return ergotropy_general(steady_state(build_generator(p, variant)), p);
  };

  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  double lo_val = std::numeric_limits<double>::infinity();
  std::vector<double> grid_vals(static_cast<std::size_t>(spec.steps));
  for (int i = 0; i < spec.steps; ++i) {
    const double v = eval(spec.value_at(i));
    grid_vals[static_cast<std::size_t>(i)] = v;
    if (v > best_val) {
      best_val = v;
      best = i;
    }
    lo_val = std::min(lo_val, v);
  }

  if (best_val - lo_val < 1e-15) {
    OptimizeResult out;
    out.arg = spec.from;
    out.value = grid_vals.front();
    out.ergotropy_at_arg = ergotropy_at(spec.from);
    out.degenerate = true;
    return out;
  }

  double a = spec.value_at(std::max(0, best - 1));
  double b = spec.value_at(std::min(spec.steps - 1, best + 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > 1e-6) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }

  OptimizeResult out;
  out.arg = 0.5 * (a + b);
  out.value = eval(out.arg);
  out.ergotropy_at_arg = ergotropy_at(out.arg);
  out.degenerate = false;
  return out;
}

}  // namespace qhe
