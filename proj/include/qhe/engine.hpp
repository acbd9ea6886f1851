#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace qhe {

// Thrown when a solver or integrator cannot produce a usable result.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mean occupation of a bosonic mode at energy E and temperature T.
// Natural units, k_B = hbar = 1. Uses expm1 so small E/T stays accurate;
// E/T large enough to overflow exp() correctly yields 0.
inline double bose_einstein(double energy, double temperature) {
  if (!(energy > 0.0))
    throw std::domain_error("bose_einstein: energy must be positive, got " +
                            std::to_string(energy));
  if (!(temperature > 0.0))
    throw std::domain_error("bose_einstein: temperature must be positive, got " +
                            std::to_string(temperature));
  return 1.0 / std::expm1(energy / temperature);
}

// Coherence strength p = sqrt(|cos phi|) for dipole angle phi.
// Perpendicular dipoles (phi = pi/2) give 0, parallel (phi = 0) give 1.
inline double coherence_param_from_angle(double phi) {
  return std::sqrt(std::abs(std::cos(phi)));
}

// Physical inputs of the four-level engine. Level energies satisfy
// eps1 = eps2 < eps_b < eps_a; the hot bath drives the 1,2 <-> a transition,
// the cold bath the 1,2 <-> b transition, and a single cavity mode sits on
// the a <-> b work transition. The cavity is given either as an occupation
// n_ell directly or as a temperature T_ell; with neither set it is empty.
struct EngineParams {
  double eps1 = 0.1;
  double eps2 = 0.1;
  double eps_b = 0.4;
  double eps_a = 1.5;
  double g = 1.0;  // cavity coupling strength
  double r = 1.0;  // bath coupling strength
  double T_c = 0.5;
  double T_h = 2.0;
  std::optional<double> n_ell;
  std::optional<double> T_ell;
  double p_c = 0.0;  // cold coherence parameter, in [0, 1]
  double p_h = 0.0;  // hot coherence parameter, in [0, 1]

  double hot_transition_energy() const { return eps_a - eps1; }
  double cold_transition_energy() const { return eps_b - eps1; }

  double cavity_occupation() const {
    if (n_ell) return *n_ell;
    if (T_ell) return bose_einstein(eps_a - eps_b, *T_ell);
    return 0.0;
  }

  void validate() const {
    if (eps1 != eps2)
      throw std::invalid_argument("EngineParams: ground doublet must be degenerate (eps1 == eps2)");
    if (!(eps1 < eps_b && eps_b < eps_a))
      throw std::invalid_argument("EngineParams: level ordering eps1 < eps_b < eps_a violated");
    if (!(T_c > 0.0) || !(T_h > 0.0))
      throw std::invalid_argument("EngineParams: bath temperatures must be positive");
    if (!(g > 0.0) || !(r > 0.0))
      throw std::invalid_argument("EngineParams: couplings g and r must be positive");
    if (n_ell && T_ell)
      throw std::invalid_argument("EngineParams: give either n_ell or T_ell, not both");
    if (n_ell && !(*n_ell >= 0.0))
      throw std::invalid_argument("EngineParams: n_ell must be >= 0");
    if (T_ell && !(*T_ell > 0.0))
      throw std::invalid_argument("EngineParams: T_ell must be positive");
    if (!(p_c >= 0.0 && p_c <= 1.0) || !(p_h >= 0.0 && p_h <= 1.0))
      throw std::invalid_argument("EngineParams: coherence parameters must lie in [0, 1]");
  }
};

// Bose-Einstein factors of the three modes plus the derived sums
// n = n_c + n_h and y = n_c p_c + n_h p_h that enter the generator.
struct Occupations {
  double n_h = 0.0;
  double n_c = 0.0;
  double n_ell = 0.0;
  double n_tilde_h = 1.0;
  double n_tilde_c = 1.0;
  double n_tilde_ell = 1.0;
  double n = 0.0;
  double y = 0.0;
};

// Occupation-injection route: rates set directly, bypassing temperatures.
inline Occupations make_occupations(double n_c, double n_h, double n_ell,
                                    double p_c, double p_h) {
  if (!(n_c >= 0.0) || !(n_h >= 0.0) || !(n_ell >= 0.0))
    throw std::domain_error("make_occupations: occupations must be >= 0");
  Occupations o;
  o.n_h = n_h;
  o.n_c = n_c;
  o.n_ell = n_ell;
  o.n_tilde_h = 1.0 + n_h;
  o.n_tilde_c = 1.0 + n_c;
  o.n_tilde_ell = 1.0 + n_ell;
  o.n = n_c + n_h;
  o.y = n_c * p_c + n_h * p_h;
  return o;
}

inline Occupations occupations(const EngineParams& p) {
  p.validate();
  const double n_h = bose_einstein(p.hot_transition_energy(), p.T_h);
  const double n_c = bose_einstein(p.cold_transition_energy(), p.T_c);
  return make_occupations(n_c, n_h, p.cavity_occupation(), p.p_c, p.p_h);
}

// Verbatim builds the generator entry-by-entry as published; its population
// columns 1 and 2 sum to +r, so the total population is not conserved.
// TraceConserving replaces the rho_bb gains from the ground doublet by
// r*n_c (cold absorption), which restores column-sum zero and is the default
// everywhere a steady state is needed.
enum class GeneratorVariant { TraceConserving, Verbatim };

inline const char* to_string(GeneratorVariant v) {
  return v == GeneratorVariant::TraceConserving ? "trace_conserving" : "verbatim";
}

inline GeneratorVariant variant_from_string(const std::string& s) {
  if (s == "trace_conserving") return GeneratorVariant::TraceConserving;
  if (s == "verbatim") return GeneratorVariant::Verbatim;
  throw std::invalid_argument("unknown generator variant: " + s);
}

// Generator of the master equation d|rho>/dt = L |rho> in the basis
// (rho11, rho22, rhoaa, rhobb, rho12).
struct Generator {
  std::array<std::array<double, 5>, 5> m{};
  GeneratorVariant variant = GeneratorVariant::TraceConserving;

  std::array<double, 5> apply(const std::array<double, 5>& v) const {
    std::array<double, 5> out{};
    for (int i = 0; i < 5; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 5; ++j) acc += m[i][j] * v[j];
      out[i] = acc;
    }
    return out;
  }

  double inf_norm() const {
    double best = 0.0;
    for (const auto& row : m) {
      double s = 0.0;
      for (double x : row) s += std::abs(x);
      if (s > best) best = s;
    }
    return best;
  }
};

inline Generator build_generator(const Occupations& o, double g, double r,
                                 double p_c, double p_h, GeneratorVariant variant) {
  const double g2 = g * g;
  // Cold gain into rho_bb from the ground doublet: the published entry is
  // r*n_tilde_c; absorption from the cold bath carries r*n_c.
  const double cold_gain = (variant == GeneratorVariant::Verbatim) ? r * o.n_tilde_c : r * o.n_c;
  Generator gen;
  gen.variant = variant;
  gen.m = {{
      {-r * o.n, 0.0, r * o.n_tilde_h, r * o.n_tilde_c, -r * o.y},
      {0.0, -r * o.n, r * o.n_tilde_h, r * o.n_tilde_c, -r * o.y},
      {r * o.n_h, r * o.n_h, -(g2 * o.n_tilde_ell + 2.0 * r * o.n_tilde_h), g2 * o.n_ell,
       2.0 * r * p_h * o.n_h},
      {cold_gain, cold_gain, g2 * o.n_tilde_ell, -(g2 * o.n_ell + 2.0 * r * o.n_tilde_c),
       2.0 * r * p_c * o.n_c},
      {-r * o.y / 2.0, -r * o.y / 2.0, r * p_h * o.n_tilde_h, r * p_c * o.n_tilde_c, -r * o.n},
  }};
  return gen;
}

inline Generator build_generator(const EngineParams& p,
                                 GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  return build_generator(occupations(p), p.g, p.r, p.p_c, p.p_h, variant);
}

// Column sums over the four population rows; all zero iff the generator
// conserves total population.
inline std::array<double, 5> population_column_sums(const Generator& gen) {
  std::array<double, 5> sums{};
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 4; ++i) sums[j] += gen.m[i][j];
  return sums;
}

}  // namespace qhe
