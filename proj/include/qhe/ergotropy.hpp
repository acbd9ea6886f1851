#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "qhe/dynamics.hpp"
#include "qhe/engine.hpp"

namespace qhe {

// Eigenvalue labels of the 4x4 active matrix: the two quasiprobabilities of
// the coherent ground doublet and the two upper populations.
enum class Level { Plus, Minus, Aa, Bb };

using Signature = std::array<Level, 4>;

inline const char* label(Level l) {
  switch (l) {
    case Level::Plus: return "plus";
    case Level::Minus: return "minus";
    case Level::Aa: return "aa";
    case Level::Bb: return "bb";
  }
  return "?";
}

inline const char* label_compact(Level l) {
  switch (l) {
    case Level::Plus: return "+";
    case Level::Minus: return "-";
    case Level::Aa: return "aa";
    case Level::Bb: return "bb";
  }
  return "?";
}

inline Level level_from_label(const std::string& s) {
  if (s == "plus" || s == "+") return Level::Plus;
  if (s == "minus" || s == "-") return Level::Minus;
  if (s == "aa") return Level::Aa;
  if (s == "bb") return Level::Bb;
  throw std::invalid_argument("unknown level label: " + s);
}

// Compact form used in CSV output, e.g. "+,-,bb,aa".
inline std::string signature_compact(const Signature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ',';
    out += label_compact(sig[i]);
  }
  return out;
}

// Eigenvalues of the symmetric 2x2 ground block exactly as defined:
// rho_pm = rho11 +- rho12. The second value is negative whenever the
// coherence exceeds the population.
inline std::pair<double, double> quasiprobabilities(const StateVector& s) {
  return {s.rho11 + s.rho12, s.rho11 - s.rho12};
}

// Eigenvalue set of the active matrix with the coherence sign folded so
// that rho_plus >= rho_minus regardless of the transient sign of rho12.
// rho_minus is computed from the block trace, which keeps
// rho_plus + rho_minus == 2 rho11 exact.
struct ActiveSpectrum {
  double rho_plus = 0.0;
  double rho_minus = 0.0;
  double rhoaa = 0.0;
  double rhobb = 0.0;
  StateVector source;
};

inline ActiveSpectrum active_spectrum(const StateVector& s) {
  ActiveSpectrum a;
  a.rho_plus = s.rho11 + std::abs(s.rho12);
  a.rho_minus = 2.0 * s.rho11 - a.rho_plus;
  a.rhoaa = s.rhoaa;
  a.rhobb = s.rhobb;
  a.source = s;
  return a;
}

// Passive counterpart of the active matrix: eigenvalues sorted descending
// against the ascending level energies. Ties keep the fixed label
// precedence plus > minus > bb > aa; equal values make the tie order
// ergotropy-neutral.
struct PassiveState {
  std::array<double, 4> values{};
  Signature signature{};
  std::array<double, 4> energies{};
};

inline PassiveState passive_state(const StateVector& s, const EngineParams& p) {
  const ActiveSpectrum a = active_spectrum(s);
  std::array<std::pair<Level, double>, 4> items = {{
      {Level::Plus, a.rho_plus},
      {Level::Minus, a.rho_minus},
      {Level::Bb, a.rhobb},
      {Level::Aa, a.rhoaa},
  }};
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& lhs, const auto& rhs) { return lhs.second > rhs.second; });
  PassiveState out;
  for (int i = 0; i < 4; ++i) {
    out.signature[i] = items[i].first;
    out.values[i] = items[i].second;
  }
  out.energies = {p.eps1, p.eps2, p.eps_b, p.eps_a};
  return out;
}

// tr(H_o rho) with H_o = diag(eps1, eps2, eps_b, eps_a) and rho11 = rho22.
inline double active_energy(const StateVector& s, const EngineParams& p) {
  return (p.eps1 + p.eps2) * s.rho11 + p.eps_b * s.rhobb + p.eps_a * s.rhoaa;
}

inline double passive_energy(const PassiveState& ps) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += ps.energies[i] * ps.values[i];
  return acc;
}

// Maximum unitarily extractable work: active energy minus the energy of the
// descending-sorted spectrum paired with ascending energies. Nonnegative by
// the rearrangement inequality; exactly zero when the descending order is
// (plus, minus, bb, aa) and the doublet is degenerate.
inline double ergotropy_general(const StateVector& s, const EngineParams& p) {
  return active_energy(s, p) - passive_energy(passive_state(s, p));
}

// Analytic case expressions published for five specific passive orderings,
// evaluated verbatim (with the raw rho12). Several of them differ from the
// general rearrangement pairing by terms proportional to
// (eps_a - eps_b)(rhoaa - rhobb); the general definition is authoritative
// and the difference is surfaced as a gap, not absorbed.
inline std::optional<double> ergotropy_closed_form(const Signature& sig, const StateVector& s,
                                                   const EngineParams& p) {
  const double rho_minus = s.rho11 - s.rho12;
  const Signature pm_bb_aa = {Level::Plus, Level::Minus, Level::Bb, Level::Aa};
  const Signature p_bb_m_aa = {Level::Plus, Level::Bb, Level::Minus, Level::Aa};
  const Signature pm_aa_bb = {Level::Plus, Level::Minus, Level::Aa, Level::Bb};
  const Signature p_aa_m_bb = {Level::Plus, Level::Aa, Level::Minus, Level::Bb};
  const Signature p_aa_bb_m = {Level::Plus, Level::Aa, Level::Bb, Level::Minus};
  const Signature p_bb_aa_m = {Level::Plus, Level::Bb, Level::Aa, Level::Minus};

  if (sig == pm_bb_aa) return std::nullopt;  // passive already, no case expression needed
  if (sig == p_bb_m_aa)
    return p.eps_a * (s.rhobb - s.rhoaa) + p.eps1 * (s.rho11 - s.rhobb - s.rho12) +
           p.eps_b * (s.rhoaa + s.rho12 - s.rho11);
  if (sig == pm_aa_bb) return p.eps1 * (s.rhoaa - s.rhobb);
  if (sig == p_aa_m_bb) return (p.eps1 - p.eps_b) * (s.rho11 - s.rhoaa - s.rho12);
  if (sig == p_aa_bb_m)
    return p.eps_b * (s.rhoaa - s.rhobb) + p.eps1 * (s.rho11 - s.rhoaa - s.rho12) +
           p.eps_a * (s.rhoaa + s.rho12 - s.rho11);
  if (sig == p_bb_aa_m) return (p.eps_a - p.eps1) * (s.rhobb - rho_minus);
  return std::nullopt;
}

// Ergotropy of the coherence-free engine (p_c = p_h = 0) at the same
// physical parameters; the classical reference for the ratio E/E0.
inline double incoherent_ergotropy(const EngineParams& params,
                                   GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  EngineParams base = params;
  base.p_c = 0.0;
  base.p_h = 0.0;
  const StateVector s = steady_state(build_generator(base, variant));
  return ergotropy_general(s, base);
}

struct ErgotropyReport {
  double ergotropy = 0.0;
  double e0 = 0.0;
  std::optional<double> ratio;  // absent when e0 is numerically zero
  Signature signature{};
  std::optional<double> closed_form;
  std::optional<double> closed_form_gap;  // |general - closed form|
};

// Assembles the report for an already-solved steady state; e0 may be passed
// in when the caller has it cached (sweeps reuse one incoherent solve).
inline ErgotropyReport make_ergotropy_report(const StateVector& state, const EngineParams& params,
                                             double e0) {
  ErgotropyReport rep;
  rep.signature = passive_state(state, params).signature;
  rep.ergotropy = ergotropy_general(state, params);
  rep.e0 = e0;
  if (e0 > 1e-15) rep.ratio = rep.ergotropy / e0;
  rep.closed_form = ergotropy_closed_form(rep.signature, state, params);
  if (rep.closed_form) rep.closed_form_gap = std::abs(rep.ergotropy - *rep.closed_form);
  return rep;
}

inline ErgotropyReport ergotropy_report(const EngineParams& params,
                                        GeneratorVariant variant = GeneratorVariant::TraceConserving) {
  const StateVector state = steady_state(build_generator(params, variant));
  return make_ergotropy_report(state, params, incoherent_ergotropy(params, variant));
}

}  // namespace qhe
