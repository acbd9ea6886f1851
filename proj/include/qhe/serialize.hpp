#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

#include "qhe/analysis.hpp"
#include "qhe/dynamics.hpp"
#include "qhe/engine.hpp"
#include "qhe/ergotropy.hpp"

namespace qhe {

using json = nlohmann::json;

// 17 significant digits, locale-independent, enough to round-trip a double.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Empty field for unavailable values (failed rows, absent ratio).
inline std::string csv_field(double x) { return std::isnan(x) ? std::string{} : fmt17(x); }

// ---- EngineParams <-> flat JSON ----

inline json params_to_json(const EngineParams& p, GeneratorVariant variant) {
  json j{
      {"eps1", p.eps1}, {"eps2", p.eps2}, {"eps_b", p.eps_b}, {"eps_a", p.eps_a},
      {"g", p.g},       {"r", p.r},       {"T_c", p.T_c},     {"T_h", p.T_h},
      {"p_c", p.p_c},   {"p_h", p.p_h},   {"generator_variant", to_string(variant)},
  };
  if (p.T_ell)
    j["T_ell"] = *p.T_ell;
  else
    j["n_ell"] = p.cavity_occupation();
  return j;
}

// Strict parse: every key must be known, either n_ell or T_ell may appear.
inline std::pair<EngineParams, GeneratorVariant> params_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("params: expected a JSON object");
  EngineParams p;
  GeneratorVariant variant = GeneratorVariant::TraceConserving;
  for (const auto& [key, value] : j.items()) {
    if (key == "eps1") p.eps1 = value.get<double>();
    else if (key == "eps2") p.eps2 = value.get<double>();
    else if (key == "eps_b") p.eps_b = value.get<double>();
    else if (key == "eps_a") p.eps_a = value.get<double>();
    else if (key == "g") p.g = value.get<double>();
    else if (key == "r") p.r = value.get<double>();
    else if (key == "T_c") p.T_c = value.get<double>();
    else if (key == "T_h") p.T_h = value.get<double>();
    else if (key == "n_ell") p.n_ell = value.get<double>();
    else if (key == "T_ell") p.T_ell = value.get<double>();
    else if (key == "p_c") p.p_c = value.get<double>();
    else if (key == "p_h") p.p_h = value.get<double>();
    else if (key == "generator_variant") variant = variant_from_string(value.get<std::string>());
    else throw std::invalid_argument("params: unknown key \"" + key + "\"");
  }
  p.validate();
  return {p, variant};
}

// ---- ergotropy report JSON ----

inline json signature_to_json(const Signature& sig) {
  json arr = json::array();
  for (Level l : sig) arr.push_back(label(l));
  return arr;
}

inline json report_to_json(const ErgotropyReport& rep) {
  json j{
      {"ergotropy", rep.ergotropy},
      {"e0", rep.e0},
      {"ratio", rep.ratio ? json(*rep.ratio) : json(nullptr)},
      {"signature", signature_to_json(rep.signature)},
      {"closed_form", rep.closed_form ? json(*rep.closed_form) : json(nullptr)},
      {"closed_form_gap", rep.closed_form_gap ? json(*rep.closed_form_gap) : json(nullptr)},
  };
  return j;
}

inline json state_to_json(const StateVector& s) {
  return json{{"rho11", s.rho11},
              {"rho22", s.rho22},
              {"rhoaa", s.rhoaa},
              {"rhobb", s.rhobb},
              {"rho12", s.rho12}};
}

inline StateVector state_from_json(const json& j) {
  if (j.is_array()) {
    if (j.size() != 5) throw std::invalid_argument("state: expected 5 components");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(),
            j[4].get<double>()};
  }
  StateVector s;
  for (const auto& [key, value] : j.items()) {
    if (key == "rho11") s.rho11 = value.get<double>();
    else if (key == "rho22") s.rho22 = value.get<double>();
    else if (key == "rhoaa") s.rhoaa = value.get<double>();
    else if (key == "rhobb") s.rhobb = value.get<double>();
    else if (key == "rho12") s.rho12 = value.get<double>();
    else throw std::invalid_argument("state: unknown key \"" + key + "\"");
  }
  return s;
}

// ---- CSV writers ----

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,rho11,rho22,rhoaa,rhobb,rho12,p_plus,p_minus,trace\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const StateVector& s = traj.states[i];
    const ActiveSpectrum a = active_spectrum(s);
    os << fmt17(traj.times[i]) << ',' << fmt17(s.rho11) << ',' << fmt17(s.rho22) << ','
       << fmt17(s.rhoaa) << ',' << fmt17(s.rhobb) << ',' << fmt17(s.rho12) << ','
       << fmt17(a.rho_plus) << ',' << fmt17(a.rho_minus) << ',' << fmt17(s.trace()) << '\n';
  }
}

// Signature fields contain commas, so they are emitted double-quoted.
inline void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "var_name,var_value,p_c,p_h,rho11,rhoaa,rhobb,rho12,rho_plus,rho_minus,"
        "signature,ergotropy,e0,ratio,flux,work,power\n";
  const char* var_name = to_string(result.spec.var);
  for (const SweepRow& row : result.rows) {
    os << var_name << ',' << fmt17(row.var_value) << ',' << fmt17(row.p_c) << ','
       << fmt17(row.p_h) << ',';
    if (row.ok) {
      os << fmt17(row.state.rho11) << ',' << fmt17(row.state.rhoaa) << ','
         << fmt17(row.state.rhobb) << ',' << fmt17(row.state.rho12) << ','
         << fmt17(row.rho_plus) << ',' << fmt17(row.rho_minus) << ",\""
         << signature_compact(row.signature) << "\"," << fmt17(row.ergotropy) << ','
         << fmt17(row.e0) << ',' << (row.ratio ? fmt17(*row.ratio) : std::string{}) << ','
         << fmt17(row.flux_j) << ',' << fmt17(row.work_w) << ',' << fmt17(row.power_p) << '\n';
    } else {
      os << ",,,,,,,,,,,,\n";
    }
  }
}

inline json crossovers_to_json(const CrossoverSet& set) {
  json arr = json::array();
  for (const Crossover& c : set.boundaries) {
    arr.push_back(json{{"value", c.value},
                       {"before", signature_to_json(c.before)},
                       {"after", signature_to_json(c.after)}});
  }
  return json{{"boundaries", arr}};
}

}  // namespace qhe
