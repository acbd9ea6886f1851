#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qhe/engine.hpp"

namespace qhe {

// Reduced density matrix content: four populations and the real part of the
// noise-induced coherence between the degenerate ground levels.
struct StateVector {
  double rho11 = 0.0;
  double rho22 = 0.0;
  double rhoaa = 0.0;
  double rhobb = 0.0;
  double rho12 = 0.0;

  double trace() const { return rho11 + rho22 + rhoaa + rhobb; }

  std::array<double, 5> data() const { return {rho11, rho22, rhoaa, rhobb, rho12}; }

  static StateVector from(const std::array<double, 5>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

namespace detail {

using Mat5 = std::array<std::array<double, 5>, 5>;
using Vec5 = std::array<double, 5>;

inline double inf_norm(const Vec5& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

inline double inf_norm(const Mat5& a) {
  double best = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double x : row) s += std::abs(x);
    best = std::max(best, s);
  }
  return best;
}

inline Vec5 matvec(const Mat5& a, const Vec5& v) {
  Vec5 out{};
  for (int i = 0; i < 5; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 5; ++j) acc += a[i][j] * v[j];
    out[i] = acc;
  }
  return out;
}

// LU factorization with partial pivoting. Returns false on an exactly
// singular pivot.
struct Lu5 {
  Mat5 lu{};
  std::array<int, 5> perm{};
  bool ok = false;
};

inline Lu5 factorize(const Mat5& a) {
  Lu5 f;
  f.lu = a;
  for (int i = 0; i < 5; ++i) f.perm[i] = i;
  for (int col = 0; col < 5; ++col) {
    int pivot = col;
    double best = std::abs(f.lu[col][col]);
    for (int row = col + 1; row < 5; ++row) {
      const double cand = std::abs(f.lu[row][col]);
      if (cand > best) {
        best = cand;
        pivot = row;
      }
    }
    if (best == 0.0) return f;
    if (pivot != col) {
      std::swap(f.lu[pivot], f.lu[col]);
      std::swap(f.perm[pivot], f.perm[col]);
    }
    for (int row = col + 1; row < 5; ++row) {
      const double factor = f.lu[row][col] / f.lu[col][col];
      f.lu[row][col] = factor;
      for (int j = col + 1; j < 5; ++j) f.lu[row][j] -= factor * f.lu[col][j];
    }
  }
  f.ok = true;
  return f;
}

inline Vec5 lu_solve(const Lu5& f, const Vec5& b) {
  Vec5 x{};
  for (int i = 0; i < 5; ++i) x[i] = b[f.perm[i]];
  for (int i = 1; i < 5; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu[i][j] * x[j];
  for (int i = 4; i >= 0; --i) {
    for (int j = i + 1; j < 5; ++j) x[i] -= f.lu[i][j] * x[j];
    x[i] /= f.lu[i][i];
  }
  return x;
}

// Infinity-norm condition estimate via the explicit inverse; cheap at 5x5.
inline double condition_estimate(const Mat5& a, const Lu5& f) {
  double inv_norm = 0.0;
  std::array<Vec5, 5> inv_cols{};
  for (int j = 0; j < 5; ++j) {
    Vec5 e{};
    e[j] = 1.0;
    inv_cols[j] = lu_solve(f, e);
  }
  for (int i = 0; i < 5; ++i) {
    double s = 0.0;
    for (int j = 0; j < 5; ++j) s += std::abs(inv_cols[j][i]);
    inv_norm = std::max(inv_norm, s);
  }
  return inf_norm(a) * inv_norm;
}

}  // namespace detail

// || L state ||_inf, zero exactly at a stationary state.
inline double residual(const Generator& gen, const StateVector& state) {
  return detail::inf_norm(gen.apply(state.data()));
}

// Stationary state of d|rho>/dt = L|rho>: the population row `replace_row`
// (0..3) of L is swapped for the trace constraint (1,1,1,1,0) = 1 and the
// resulting 5x5 system solved directly with one step of iterative
// refinement. The result does not depend on the replaced row as long as the
// kernel of L is one-dimensional.
inline StateVector steady_state(const Generator& gen, int replace_row = 0) {
  if (replace_row < 0 || replace_row > 3)
    throw std::invalid_argument("steady_state: replace_row must name a population row (0..3)");

  detail::Mat5 a = gen.m;
  a[replace_row] = {1.0, 1.0, 1.0, 1.0, 0.0};
  detail::Vec5 b{};
  b[replace_row] = 1.0;

  const auto f = detail::factorize(a);
  if (!f.ok) throw numeric_error("steady_state: replaced system is singular");
  const double cond = detail::condition_estimate(a, f);
  if (!(cond < 1e12))
    throw numeric_error("steady_state: no unique steady state (condition estimate " +
                        std::to_string(cond) + ")");

  detail::Vec5 x = detail::lu_solve(f, b);
  // One refinement pass knocks the residual down to rounding level.
  {
    detail::Vec5 res = detail::matvec(a, x);
    for (int i = 0; i < 5; ++i) res[i] = b[i] - res[i];
    const detail::Vec5 corr = detail::lu_solve(f, res);
    for (int i = 0; i < 5; ++i) x[i] += corr[i];
  }

  const StateVector state = StateVector::from(x);
  // A solution of the replaced system is only a steady state if the full
  // generator annihilates it; the Verbatim variant has no such state.
  const double rel = residual(gen, state) / std::max(1.0, gen.inf_norm());
  if (!(rel <= 1e-12))
    throw numeric_error("steady_state: generator has no steady state (relative residual " +
                        std::to_string(rel) + ")");
  return state;
}

// Fixed-step classical Runge-Kutta integration of the linear master
// equation. Records the initial state, then every `stride`-th step, and
// always the final step. Throws if any component leaves [-10, 10].
inline Trajectory evolve(const Generator& gen, const StateVector& init, double t_max,
                         double dt, std::size_t stride = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (!(t_max >= dt)) throw std::invalid_argument("evolve: t_max must be at least dt");
  if (stride == 0) stride = 1;

  const auto n_steps = static_cast<std::size_t>(std::llround(std::ceil(t_max / dt - 1e-9)));

  Trajectory traj;
  traj.times.reserve(n_steps / stride + 2);
  traj.states.reserve(n_steps / stride + 2);
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  detail::Vec5 x = init.data();
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const detail::Vec5 k1 = gen.apply(x);
    detail::Vec5 tmp;
    for (int i = 0; i < 5; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    const detail::Vec5 k2 = gen.apply(tmp);
    for (int i = 0; i < 5; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    const detail::Vec5 k3 = gen.apply(tmp);
    for (int i = 0; i < 5; ++i) tmp[i] = x[i] + dt * k3[i];
    const detail::Vec5 k4 = gen.apply(tmp);
    for (int i = 0; i < 5; ++i)
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double t = static_cast<double>(step) * dt;
    for (double comp : x)
      if (!(std::abs(comp) <= 10.0))
        throw numeric_error("evolve: integration diverged at t = " + std::to_string(t));

    if (step % stride == 0 || step == n_steps) {
      traj.times.push_back(t);
      traj.states.push_back(StateVector::from(x));
    }
  }
  return traj;
}

}  // namespace qhe
