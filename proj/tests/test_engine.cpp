#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "qhe/engine.hpp"

using namespace qhe;

TEST_CASE("bose_einstein matches high-precision references") {
  // 1/(e^0.7 - 1) and 1/(e^0.6 - 1), frozen from a 40-digit evaluation.
  CHECK(bose_einstein(1.4, 2.0) == Approx(0.9864338636344634).epsilon(1e-15));
  CHECK(bose_einstein(0.3, 0.5) == Approx(1.216369215160871).epsilon(1e-15));
}

TEST_CASE("bose_einstein limits and monotonicity") {
  CHECK(bose_einstein(1.0, 1e-3) < 1e-12);
  CHECK(bose_einstein(1.0, 1e-6) == 0.0);  // Boltzmann suppression
  double prev = 0.0;
  for (double t = 0.5; t <= 8.0; t += 0.5) {
    const double cur = bose_einstein(1.0, t);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("bose_einstein rejects non-positive arguments") {
  CHECK_THROWS_AS(bose_einstein(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bose_einstein(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bose_einstein(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(bose_einstein(1.0, -0.5), std::domain_error);
}

TEST_CASE("coherence parameter from dipole angle") {
  CHECK(coherence_param_from_angle(0.0) == 1.0);
  CHECK(coherence_param_from_angle(M_PI / 2.0) < 1e-8);
  CHECK(coherence_param_from_angle(M_PI / 3.0) == Approx(0.7071067811865476).epsilon(1e-15));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double p = coherence_param_from_angle(u(rng));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("occupations at the reference parameter point") {
  EngineParams p;  // defaults are the reference point
  const Occupations o = occupations(p);
  CHECK(o.n_h == Approx(0.9864).margin(1e-4));
  CHECK(o.n_c == Approx(1.2164).margin(1e-4));
  CHECK(o.n_h == bose_einstein(p.hot_transition_energy(), p.T_h));
  CHECK(o.n_c == bose_einstein(p.cold_transition_energy(), p.T_c));
  CHECK(o.n_ell == 0.0);
  CHECK(o.n_tilde_h - o.n_h == Approx(1.0).epsilon(1e-15));
  CHECK(o.n_tilde_c - o.n_c == Approx(1.0).epsilon(1e-15));
  CHECK(o.n_tilde_ell - o.n_ell == 1.0);
  CHECK(o.n == o.n_c + o.n_h);
}

TEST_CASE("y reduces correctly at the coherence extremes") {
  EngineParams p;
  p.p_c = p.p_h = 0.0;
  CHECK(occupations(p).y == 0.0);
  p.p_c = p.p_h = 1.0;
  const Occupations o = occupations(p);
  CHECK(o.y == Approx(o.n).epsilon(1e-15));
  CHECK(o.y <= o.n);
}

TEST_CASE("cavity occupation from temperature") {
  EngineParams p;
  p.T_ell = 1.0;
  CHECK(occupations(p).n_ell == bose_einstein(1.1, 1.0));
}

TEST_CASE("parameter validation") {
  EngineParams p;
  SECTION("degeneracy required") {
    p.eps2 = 0.2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("level ordering") {
    p.eps_b = 2.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("positive temperatures and couplings") {
    p.T_c = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = EngineParams{};
    p.g = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("coherence parameters in [0, 1]") {
    p.p_h = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.p_h = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("cavity: one of n_ell, T_ell") {
    p.n_ell = 0.5;
    p.T_ell = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("negative cavity occupation") {
    p.n_ell = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("degenerate transition energy") {
    p.eps1 = p.eps2 = 0.4;  // equals eps_b
    CHECK_THROWS_AS(occupations(p), std::logic_error);
  }
}

TEST_CASE("make_occupations rejects negative occupations") {
  CHECK_THROWS_AS(make_occupations(-1.0, 1.0, 0.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("verbatim generator entries as published") {
  EngineParams p;
  p.p_c = 0.1;
  p.p_h = 0.5;
  const Occupations o = occupations(p);
  const Generator gen = build_generator(p, GeneratorVariant::Verbatim);
  const double r = p.r, g2 = p.g * p.g;

  // row 1
  CHECK(gen.m[0][0] == -r * o.n);
  CHECK(gen.m[0][1] == 0.0);
  CHECK(gen.m[0][2] == r * o.n_tilde_h);
  CHECK(gen.m[0][3] == r * o.n_tilde_c);
  CHECK(gen.m[0][4] == -r * o.y);
  // row 3
  CHECK(gen.m[2][0] == r * o.n_h);
  CHECK(gen.m[2][2] == -(g2 * o.n_tilde_ell + 2.0 * r * o.n_tilde_h));
  CHECK(gen.m[2][3] == g2 * o.n_ell);
  CHECK(gen.m[2][4] == 2.0 * r * p.p_h * o.n_h);
  // row 4: the published cold gains
  CHECK(gen.m[3][0] == r * o.n_tilde_c);
  CHECK(gen.m[3][1] == r * o.n_tilde_c);
  CHECK(gen.m[3][4] == 2.0 * r * p.p_c * o.n_c);
  // row 5
  CHECK(gen.m[4][0] == -r * o.y / 2.0);
  CHECK(gen.m[4][1] == -r * o.y / 2.0);
  CHECK(gen.m[4][2] == r * p.p_h * o.n_tilde_h);
  CHECK(gen.m[4][3] == r * p.p_c * o.n_tilde_c);
  CHECK(gen.m[4][4] == -r * o.n);
}

TEST_CASE("trace-conserving variant differs only in the cold gains") {
  EngineParams p;
  p.p_c = 0.3;
  p.p_h = 0.7;
  const Occupations o = occupations(p);
  const Generator tc = build_generator(p, GeneratorVariant::TraceConserving);
  const Generator vb = build_generator(p, GeneratorVariant::Verbatim);
  CHECK(tc.m[3][0] == p.r * o.n_c);
  CHECK(tc.m[3][1] == p.r * o.n_c);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      if (i == 3 && j <= 1) continue;
      CHECK(tc.m[i][j] == vb.m[i][j]);
    }
}

TEST_CASE("population column sums: conservation and the published defect") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 25; ++k) {
    EngineParams p;
    p.T_h = 0.5 + 5.0 * u01(rng);
    p.T_c = 0.2 + 2.0 * u01(rng);
    p.r = 0.5 + 2.0 * u01(rng);
    p.g = 0.5 + 2.0 * u01(rng);
    p.n_ell = 2.0 * u01(rng);
    p.p_c = u01(rng);
    p.p_h = u01(rng);

    const auto tc_sums = population_column_sums(build_generator(p, GeneratorVariant::TraceConserving));
    for (double s : tc_sums) CHECK(std::abs(s) <= 1e-14);

    const auto vb_sums = population_column_sums(build_generator(p, GeneratorVariant::Verbatim));
    CHECK(vb_sums[0] == Approx(p.r).margin(1e-14));
    CHECK(vb_sums[1] == Approx(p.r).margin(1e-14));
    for (int j = 2; j < 5; ++j) CHECK(std::abs(vb_sums[j]) <= 1e-14);
  }
}

TEST_CASE("coherence column is trace-neutral in both variants") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 25; ++k) {
    EngineParams p;
    p.p_c = u01(rng);
    p.p_h = u01(rng);
    p.T_h = 0.5 + 5.0 * u01(rng);
    for (auto variant : {GeneratorVariant::TraceConserving, GeneratorVariant::Verbatim}) {
      const auto sums = population_column_sums(build_generator(p, variant));
      CHECK(std::abs(sums[4]) <= 1e-14);
    }
  }
}

TEST_CASE("zero coherence decouples rho12 completely") {
  EngineParams p;
  p.p_c = p.p_h = 0.0;
  const Generator gen = build_generator(p);
  const Occupations o = occupations(p);
  for (int i = 0; i < 4; ++i) CHECK(gen.m[i][4] == 0.0);
  for (int j = 0; j < 4; ++j) CHECK(gen.m[4][j] == 0.0);
  CHECK(gen.m[4][4] == -p.r * o.n);
}

TEST_CASE("build_generator is pure") {
  EngineParams p;
  p.p_c = 0.25;
  p.p_h = 0.75;
  const Generator a = build_generator(p);
  const Generator b = build_generator(p);
  CHECK(a.m == b.m);
}
