#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sparsevr/params.hpp"
#include "sparsevr/rng.hpp"

using namespace sparsevr;

TEST_CASE("serial schedule at kappa == m") {
  // theta = 1/2, eta = 1/L, phi = 1/(2L), S = ceil(2 omega).
  const double big_l = 0.5;
  const SolverParams p = derive_params_serial(1000, 2000.0, big_l, 3.0, 2000);
  CHECK(p.theta == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.eta == doctest::Approx(1.0 / big_l).epsilon(1e-14));
  CHECK(p.phi == doctest::Approx(0.5 / big_l).epsilon(1e-14));
  CHECK(p.S == 6);
}

TEST_CASE("serial schedule, ill-conditioned frozen values") {
  // n = 1e4, kappa = 1e6, omega = 50, m = 2n.
  const SolverParams p = derive_params_serial(10000, 1e6, 1.0, 50.0);
  CHECK(p.m == 20000);
  CHECK(p.theta == doctest::Approx(0.12389934309929541).epsilon(1e-12));
  CHECK(p.S == 708);
  // Consistency: phi == eta * theta == (1 - theta) / L.
  CHECK(p.phi == doctest::Approx(p.eta * p.theta).epsilon(1e-13));
  CHECK(p.phi == doctest::Approx((1.0 - p.theta) / p.L).epsilon(1e-13));
}

TEST_CASE("serial schedule limits and validation") {
  // kappa << m: theta -> 1, S still >= 1.
  const SolverParams p = derive_params_serial(1000, 1.0, 1.0, 1.5, 2000);
  CHECK(p.theta > 0.97);
  CHECK(p.S >= 1);
  CHECK_THROWS_AS(derive_params_serial(1000, 100.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(derive_params_serial(1000, 0.5, 1.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(derive_params_async(1000, 100.0, 1.0, 2.0, 1.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(derive_params_async(1000, 100.0, 1.0, 2.0, 0.5, -1.0),
                  std::invalid_argument);
}

TEST_CASE("async schedule reduces to serial at tau~ = 0") {
  const SolverParams a = derive_params_async(500, 1e5, 0.25, 50.0, 0.2, 0.0);
  const SolverParams s = derive_params_serial(500, 1e5, 0.25, 50.0);
  CHECK(a.theta == s.theta);
  CHECK(a.eta == s.eta);
  CHECK(a.phi == s.phi);
  CHECK(a.S == s.S);
}

TEST_CASE("async schedule with A = 4 at kappa == m") {
  // A = 1 + 2 sqrt(delta) tau~ = 4 with delta = 0.25, tau~ = 3:
  // theta = 1/3, eta = 1/(2L).
  const double big_l = 2.0;
  const SolverParams p =
      derive_params_async(1000, 2000.0, big_l, 2.0, 0.25, 3.0, 2000);
  CHECK(p.theta == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(p.eta == doctest::Approx(1.0 / (2.0 * big_l)).epsilon(1e-13));
  CHECK(p.phi == doctest::Approx((1.0 - p.theta) / big_l).epsilon(1e-13));
}

TEST_CASE("async schedule frozen values (delta = 0.42, tau~ = 10)") {
  const SolverParams p =
      derive_params_async(10000, 1e6, 1.0, 50.0, 0.42, 10.0);
  CHECK(p.theta == doctest::Approx(0.036468278598105683).epsilon(1e-12));
  CHECK(p.eta == doctest::Approx(1.8924275033231917).epsilon(1e-12));
  CHECK(p.S == 2643);
}

TEST_CASE("restart count helper") {
  CHECK(restarts_for_accuracy(1.0, 1e-6, 10.0) == 6);
  CHECK(restarts_for_accuracy(0.5, 1.0, 2.0) == 0);
  CHECK_THROWS_AS(restarts_for_accuracy(1.0, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("rng streams are deterministic and disjoint") {
  Rng a = derive_stream(1, 2, 3, 4);
  Rng b = derive_stream(1, 2, 3, 4);
  Rng c = derive_stream(1, 2, 3, 5);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  bool any_diff = false;
  Rng a2 = derive_stream(1, 2, 3, 4);
  for (int i = 0; i < 16; ++i) any_diff |= a2.next_u64() != c.next_u64();
  CHECK(any_diff);

  // Bounded draws stay in range and hit both halves.
  Rng r(99);
  std::int64_t low = 0, high = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto v = r.next_below(1000);
    CHECK(v < 1000);
    (v < 500 ? low : high)++;
  }
  CHECK(low > 1600);
  CHECK(high > 1600);
}
