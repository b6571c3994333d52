#include <catch2/catch_amalgamated.hpp>

#include "netpricing/marginal.hpp"
#include "testutil.hpp"

using namespace netpricing;
using testutil::random_marginal;
using testutil::riemann;

TEST_CASE("integrate: constant and identity closed forms") {
  MarginalFn c = MarginalFn::constant(2.5, 4.0);
  CHECK(integrate(c, 0.0, 4.0) == Catch::Approx(10.0).margin(1e-12));
  CHECK(integrate(c, 1.0, 3.0) == Catch::Approx(5.0).margin(1e-12));

  MarginalFn id = MarginalFn::linear(0.0, 1.0, 3.0);
  CHECK(integrate(id, 0.0, 3.0) == Catch::Approx(4.5).margin(1e-12));
  CHECK(integrate(id, 1.0, 2.0) == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("integrate: random 5-segment functions match Riemann oracle") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 20; ++trial) {
    MarginalFn f = random_marginal(rng);
    double a = 0.13 * (trial % 3), b = f.domain_hi() - 0.07 * (trial % 4);
    if (a >= b) continue;
    double expect = riemann([&](double x) { return f.value(x); }, a, b, 1e-5);
    CHECK(integrate(f, a, b) == Catch::Approx(expect).margin(1e-8));
  }
}

TEST_CASE("integrate: additive over adjacent intervals") {
  std::mt19937_64 rng(7);
  MarginalFn f = random_marginal(rng);
  double mid = 0.37 * f.domain_hi();
  CHECK(integrate(f, 0, mid) + integrate(f, mid, f.domain_hi()) ==
        Catch::Approx(integrate(f, 0, f.domain_hi())).margin(1e-12));
}

TEST_CASE("integrate: out-of-domain bounds rejected") {
  MarginalFn f = MarginalFn::constant(1.0, 1.0);
  CHECK_THROWS(integrate(f, 0.0, 1.5));
  CHECK_THROWS(integrate(f, -0.5, 1.0));
}

TEST_CASE("one-sided limits at a jump") {
  // jump at x=1 from 2 to 5
  MarginalFn f = MarginalFn::from_points({{0, 2}, {1, 2}, {1, 5}, {2, 5}});
  CHECK(f.left_limit(1.0) == 2.0);
  CHECK(f.right_limit(1.0) == 5.0);
  CHECK(f.value(1.0) == 5.0);  // right-limit convention
  CHECK(f.value(2.0) == 5.0);  // domain end returns the left limit

  SECTION("continuous point: left == right") {
    CHECK(f.left_limit(0.5) == f.right_limit(0.5));
  }
  SECTION("limits rejected outside their side") {
    CHECK_THROWS(f.left_limit(0.0));
    CHECK_THROWS(f.right_limit(2.0));
  }
}

TEST_CASE("reflect: closed forms") {
  MarginalFn c = MarginalFn::constant(1.5, 2.0);
  MarginalFn rc = c.reflect(2.0);
  CHECK(rc.value(0.3) == 1.5);

  MarginalFn id = MarginalFn::linear(0.0, 1.0, 2.0);
  MarginalFn rid = id.reflect(2.0);
  for (double x : {0.0, 0.5, 1.7}) CHECK(rid.value(x) == Catch::Approx(2.0 - x));
}

TEST_CASE("reflect: involution and integral preservation") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    MarginalFn f = random_marginal(rng);
    double R = f.domain_hi() * (trial % 2 ? 1.0 : 0.6);
    MarginalFn g = f.reflect(R).reflect(R);
    for (int k = 1; k < 20; ++k) {
      double x = R * k / 20.0;
      CHECK(g.value(x) == Catch::Approx(f.value(x)).margin(1e-12));
    }
    CHECK(integrate(f.reflect(R), 0, R) ==
          Catch::Approx(integrate(f, 0, R)).margin(1e-12));
  }
}

TEST_CASE("reflect swaps one-sided limits at jumps") {
  MarginalFn f = MarginalFn::from_points({{0, 2}, {1, 2}, {1, 5}, {2, 5}});
  MarginalFn r = f.reflect(2.0);
  CHECK(r.left_limit(1.0) == 5.0);
  CHECK(r.right_limit(1.0) == 2.0);
}

TEST_CASE("shifted: g(t) = f(t + c)") {
  MarginalFn f = MarginalFn::linear(1.0, 2.0, 3.0);
  MarginalFn g = f.shifted(1.0);
  CHECK(g.domain_hi() == Catch::Approx(2.0));
  CHECK(g.value(0.5) == Catch::Approx(f.value(1.5)));
}

TEST_CASE("operator+: breakpoints merge, jumps preserved") {
  MarginalFn f = MarginalFn::from_points({{0, 1}, {1, 1}, {1, 3}, {2, 3}});
  MarginalFn g = MarginalFn::linear(0.5, 1.0, 2.0);
  MarginalFn s = f + g;
  CHECK(s.left_limit(1.0) == Catch::Approx(1.0 + 1.5));
  CHECK(s.right_limit(1.0) == Catch::Approx(3.0 + 1.5));
  CHECK(s.value(1.5) == Catch::Approx(3.0 + 2.0));
}

TEST_CASE("monotonicity predicates") {
  CHECK(MarginalFn::linear(1, 1, 1).strictly_increasing());
  CHECK(MarginalFn::constant(1, 1).nondecreasing());
  CHECK_FALSE(MarginalFn::constant(1, 1).strictly_increasing());
  MarginalFn down = MarginalFn::from_points({{0, 3}, {1, 1}});
  CHECK(down.nonincreasing());
  CHECK_FALSE(down.nondecreasing());
}

TEST_CASE("sampled nonlinear marginals stay close to the source") {
  auto mm1 = [](double f) { return 2.0 / ((2.0 - f) * (2.0 - f)); };
  MarginalFn d = MarginalFn::sample(mm1, 1.9, 64);
  CHECK(d.strictly_increasing());
  for (double x : {0.0, 0.5, 1.0, 1.5, 1.89})
    CHECK(d.value(x) == Catch::Approx(mm1(x)).epsilon(0.05));
}

TEST_CASE("CostIntegral: exact piecewise-quadratic evaluation") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    MarginalFn f = random_marginal(rng);
    CostIntegral F(f);
    CHECK(F.value(0.0) == 0.0);
    for (int k = 0; k <= 10; ++k) {
      double t = f.domain_hi() * k / 10.0;
      CHECK(F.value(t) == Catch::Approx(integrate(f, 0, t)).margin(1e-12));
    }
    double a = 0.2 * f.domain_hi(), b = 0.9 * f.domain_hi();
    CHECK(F.integrate(a, b) == Catch::Approx(integrate(f, a, b)).margin(1e-12));
  }
}

TEST_CASE("segment tiling is validated") {
  CHECK_THROWS(MarginalFn({Segment{0, 1, 1, 1}, Segment{1.5, 2, 1, 1}}));
  CHECK_THROWS(MarginalFn({Segment{0.5, 1, 1, 1}}));
  CHECK_THROWS(MarginalFn({Segment{0, 0, 1, 1}}));
  CHECK_THROWS(MarginalFn(std::vector<Segment>{}));
}
