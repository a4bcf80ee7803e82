#include <doctest.h>

#include <cmath>
#include <limits>

#include "divmkt/errors.hpp"
#include "divmkt/feller.hpp"
#include "oracles.hpp"

using namespace divmkt;

namespace {

const auto kZero = [](double) { return 0.0; };
const auto kOne = [](double) { return 1.0; };
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("scale function of a driftless diffusion is the identity") {
  const FellerProblem bm{-1.0, 1.0, 0.0, kZero, kOne};
  for (double x : {-0.5, 0.3, 0.9}) CHECK(std::abs(scale_function(bm, x) - x) < 1e-10);
  CHECK(scale_function(bm, 0.0) == 0.0);
  CHECK_THROWS_AS(scale_function(bm, 1.5), DomainError);
  CHECK_THROWS_AS(scale_function(bm, -1.0), DomainError);
}

TEST_CASE("scale function and speed density under unit drift") {
  const FellerProblem p{-1.0, 1.0, 0.0, kOne, kOne};
  CHECK(scale_function(p, 0.5) == doctest::Approx((1 - std::exp(-1.0)) / 2).epsilon(1e-10));
  CHECK(scale_function(p, 0.5) == doctest::Approx(0.316060).epsilon(1e-6));
  CHECK(speed_density(p, 0.0) == doctest::Approx(1.0));
  CHECK(speed_density(p, 0.5) == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  CHECK(speed_density({-1.0, 1.0, 0.0, kZero, kOne}, 0.7) == doctest::Approx(1.0));
}

TEST_CASE("scale function is strictly increasing") {
  const FellerProblem p{0.0, 1.0, 0.5, [](double x) { return std::sin(6 * x); },
                        [](double x) { return 0.5 + x * x; }};
  double prev = -kInf;
  for (int k = 1; k < 50; ++k) {
    const double v = scale_function(p, k / 50.0);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(scale_function(p, 0.5) == 0.0);
}

TEST_CASE("degenerate diffusion is a precondition error") {
  const FellerProblem p{0.0, 1.0, 0.5, kZero, [](double x) { return x - 0.3; }};
  CHECK_THROWS_AS(scale_function(p, 0.2), PreconditionError);
  CHECK_THROWS_AS(classify_endpoint(p, Side::Left), PreconditionError);
  const FellerProblem bad_x0{0.0, 1.0, 1.5, kZero, kOne};
  CHECK_THROWS_AS(classify_endpoint(bad_x0, Side::Right), PreconditionError);
}

TEST_CASE("Feller verdict truth table") {
  for (auto phi : {Finiteness::Finite, Finiteness::Infinite, Finiteness::Unknown}) {
    for (auto i : {Finiteness::Finite, Finiteness::Infinite, Finiteness::Unknown}) {
      CHECK(feller_verdict(phi, i) == oracle::feller_two_clause(phi, i));
    }
  }
}

TEST_CASE("Brownian motion on the unit interval hits both ends") {
  const auto r = feller_test({0.0, 1.0, 0.5, kZero, kOne});
  REQUIRE(r.left);
  REQUIRE(r.right);
  CHECK(r.left->verdict == HitVerdict::HitsWithPositiveProb);
  CHECK(r.right->verdict == HitVerdict::HitsWithPositiveProb);
  CHECK(r.right->phi == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.right->I == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(r.left->phi == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("Bessel-type drift never reaches zero") {
  const FellerProblem p{0.0, kInf, 1.0, [](double x) { return 1.0 / x; }, kOne};
  const auto r = classify_endpoint(p, Side::Left);
  REQUIRE(r.left);
  CHECK(r.left->phi_status == Finiteness::Infinite);
  CHECK(r.left->verdict == HitVerdict::NoHitAS);
  CHECK(r.left->phi == -kInf);
}

TEST_CASE("finite scale with infinite I is not reached") {
  const FellerProblem p{0.0, 1.0, 0.5, kZero, [](double x) { return std::pow(1 - x, 3); }};
  const auto r = classify_endpoint(p, Side::Right);
  CHECK(r.right->phi_status == Finiteness::Finite);
  CHECK(r.right->I_status == Finiteness::Infinite);
  CHECK(r.right->verdict == HitVerdict::NoHitAS);
}

TEST_CASE("two-stock weight diffusion") {
  const auto diverse = feller_test(weight_diffusion_problem(DriftSpec::power_law(0.2, 0.25, 1)));
  CHECK(diverse.right->verdict == HitVerdict::NoHitAS);
  CHECK(diverse.left->verdict == HitVerdict::NoHitAS);
  const auto leaky = feller_test(weight_diffusion_problem(DriftSpec::power_law(0.2, 0.1, 1)));
  CHECK(leaky.right->verdict == HitVerdict::HitsWithPositiveProb);
  const auto prob = weight_diffusion_problem(DriftSpec::power_law(0.2, 0.25, 1));
  CHECK(prob.alpha == doctest::Approx(0.2));
  CHECK(prob.beta == doctest::Approx(0.8));
  CHECK(prob.diffusion_sq(0.3) == doctest::Approx(2 * 0.09 * 0.49));
}

TEST_CASE("criterion integral closed forms") {
  const auto a = criterion_integral(DriftSpec::power_law(0.2, 0.25, 1), Coefficient::A2, 2, 0.5);
  CHECK(a.status == Divergence::Divergent);
  CHECK(a.method == DivergenceMethod::ClosedForm);
  CHECK(*a.exponent == doctest::Approx(1.5625));
  const auto b = criterion_integral(DriftSpec::power_law(0.2, 0.1, 1), Coefficient::A2, 2, 0.5);
  CHECK(b.status == Divergence::Convergent);
  CHECK(*b.exponent == doctest::Approx(0.625));
  for (int n : {2, 3, 7}) {
    for (auto c : {Coefficient::A1, Coefficient::A2}) {
      CHECK(criterion_integral(DriftSpec::power_law(0.2, 1, 2), c, n, 0.5).status == Divergence::Divergent);
    }
  }
  CHECK(criterion_integral(DriftSpec::power_law(0.2, 5, 0.5), Coefficient::A2, 2, 0.5).status ==
        Divergence::Convergent);
}

TEST_CASE("criterion integral tail fit agrees with the closed form away from the critical point") {
  for (double p : {0.05, 0.1, 0.3, 0.5}) {
    for (int n : {2, 5}) {
      for (auto c : {Coefficient::A1, Coefficient::A2}) {
        const auto spec = DriftSpec::power_law(0.2, p, 1);
        const auto closed = criterion_integral(spec, c, n, 0.5);
        const auto fit = criterion_integral(spec, c, n, 0.5, Route::TailFit);
        CHECK(fit.method == DivergenceMethod::TailFit);
        CHECK(fit.fit->exponent == doctest::Approx(*closed.exponent).epsilon(1e-4));
        if (std::abs(*closed.exponent - 1) < kExponentBand) {
          CHECK(fit.status == Divergence::Inconclusive);
        } else {
          CHECK(fit.status == closed.status);
        }
      }
    }
  }
  const auto steep = criterion_integral(DriftSpec::power_law(0.2, 0.1, 1.5), Coefficient::A2, 2, 0.5,
                                        Route::TailFit);
  CHECK(steep.status == Divergence::Divergent);
  const auto custom = DriftSpec::custom(0.2, [](double x) { return 0.25 / (0.8 - x); });
  CHECK(criterion_integral(custom, Coefficient::A2, 2, 0.5).status == Divergence::Divergent);
}

TEST_CASE("integral of g") {
  CHECK(integral_of_g(DriftSpec::power_law(0.2, 1, 0.5), 0.5).status == Divergence::Convergent);
  CHECK(integral_of_g(DriftSpec::power_law(0.2, 1, 1), 0.5).status == Divergence::Divergent);
  CHECK(integral_of_g(DriftSpec::power_law(0.2, 1, 1.5), 0.5).status == Divergence::Divergent);
  CHECK(integral_of_g(DriftSpec::power_law(0.2, 1, 0.5), 0.5, Route::TailFit).status ==
        Divergence::Convergent);
  CHECK(integral_of_g(DriftSpec::power_law(0.2, 1, 1.5), 0.5, Route::TailFit).status ==
        Divergence::Divergent);
}

TEST_CASE("tail fit on synthetic power integrands") {
  const Eigen::ArrayXd eps = epsilon_ladder(0.075);
  CHECK(eps.size() == kLadderSteps + 1);
  CHECK(eps[1] == doctest::Approx(0.0375));
  for (double r : {0.5, 0.9, 0.97, 1.0, 1.03, 1.1, 2.0}) {
    const auto v = classify_tail(eps, std::log(3.0) - r * eps.log());
    CHECK(v.fit->exponent == doctest::Approx(r).epsilon(1e-9));
    const auto want = r >= 1 + kExponentBand   ? Divergence::Divergent
                      : r <= 1 - kExponentBand ? Divergence::Convergent
                                               : Divergence::Inconclusive;
    CHECK(v.status == want);
  }
  Eigen::ArrayXd saturated = -eps.log();
  saturated[saturated.size() - 1] = 800.0;
  CHECK(classify_tail(eps, saturated).status == Divergence::Divergent);
  Eigen::ArrayXd broken = -eps.log();
  broken[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK(classify_tail(eps, broken).status == Divergence::Inconclusive);
}
