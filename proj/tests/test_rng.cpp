#include <doctest.h>

#include <cmath>

#include "divmkt/errors.hpp"
#include "divmkt/rng.hpp"
#include "oracles.hpp"

using namespace divmkt;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST_CASE("philox known answers") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal quantile inverts the normal CDF") {
  for (double u : {1e-300, 1e-12, 1e-6, 0.01, 0.025, 0.3, 0.5, 0.7, 0.975, 0.999, 1 - 1e-12}) {
    const double z = normal_quantile(u);
    const double back = oracle::Phi(z);
    CHECK(std::abs(back - u) <= 1e-14 + 1e-13 * std::min(u, 1 - u) * 100);
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
  CHECK(normal_quantile(0.2) == doctest::Approx(-normal_quantile(0.8)).epsilon(1e-15));
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("noise source is addressable and reproducible") {
  const NoiseSource a(123), b(123), c(124);
  CHECK(a.standard_normal(3, 17, 2) == b.standard_normal(3, 17, 2));
  CHECK(a.standard_normal(3, 17, 2) != c.standard_normal(3, 17, 2));
  CHECK(a.standard_normal(3, 17, 2) != a.standard_normal(3, 17, 3));
  CHECK(a.standard_normal(3, 17, 2) != a.standard_normal(3, 18, 2));
  CHECK(a.standard_normal(3, 17, 2) != a.standard_normal(4, 17, 2));
}

TEST_CASE("noise moments") {
  const NoiseSource src(2024);
  const int n = 200'000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    const double z = src.standard_normal(static_cast<std::uint64_t>(i % 97), i / 97, i % 5);
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
    below += z < -1.0;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(std::abs(s2 / n - 1) < 0.015);
  CHECK(std::abs(s3 / n) < 0.03);
  CHECK(std::abs(s4 / n - 3) < 0.06);
  CHECK(std::abs(static_cast<double>(below) / n - oracle::Phi(-1.0)) < 0.004);
}
