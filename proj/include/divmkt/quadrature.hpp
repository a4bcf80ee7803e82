#pragma once

#include <cstddef>
#include <functional>

namespace divmkt {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t max_subintervals = 1'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t subintervals = 0;
  bool converged = false;
};

// Globally adaptive 15-point Gauss-Kronrod rule with bisection of the
// interval carrying the largest error estimate. Endpoints are never sampled.
// b < a is allowed and flips the sign.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

// As integrate(), throwing QuadratureError when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opts = {});

}  // namespace divmkt
