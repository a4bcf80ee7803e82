#pragma once

// Feller's test for one-dimensional diffusions and the improper-integral
// criteria that decide diversity of the market model.

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

#include "divmkt/model.hpp"
#include "divmkt/quadrature.hpp"

namespace divmkt {

// ---------------------------------------------------------------------------
// Divergence of improper integrals at a singular endpoint

enum class Divergence { Divergent, Convergent, Inconclusive };
enum class DivergenceMethod { ClosedForm, TailFit };

// |r - 1| below this band leaves a tail fit Inconclusive.
inline constexpr double kExponentBand = 0.05;
// The ladder eps_k = eps0 * 2^-k runs over k = 0..kLadderSteps.
inline constexpr int kLadderSteps = 24;
// Log-integrand values beyond +-700 are saturated and count as divergence evidence.
inline constexpr double kLogSaturation = 700.0;
// Relative slack when comparing a closed-form exponent to the critical value 1.
inline constexpr double kCriticalSlack = 1e-12;

struct TailFit {
  double exponent = 0.0;   // r in integrand ~ C * distance^-r
  double std_error = 0.0;  // least-squares standard error of r
  Eigen::ArrayXd eps;           // distances to the endpoint
  Eigen::ArrayXd log_integrand; // log of the integrand at those distances
  bool saturated = false;
};

struct DivergenceVerdict {
  Divergence status = Divergence::Inconclusive;
  DivergenceMethod method = DivergenceMethod::TailFit;
  std::optional<double> exponent;
  std::optional<TailFit> fit;
  std::string diagnostic;
};

std::string to_string(Divergence d);
std::string to_string(DivergenceMethod m);

// eps0 * 2^-k for k = 0..steps.
Eigen::ArrayXd epsilon_ladder(double eps0, int steps = kLadderSteps);

// Fits log(integrand) = c - r log(eps) by least squares over the inner half
// of the ladder (smallest distances) and classifies the integral up to the
// endpoint: Divergent if r >= 1 + band, Convergent if r <= 1 - band.
DivergenceVerdict classify_tail(const Eigen::ArrayXd& eps, const Eigen::ArrayXd& log_integrand,
                                double band = kExponentBand);

// ---------------------------------------------------------------------------
// Criterion integrals of the market model

enum class Coefficient { A1, A2 };
enum class Route { Auto, TailFit };

// Decides divergence of  int_{x0}^{1-delta} exp( int_{x0}^y A(z) g(z) dz ) dy.
// Built-in families use the closed form of their power-law tail unless
// route == TailFit.
DivergenceVerdict criterion_integral(const DriftSpec& spec, Coefficient a, int n, double x0,
                                     Route route = Route::Auto);

// Decides divergence of  int_{x0}^{1-delta} exp( alpha int_{x0}^y g(z) dz ) dy.
DivergenceVerdict scaled_exp_integral(const DriftSpec& spec, double alpha, double x0,
                                      Route route = Route::Auto);

// Decides divergence of  int_{x0}^{1-delta} g(z) dz.
DivergenceVerdict integral_of_g(const DriftSpec& spec, double x0, Route route = Route::Auto);

// int_{y1}^{y2} A(z) g(z) dz by adaptive quadrature (y1, y2 inside the domain).
double inner_criterion_integral(const DriftSpec& spec, Coefficient a, int n, double y1,
                                double y2, const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Feller's test

// dX = b(X) dt + sigma(X) dB on (alpha, beta), reference point x0.
struct FellerProblem {
  double alpha = 0.0;
  double beta = 1.0;
  double x0 = 0.5;
  std::function<double(double)> drift;
  std::function<double(double)> diffusion_sq;
};

enum class Side { Left, Right };
enum class HitVerdict { NoHitAS, HitsWithPositiveProb, Inconclusive };
enum class Finiteness { Finite, Infinite, Unknown };

std::string to_string(HitVerdict v);
std::string to_string(Finiteness f);
std::string to_string(Side s);

// Natural scale phi(x) = int_{x0}^x exp(-int_{x0}^y 2b/sigma^2) dy.
// Throws DomainError outside (alpha, beta), PreconditionError on sigma^2 <= 0,
// QuadratureError when the nested quadrature fails.
double scale_function(const FellerProblem& prob, double x, const QuadratureOptions& opts = {});

// m(x) = 1 / (phi'(x) sigma^2(x)), with phi' from its exponential form.
double speed_density(const FellerProblem& prob, double x, const QuadratureOptions& opts = {});

// At an endpoint: a.s. no hit iff phi(end) is infinite, or finite with an
// infinite I integral. Hits with positive probability iff both are finite.
HitVerdict feller_verdict(Finiteness phi_end, Finiteness I_end);

struct EndpointReport {
  Side side = Side::Right;
  double endpoint = 0.0;
  // phi(endpoint); +-infinity when divergent, NaN when undecided
  double phi = 0.0;
  // I at the endpoint; +infinity when divergent, NaN when not reached
  double I = 0.0;
  Finiteness phi_status = Finiteness::Unknown;
  Finiteness I_status = Finiteness::Unknown;
  HitVerdict verdict = HitVerdict::Inconclusive;
  DivergenceVerdict phi_fit;
  std::optional<DivergenceVerdict> I_fit;
  std::string diagnostic;
};

struct FellerReport {
  std::optional<EndpointReport> left;
  std::optional<EndpointReport> right;
};

// Throws PreconditionError on a malformed problem (x0 outside (alpha, beta),
// sigma^2 <= 0 at a sampled point). Quadrature failures become Inconclusive.
FellerReport classify_endpoint(const FellerProblem& prob, Side side);

// Both endpoints.
FellerReport feller_test(const FellerProblem& prob);

// The two-stock weight mu_1 on (delta, 1 - delta): drift
// b0(x) = (1-x) psi(x) - x psi(1-x), sigma^2(x) = 2 x^2 (1-x)^2, x0 = 1/2.
FellerProblem weight_diffusion_problem(const DriftSpec& spec);

}  // namespace divmkt
