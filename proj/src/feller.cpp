#include "divmkt/feller.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "divmkt/errors.hpp"

namespace divmkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_one(double q) { return std::abs(q - 1.0) <= 1e-12; }

}  // namespace

std::string to_string(Divergence d) {
  switch (d) {
    case Divergence::Divergent: return "Divergent";
    case Divergence::Convergent: return "Convergent";
    case Divergence::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string to_string(DivergenceMethod m) {
  return m == DivergenceMethod::ClosedForm ? "ClosedForm" : "TailFit";
}

std::string to_string(HitVerdict v) {
  switch (v) {
    case HitVerdict::NoHitAS: return "NoHitAS";
    case HitVerdict::HitsWithPositiveProb: return "HitsWithPositiveProb";
    case HitVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string to_string(Finiteness f) {
  switch (f) {
    case Finiteness::Finite: return "Finite";
    case Finiteness::Infinite: return "Infinite";
    case Finiteness::Unknown: return "Unknown";
  }
  return "?";
}

std::string to_string(Side s) { return s == Side::Left ? "Left" : "Right"; }

Eigen::ArrayXd epsilon_ladder(double eps0, int steps) {
  Eigen::ArrayXd eps(steps + 1);
  for (int k = 0; k <= steps; ++k) eps[k] = std::ldexp(eps0, -k);
  return eps;
}

DivergenceVerdict classify_tail(const Eigen::ArrayXd& eps, const Eigen::ArrayXd& log_integrand,
                                double band) {
  DivergenceVerdict v;
  v.method = DivergenceMethod::TailFit;
  TailFit fit;
  fit.eps = eps;
  fit.log_integrand = log_integrand;

  const Eigen::Index total = eps.size();
  if (total < 4 || log_integrand.size() != total) {
    v.diagnostic = "ladder too short";
    v.fit = std::move(fit);
    return v;
  }
  if (!log_integrand.isFinite().all() || !(eps > 0.0).all()) {
    v.diagnostic = "non-finite integrand on the ladder";
    v.fit = std::move(fit);
    return v;
  }
  fit.saturated = (log_integrand.abs() > kLogSaturation).any();

  const Eigen::Index start = total / 2;
  const Eigen::Index m = total - start;
  const Eigen::ArrayXd xs = eps.tail(m).log();
  const Eigen::ArrayXd ys = log_integrand.tail(m);
  const double xbar = xs.mean();
  const double ybar = ys.mean();
  const double sxx = (xs - xbar).square().sum();
  const double sxy = ((xs - xbar) * (ys - ybar)).sum();
  const double slope = sxy / sxx;
  const double resid = ((ys - ybar) - slope * (xs - xbar)).square().sum();
  fit.exponent = -slope;
  fit.std_error = m > 2 ? std::sqrt(resid / static_cast<double>(m - 2) / sxx) : 0.0;
  v.exponent = fit.exponent;

  if (fit.saturated && log_integrand[total - 1] > kLogSaturation) {
    v.status = Divergence::Divergent;
    v.diagnostic = "log-integrand saturated";
  } else if (fit.exponent >= 1.0 + band) {
    v.status = Divergence::Divergent;
  } else if (fit.exponent <= 1.0 - band) {
    v.status = Divergence::Convergent;
  } else {
    v.status = Divergence::Inconclusive;
    v.diagnostic = "exponent inside the critical band";
  }
  v.fit = std::move(fit);
  return v;
}

// ---------------------------------------------------------------------------

namespace {

DivergenceVerdict closed_form_exp(const PowerTail& tail, double coefficient_at_end) {
  DivergenceVerdict v;
  v.method = DivergenceMethod::ClosedForm;
  if (coefficient_at_end <= 0.0) {
    v.status = Divergence::Convergent;
    v.exponent = 0.0;
    v.diagnostic = "non-positive coefficient: integrand bounded";
  } else if (is_one(tail.q)) {
    const double r = coefficient_at_end * tail.p;
    v.exponent = r;
    v.status = r >= 1.0 - kCriticalSlack ? Divergence::Divergent : Divergence::Convergent;
  } else if (tail.q > 1.0) {
    v.exponent = kInf;
    v.status = Divergence::Divergent;
    v.diagnostic = "q > 1: inner integral grows like a power";
  } else {
    v.exponent = 0.0;
    v.status = Divergence::Convergent;
    v.diagnostic = "q < 1: inner integral bounded";
  }
  return v;
}

// Ladder y_k = 1 - delta - eps_k with eps0 = (1 - delta - x0) / 4.
Eigen::ArrayXd model_ladder(const DriftSpec& spec, double x0) {
  return epsilon_ladder((spec.right_endpoint() - x0) / 4.0);
}

void check_reference(const DriftSpec& spec, double x0) {
  if (!(x0 > 0.0 && x0 < spec.right_endpoint())) {
    throw DomainError("reference point x0 must lie in (0, 1 - delta)");
  }
}

// Tail fit of exp(int_{x0}^y w(z) g(z) dz) on the model ladder.
DivergenceVerdict tail_fit_exp(const DriftSpec& spec, const std::function<double(double)>& weight,
                               double x0) {
  const Eigen::ArrayXd eps = model_ladder(spec, x0);
  Eigen::ArrayXd log_f(eps.size());
  auto integrand = [&](double z) { return weight(z) * g_eval(spec, z); };
  try {
    double prev = x0;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < eps.size(); ++k) {
      const double y = spec.right_endpoint() - eps[k];
      acc += integrate_or_throw(integrand, prev, y);
      log_f[k] = acc;
      prev = y;
    }
  } catch (const std::runtime_error& e) {
    DivergenceVerdict v;
    v.diagnostic = e.what();
    return v;
  }
  return classify_tail(eps, log_f);
}

}  // namespace

DivergenceVerdict criterion_integral(const DriftSpec& spec, Coefficient a, int n, double x0,
                                     Route route) {
  if (n < 2) throw ParameterError("n must be at least 2");
  check_reference(spec, x0);
  const double end = spec.right_endpoint();
  const double at_end = a == Coefficient::A1 ? coefficient_A1(end, n) : coefficient_A2(end);
  if (auto tail = spec.power_tail(); tail && route == Route::Auto) {
    return closed_form_exp(*tail, at_end);
  }
  if (a == Coefficient::A1) {
    return tail_fit_exp(spec, [n](double z) { return coefficient_A1(z, n); }, x0);
  }
  return tail_fit_exp(spec, [](double z) { return coefficient_A2(z); }, x0);
}

DivergenceVerdict scaled_exp_integral(const DriftSpec& spec, double alpha, double x0,
                                      Route route) {
  check_reference(spec, x0);
  if (auto tail = spec.power_tail(); tail && route == Route::Auto) {
    return closed_form_exp(*tail, alpha);
  }
  return tail_fit_exp(spec, [alpha](double) { return alpha; }, x0);
}

DivergenceVerdict integral_of_g(const DriftSpec& spec, double x0, Route route) {
  check_reference(spec, x0);
  if (auto tail = spec.power_tail(); tail && route == Route::Auto) {
    DivergenceVerdict v;
    v.method = DivergenceMethod::ClosedForm;
    v.exponent = tail->q;
    v.status = tail->q >= 1.0 - kCriticalSlack ? Divergence::Divergent : Divergence::Convergent;
    return v;
  }
  const Eigen::ArrayXd eps = model_ladder(spec, x0);
  Eigen::ArrayXd log_g(eps.size());
  try {
    for (Eigen::Index k = 0; k < eps.size(); ++k) {
      const double gv = g_eval(spec, spec.right_endpoint() - eps[k]);
      log_g[k] = gv > 0.0 ? std::log(gv) : kNaN;
    }
  } catch (const EvaluationError& e) {
    DivergenceVerdict v;
    v.diagnostic = e.what();
    return v;
  }
  DivergenceVerdict v = classify_tail(eps, log_g);
  if (!v.exponent) v.diagnostic = "g is not positive near 1 - delta";
  return v;
}

double inner_criterion_integral(const DriftSpec& spec, Coefficient a, int n, double y1,
                                double y2, const QuadratureOptions& opts) {
  auto f = [&](double z) {
    const double w = a == Coefficient::A1 ? coefficient_A1(z, n) : coefficient_A2(z);
    return w * g_eval(spec, z);
  };
  return integrate_or_throw(f, y1, y2, opts);
}

// ---------------------------------------------------------------------------
// Feller's test

namespace {

double sigma_sq_at(const FellerProblem& p, double x) {
  const double s = p.diffusion_sq(x);
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream msg;
    msg << "sigma^2(" << x << ") = " << s << " is not positive";
    throw PreconditionError(msg.str());
  }
  return s;
}

// d/dx log phi'(x) = -2 b(x) / sigma^2(x)
double log_slope(const FellerProblem& p, double z) {
  const double v = 2.0 * p.drift(z) / sigma_sq_at(p, z);
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "drift is not finite at " << z;
    throw EvaluationError(msg.str());
  }
  return v;
}

// int_a^b 2b/sigma^2
double log_scale_integral(const FellerProblem& p, double a, double b,
                          const QuadratureOptions& opts) {
  return integrate_or_throw([&](double z) { return log_slope(p, z); }, a, b, opts);
}

void validate(const FellerProblem& p) {
  if (!p.drift || !p.diffusion_sq) throw PreconditionError("drift and diffusion must be set");
  if (!(p.alpha < p.x0 && p.x0 < p.beta)) {
    throw PreconditionError("require alpha < x0 < beta");
  }
  constexpr int kSamples = 257;
  for (int i = 1; i < kSamples; ++i) {
    const double t = static_cast<double>(i) / kSamples;
    double x;
    if (std::isfinite(p.alpha) && std::isfinite(p.beta)) {
      x = p.alpha + t * (p.beta - p.alpha);
    } else {
      // geometric spread about x0 inside the interval
      const double u = (t - 0.5) * 2.0;
      const double reach = std::ldexp(1.0, static_cast<int>(std::abs(u) * 20.0) - 10);
      x = p.x0 + (u < 0 ? -reach : reach);
      if (!(x > p.alpha && x < p.beta)) continue;
    }
    sigma_sq_at(p, x);
  }
}

void check_inside(const FellerProblem& p, double x) {
  if (!(x > p.alpha && x < p.beta)) {
    std::ostringstream msg;
    msg << "x = " << x << " outside (" << p.alpha << ", " << p.beta << ")";
    throw DomainError(msg.str());
  }
}

constexpr int kUniformSegments = 16;

// Right endpoint of a problem with finite beta.
EndpointReport classify_right(const FellerProblem& p) {
  EndpointReport rep;
  rep.side = Side::Right;
  rep.endpoint = p.beta;
  rep.phi = kNaN;
  rep.I = kNaN;
  if (!std::isfinite(p.beta)) {
    rep.diagnostic = "infinite endpoint is not classified";
    return rep;
  }

  const QuadratureOptions opts;
  const Eigen::ArrayXd eps = epsilon_ladder((p.beta - p.x0) / 4.0);
  const Eigen::Index K = eps.size() - 1;

  // Shared grid: uniform from x0 to the first ladder point, then the ladder.
  std::vector<double> nodes;
  const double y0 = p.beta - eps[0];
  for (int j = 0; j <= kUniformSegments; ++j) {
    nodes.push_back(p.x0 + (y0 - p.x0) * j / kUniformSegments);
  }
  for (Eigen::Index k = 1; k <= K; ++k) nodes.push_back(p.beta - eps[k]);
  const std::size_t ladder_offset = kUniformSegments;  // nodes[ladder_offset + k] = beta - eps_k

  try {
    std::vector<double> L(nodes.size(), 0.0);
    for (std::size_t j = 1; j < nodes.size(); ++j) {
      L[j] = L[j - 1] + log_scale_integral(p, nodes[j - 1], nodes[j], opts);
    }
    Eigen::ArrayXd log_phi_prime(K + 1);
    for (Eigen::Index k = 0; k <= K; ++k) log_phi_prime[k] = -L[ladder_offset + k];

    rep.phi_fit = classify_tail(eps, log_phi_prime);
    if (rep.phi_fit.status == Divergence::Divergent) {
      rep.phi = kInf;
      rep.phi_status = Finiteness::Infinite;
      rep.verdict = feller_verdict(rep.phi_status, rep.I_status);
      return rep;
    }
    if (rep.phi_fit.status == Divergence::Inconclusive) {
      rep.diagnostic = "scale function: " + rep.phi_fit.diagnostic;
      rep.verdict = feller_verdict(rep.phi_status, rep.I_status);
      return rep;
    }

    // phi' on a segment [u, v] starting from L(u)
    auto phi_prime_from = [&](double u, double Lu) {
      return [&p, &opts, u, Lu](double y) {
        return std::exp(-(Lu + log_scale_integral(p, u, y, opts)));
      };
    };

    std::vector<double> seg(nodes.size() - 1);
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
      seg[j] = integrate_or_throw(phi_prime_from(nodes[j], L[j]), nodes[j], nodes[j + 1], opts);
    }
    const double r_phi = std::min(*rep.phi_fit.exponent, 1.0 - kExponentBand);
    // T[j] = phi(beta) - phi(nodes[j]), accumulated from the endpoint inward
    std::vector<double> T(nodes.size());
    T.back() = std::exp(-L.back()) * eps[K] / (1.0 - r_phi);
    for (std::size_t j = nodes.size() - 1; j-- > 0;) T[j] = T[j + 1] + seg[j];
    rep.phi = T.front();
    rep.phi_status = Finiteness::Finite;

    Eigen::ArrayXd log_h(K + 1);
    for (Eigen::Index k = 0; k <= K; ++k) {
      const std::size_t j = ladder_offset + k;
      log_h[k] = std::log(T[j]) + L[j] - std::log(sigma_sq_at(p, nodes[j]));
    }
    rep.I_fit = classify_tail(eps, log_h);
    if (rep.I_fit->status == Divergence::Divergent) {
      rep.I = kInf;
      rep.I_status = Finiteness::Infinite;
    } else if (rep.I_fit->status == Divergence::Convergent) {
      // (phi(beta) - phi(x)) m(x) on each segment, by local nested quadrature
      const QuadratureOptions loose{1e-12, 1e-7, 100'000};
      double total = 0.0;
      for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        const double u = nodes[j], v = nodes[j + 1];
        auto h = [&, u, v, j](double x) {
          const double Lx = L[j] + log_scale_integral(p, u, x, loose);
          auto pp = [&, x, Lx](double y) {
            return std::exp(-(Lx + log_scale_integral(p, x, y, loose)));
          };
          const double diff = T[j + 1] + integrate_or_throw(pp, x, v, loose);
          return diff * std::exp(Lx) / sigma_sq_at(p, x);
        };
        total += integrate_or_throw(h, u, v, loose);
      }
      const double r_I = std::min(*rep.I_fit->exponent, 1.0 - kExponentBand);
      total += std::exp(log_h[K]) * eps[K] / (1.0 - r_I);
      rep.I = total;
      rep.I_status = Finiteness::Finite;
    } else {
      rep.diagnostic = "I integral: " + rep.I_fit->diagnostic;
    }
  } catch (const QuadratureError& e) {
    rep.diagnostic = e.what();
  } catch (const EvaluationError& e) {
    rep.diagnostic = e.what();
  }
  rep.verdict = feller_verdict(rep.phi_status, rep.I_status);
  return rep;
}

FellerProblem reflected(const FellerProblem& p) {
  FellerProblem r;
  r.alpha = -p.beta;
  r.beta = -p.alpha;
  r.x0 = -p.x0;
  r.drift = [b = p.drift](double x) { return -b(-x); };
  r.diffusion_sq = [s = p.diffusion_sq](double x) { return s(-x); };
  return r;
}

}  // namespace

double scale_function(const FellerProblem& prob, double x, const QuadratureOptions& opts) {
  validate(prob);
  check_inside(prob, x);
  auto phi_prime = [&](double y) { return std::exp(-log_scale_integral(prob, prob.x0, y, opts)); };
  return integrate_or_throw(phi_prime, prob.x0, x, opts);
}

double speed_density(const FellerProblem& prob, double x, const QuadratureOptions& opts) {
  validate(prob);
  check_inside(prob, x);
  return std::exp(log_scale_integral(prob, prob.x0, x, opts)) / sigma_sq_at(prob, x);
}

HitVerdict feller_verdict(Finiteness phi_end, Finiteness I_end) {
  if (phi_end == Finiteness::Infinite) return HitVerdict::NoHitAS;
  if (phi_end == Finiteness::Finite) {
    if (I_end == Finiteness::Infinite) return HitVerdict::NoHitAS;
    if (I_end == Finiteness::Finite) return HitVerdict::HitsWithPositiveProb;
  }
  return HitVerdict::Inconclusive;
}

FellerReport classify_endpoint(const FellerProblem& prob, Side side) {
  validate(prob);
  FellerReport out;
  if (side == Side::Right) {
    out.right = classify_right(prob);
    return out;
  }
  EndpointReport r = classify_right(reflected(prob));
  r.side = Side::Left;
  r.endpoint = prob.alpha;
  r.phi = -r.phi;
  out.left = std::move(r);
  return out;
}

FellerReport feller_test(const FellerProblem& prob) {
  FellerReport out;
  out.left = classify_endpoint(prob, Side::Left).left;
  out.right = classify_endpoint(prob, Side::Right).right;
  return out;
}

FellerProblem weight_diffusion_problem(const DriftSpec& spec) {
  FellerProblem p;
  p.alpha = spec.delta();
  p.beta = spec.right_endpoint();
  p.x0 = 0.5;
  p.drift = [spec](double x) { return (1.0 - x) * psi(spec, x) - x * psi(spec, 1.0 - x); };
  p.diffusion_sq = [](double x) {
    const double s = x * (1.0 - x);
    return 2.0 * s * s;
  };
  return p;
}

}  // namespace divmkt
