#include "divmkt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "divmkt/errors.hpp"

namespace divmkt {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double power_formula(double delta, double p, double q, double x) {
  return p / std::pow(1.0 - delta - x, q);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be a finite positive number");
  }
}

}  // namespace

DriftSpec::DriftSpec(double delta, DriftFamily family)
    : delta_(delta), family_(std::move(family)),
      bridge_end_(std::numeric_limits<double>::quiet_NaN()) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ParameterError("delta must lie in (0, 1/2)");
  }
  const double right = 1.0 - delta;
  std::visit(
      Overloaded{
          [](const PowerLaw& f) {
            require_positive(f.p, "p");
            require_positive(f.q, "q");
          },
          [&](const PatchedPowerLaw& f) {
            require_positive(f.p, "p");
            require_positive(f.q, "q");
            require_positive(f.c, "c");
            if (!(f.x_switch > 0.0 && f.x_switch < right)) {
              throw ParameterError("x_switch must lie in (0, 1 - delta)");
            }
            double end = std::max(f.x_switch + 0.05, 0.5);
            if (end >= right) end = f.x_switch + 0.5 * (right - f.x_switch);
            bridge_end_ = end;
            bridge_left_value_ = -f.c / f.x_switch;
            bridge_right_value_ = power_formula(delta, f.p, f.q, end);
          },
          [](const Custom& f) {
            if (!f.g) throw ParameterError("custom drift needs a callable g");
          }},
      family_);
}

DriftSpec DriftSpec::power_law(double delta, double p, double q) {
  return DriftSpec(delta, PowerLaw{p, q});
}

DriftSpec DriftSpec::patched(double delta, double p, double q, double c, double x_switch) {
  return DriftSpec(delta, PatchedPowerLaw{p, q, c, x_switch});
}

DriftSpec DriftSpec::custom(double delta, std::function<double(double)> g, std::string label,
                            std::optional<DeclaredLimits> declared) {
  return DriftSpec(delta, Custom{std::move(g), std::move(label), std::move(declared)});
}

std::string DriftSpec::family_name() const {
  return std::visit(Overloaded{[](const PowerLaw&) { return std::string("power_law"); },
                               [](const PatchedPowerLaw&) {
                                 return std::string("patched_power_law");
                               },
                               [](const Custom& c) { return c.label; }},
                    family_);
}

std::optional<PowerTail> DriftSpec::power_tail() const {
  return std::visit(
      Overloaded{[](const PowerLaw& f) -> std::optional<PowerTail> { return PowerTail{f.p, f.q}; },
                 [](const PatchedPowerLaw& f) -> std::optional<PowerTail> {
                   return PowerTail{f.p, f.q};
                 },
                 [](const Custom&) -> std::optional<PowerTail> { return std::nullopt; }},
      family_);
}

double DriftSpec::raw(double x) const {
  return std::visit(
      Overloaded{[&](const PowerLaw& f) { return power_formula(delta_, f.p, f.q, x); },
                 [&](const PatchedPowerLaw& f) {
                   if (x <= f.x_switch) return -f.c / x;
                   if (x >= bridge_end_) return power_formula(delta_, f.p, f.q, x);
                   const double t = (x - f.x_switch) / (bridge_end_ - f.x_switch);
                   return (1.0 - t) * bridge_left_value_ + t * bridge_right_value_;
                 },
                 [&](const Custom& f) { return f.g(x); }},
      family_);
}

double g_eval_clamped(const DriftSpec& spec, double x, bool* clamped) {
  const double lo = kEvalGuard;
  const double hi = spec.right_endpoint() - kEvalGuard;
  const double xc = std::clamp(x, lo, hi);
  if (clamped) *clamped = (xc != x);
  const double v = spec.raw(xc);
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "g(" << xc << ") is not finite";
    throw EvaluationError(msg.str());
  }
  return v;
}

double g_eval(const DriftSpec& spec, double x) {
  if (!(x > 0.0 && x < spec.right_endpoint())) {
    std::ostringstream msg;
    msg << "g evaluated at " << x << " outside (0, " << spec.right_endpoint() << ")";
    throw DomainError(msg.str());
  }
  return g_eval_clamped(spec, x);
}

double psi(const DriftSpec& spec, double s) {
  return s * (-g_eval(spec, s) + 0.5) - s * s;
}

double psi_clamped(const DriftSpec& spec, double s, bool* clamped) {
  return s * (-g_eval_clamped(spec, s, clamped) + 0.5) - s * s;
}

double coefficient_A2(double x) { return 1.0 / (x * (1.0 - x)); }

double coefficient_A1(double x, int n) {
  return 2.0 / (1.0 + 1.0 / (n - 1.0)) * coefficient_A2(x);
}

CriterionConstants A_coeffs(int n, double delta) {
  if (n < 2) throw ParameterError("n must be at least 2");
  if (!(delta > 0.0 && delta < 0.5)) throw ParameterError("delta must lie in (0, 1/2)");
  return CriterionConstants{n, coefficient_A1(1.0 - delta, n), coefficient_A2(1.0 - delta), 0.5};
}

namespace {

// Bisects [a, b] toward the half carrying the larger increment. A genuine
// jump keeps its size under refinement; a steep continuous slope does not.
bool has_jump(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b);
  for (int it = 0; it < 48; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (std::abs(fm - fa) >= std::abs(fb - fm)) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
    if (!(std::abs(fb - fa) > tol)) return false;
  }
  return true;
}

AdmissibilityReport sample_custom(const DriftSpec& spec) {
  AdmissibilityReport r;
  r.sampled = true;
  const double right = spec.right_endpoint();
  auto g = [&](double x) { return g_eval_clamped(spec, x); };

  std::ostringstream note;
  note << "sampled, not proven";

  try {
    // continuity on an interior grid
    constexpr int kGrid = 2048;
    const double lo = 1e-3, hi = right - 1e-3;
    std::vector<double> xs(kGrid + 1), vs(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) {
      xs[i] = lo + (hi - lo) * i / kGrid;
      vs[i] = g(xs[i]);
    }
    r.continuous = true;
    for (int i = 0; i < kGrid && r.continuous; ++i) {
      const double scale = 1.0 + std::max(std::abs(vs[i]), std::abs(vs[i + 1]));
      const double tol = 1e-6 * scale;
      if (std::abs(vs[i + 1] - vs[i]) > tol && has_jump(g, xs[i], xs[i + 1], tol)) {
        r.continuous = false;
        note << "; jump detected near x=" << xs[i];
      }
    }

    // right endpoint: x = 1 - delta - 2^-k, k = 4..40
    std::vector<double> tail;
    for (int k = 4; k <= 40; ++k) tail.push_back(g(right - std::ldexp(1.0, -k)));
    bool increasing = true;
    for (std::size_t k = 16; k + 1 < tail.size(); ++k) increasing &= tail[k + 1] > tail[k];
    const double first_step = tail[17] - tail[16];
    const double last_step = tail.back() - tail[tail.size() - 2];
    r.blows_up_at_right_endpoint = increasing && first_step > 0.0 && last_step >= 0.25 * first_step;

    // left endpoint: x g(x) at x = 2^-k, k = 4..40
    std::vector<double> xg;
    for (int k = 4; k <= 40; ++k) {
      const double x = std::ldexp(1.0, -k);
      xg.push_back(x * g(x));
    }
    const auto tail_begin = xg.begin() + 26;  // k >= 30
    r.x_g_liminf = *std::min_element(tail_begin, xg.end());
    r.x_g_limsup = *std::max_element(tail_begin, xg.end());
    const double drift = std::abs(xg.back()) / std::max(std::abs(*tail_begin), 1e-300);
    r.boundedness_at_zero = r.x_g_limsup < 0.0 && drift < 4.0 && drift > 0.25;
  } catch (const EvaluationError& e) {
    r.continuous = false;
    note << "; " << e.what();
  }

  if (const auto& c = std::get<Custom>(spec.family()); c.declared) {
    if (c.declared->blows_up_at_right_endpoint &&
        *c.declared->blows_up_at_right_endpoint != r.blows_up_at_right_endpoint) {
      note << "; declared right-endpoint blow-up disagrees with sampling";
    }
    if (c.declared->x_g_at_zero) note << "; declared x g(x) -> " << *c.declared->x_g_at_zero;
  }
  r.note = note.str();
  return r;
}

}  // namespace

AdmissibilityReport check_admissible(const DriftSpec& spec) {
  return std::visit(Overloaded{[](const PowerLaw&) {
                                 AdmissibilityReport r;
                                 r.continuous = true;
                                 r.blows_up_at_right_endpoint = true;
                                 r.boundedness_at_zero = false;
                                 r.x_g_liminf = r.x_g_limsup = 0.0;
                                 r.note = "analytic: x g(x) -> 0 as x -> 0";
                                 return r;
                               },
                               [](const PatchedPowerLaw& f) {
                                 AdmissibilityReport r;
                                 r.continuous = true;
                                 r.blows_up_at_right_endpoint = true;
                                 r.boundedness_at_zero = true;
                                 r.x_g_liminf = r.x_g_limsup = -f.c;
                                 r.note = "analytic: x g(x) = -c near 0";
                                 return r;
                               },
                               [&](const Custom&) { return sample_custom(spec); }},
                    spec.family());
}

}  // namespace divmkt
