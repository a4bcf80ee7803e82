#pragma once

// Drift families g(.) of the market model d log X_i = -g(mu_i) dt + dW_i and
// the scalar functions built from them.

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace divmkt {

// g(z) = p / (1 - delta - z)^q on all of (0, 1 - delta).
struct PowerLaw {
  double p = 1.0;
  double q = 1.0;
};

// g(z) = -c / z for z <= x_switch, the power law p / (1 - delta - z)^q from
// bridge_end() onward, and a linear bridge in between.
struct PatchedPowerLaw {
  double p = 1.0;
  double q = 1.0;
  double c = 0.5;
  double x_switch = 0.1;
};

// Limits a caller asserts about a black-box g. Reported, never trusted.
struct DeclaredLimits {
  std::optional<double> x_g_at_zero;
  std::optional<bool> blows_up_at_right_endpoint;
};

struct Custom {
  std::function<double(double)> g;
  std::string label = "custom";
  std::optional<DeclaredLimits> declared;
};

using DriftFamily = std::variant<PowerLaw, PatchedPowerLaw, Custom>;

// Power-law behaviour g ~ p / (1 - delta - z)^q near the right endpoint.
struct PowerTail {
  double p;
  double q;
};

class DriftSpec {
 public:
  // Throws ParameterError unless delta in (0, 1/2) and family parameters are
  // in range.
  DriftSpec(double delta, DriftFamily family);

  static DriftSpec power_law(double delta, double p, double q);
  static DriftSpec patched(double delta, double p, double q, double c,
                           double x_switch);
  static DriftSpec custom(double delta, std::function<double(double)> g,
                          std::string label = "custom",
                          std::optional<DeclaredLimits> declared = {});

  double delta() const { return delta_; }
  double right_endpoint() const { return 1.0 - delta_; }
  const DriftFamily& family() const { return family_; }
  std::string family_name() const;

  // Closed-form tail for the built-in families; empty for Custom.
  std::optional<PowerTail> power_tail() const;

  // Upper end of the linear bridge of a PatchedPowerLaw (NaN otherwise).
  double bridge_end() const { return bridge_end_; }

  // Family formula without domain checks or clamping.
  double raw(double x) const;

 private:
  double delta_;
  DriftFamily family_;
  double bridge_end_;
  double bridge_left_value_ = 0.0;
  double bridge_right_value_ = 0.0;
};

inline constexpr double kEvalGuard = 1e-12;

// g(x). Throws DomainError unless 0 < x < 1 - delta, EvaluationError if a
// custom g returns a non-finite value. Inputs are clamped into
// [1e-12, 1 - delta - 1e-12] before the family formula is applied.
double g_eval(const DriftSpec& spec, double x);

// g at x clamped into [1e-12, 1 - delta - 1e-12], never throwing a domain
// error. `clamped` reports whether x lay outside that band.
double g_eval_clamped(const DriftSpec& spec, double x, bool* clamped = nullptr);

// psi(s) = s (-g(s) + 1/2) - s^2.
double psi(const DriftSpec& spec, double s);
double psi_clamped(const DriftSpec& spec, double s, bool* clamped = nullptr);

// A2(x) = 1 / (x (1 - x)); A1(x) = 2 / (1 + 1/(n-1)) * A2(x).
double coefficient_A2(double x);
double coefficient_A1(double x, int n);

struct CriterionConstants {
  int n;
  double a1;
  double a2;
  double x0;
};

// a1 = A1(1 - delta), a2 = A2(1 - delta), x0 = 1/2.
CriterionConstants A_coeffs(int n, double delta);

struct AdmissibilityReport {
  bool continuous = false;
  bool blows_up_at_right_endpoint = false;
  bool boundedness_at_zero = false;
  // true when the flags come from grid sampling of a black-box g
  bool sampled = false;
  // estimates (exact for built-in families) of liminf / limsup of x g(x) as x -> 0
  double x_g_liminf = 0.0;
  double x_g_limsup = 0.0;
  std::string note;

  bool admissible() const { return continuous && blows_up_at_right_endpoint; }
};

AdmissibilityReport check_admissible(const DriftSpec& spec);

}  // namespace divmkt
