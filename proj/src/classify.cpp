#include "divmkt/classify.hpp"

#include <cmath>

#include "divmkt/errors.hpp"

namespace divmkt {

std::string to_string(DiversityStatus s) {
  switch (s) {
    case DiversityStatus::Diverse: return "Diverse";
    case DiversityStatus::NotDiverse: return "NotDiverse";
    case DiversityStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

constexpr double kReference = 0.5;

Preconditions check_preconditions(int n, const DriftSpec& spec) {
  const AdmissibilityReport adm = check_admissible(spec);
  Preconditions pre;
  pre.admissible = adm.admissible();
  pre.boundedness_required = n >= 3;
  pre.boundedness_at_zero = adm.boundedness_at_zero;
  pre.sampled = adm.sampled;
  return pre;
}

bool preconditions_hold(const Preconditions& pre) {
  return pre.admissible && (!pre.boundedness_required || pre.boundedness_at_zero);
}

}  // namespace

DiversityVerdict classify_diversity(int n, const DriftSpec& spec, Route route) {
  if (n < 2) throw ParameterError("n must be at least 2");
  DiversityVerdict out;
  out.preconditions = check_preconditions(n, spec);
  if (!preconditions_hold(out.preconditions)) {
    out.rule = "PreconditionFail";
    return out;
  }

  if (n == 2) {
    DivergenceVerdict v = criterion_integral(spec, Coefficient::A2, 2, kReference, route);
    out.rule = "Thm1-iff";
    if (v.status == Divergence::Divergent) out.status = DiversityStatus::Diverse;
    else if (v.status == Divergence::Convergent) out.status = DiversityStatus::NotDiverse;
    out.evidence.push_back({"criterion[A2]", std::move(v)});
    return out;
  }

  DivergenceVerdict upper = criterion_integral(spec, Coefficient::A2, n, kReference, route);
  DivergenceVerdict lower = criterion_integral(spec, Coefficient::A1, n, kReference, route);
  if (upper.status == Divergence::Divergent) {
    out.status = DiversityStatus::Diverse;
    out.rule = "Thm2-ii";
  } else if (lower.status == Divergence::Convergent) {
    out.status = DiversityStatus::NotDiverse;
    out.rule = "Thm2-i";
  } else {
    out.rule = "Gap";
  }
  out.evidence.push_back({"criterion[A2]", std::move(upper)});
  out.evidence.push_back({"criterion[A1]", std::move(lower)});
  return out;
}

DiversityVerdict classify_by_corollary(int n, const DriftSpec& spec, Route route) {
  if (n < 2) throw ParameterError("n must be at least 2");
  const CriterionConstants k = A_coeffs(n, spec.delta());
  const std::string tag = n == 2 ? "Cor1-" : "Cor2-";
  DiversityVerdict out;
  out.preconditions = check_preconditions(n, spec);
  if (!preconditions_hold(out.preconditions)) {
    out.rule = "PreconditionFail";
    return out;
  }

  DivergenceVerdict g_int = integral_of_g(spec, kReference, route);
  const Divergence g_status = g_int.status;
  out.evidence.push_back({"integral_of_g", std::move(g_int)});

  if (g_status == Divergence::Convergent) {
    out.status = DiversityStatus::NotDiverse;
    out.rule = tag + "iii";
    return out;
  }
  if (g_status != Divergence::Divergent) {
    out.rule = "Cor-none";
    return out;
  }

  for (int j = 1; j <= 20; ++j) {
    const double alpha = k.a2 - std::ldexp(k.a2, -j);
    DivergenceVerdict v = scaled_exp_integral(spec, alpha, kReference, route);
    if (v.status == Divergence::Divergent) {
      out.status = DiversityStatus::Diverse;
      out.rule = tag + "i";
      out.evidence.push_back({"scaled_exp[a2-eps]", std::move(v)});
      return out;
    }
  }

  const double not_diverse_coefficient = n == 2 ? k.a2 : k.a1;
  DivergenceVerdict v = scaled_exp_integral(spec, not_diverse_coefficient, kReference, route);
  if (v.status == Divergence::Convergent) {
    out.status = DiversityStatus::NotDiverse;
    out.rule = tag + "ii";
  } else {
    out.rule = "Cor-none";
  }
  out.evidence.push_back({n == 2 ? "scaled_exp[a2]" : "scaled_exp[a1]", std::move(v)});
  return out;
}

DiversityVerdict golden_decision_table(int n, double delta, double p, double q) {
  const CriterionConstants k = A_coeffs(n, delta);
  if (!(p > 0.0) || !(q > 0.0)) throw ParameterError("p and q must be positive");
  DiversityVerdict out;
  out.preconditions.admissible = true;
  out.preconditions.boundedness_required = n >= 3;
  out.preconditions.boundedness_at_zero = n >= 3;
  const std::string tag = n == 2 ? "Table-n2-" : "Table-n3+-";
  // p >= threshold, up to rounding of the threshold itself
  auto at_least = [](double p, double threshold) {
    return p >= threshold * (1.0 - kCriticalSlack);
  };

  if (std::abs(q - 1.0) > 1e-12) {
    out.status = q < 1.0 ? DiversityStatus::NotDiverse : DiversityStatus::Diverse;
    out.rule = tag + (q < 1.0 ? "q<1" : "q>1");
    return out;
  }
  if (n == 2) {
    out.status = at_least(p, delta * (1.0 - delta)) ? DiversityStatus::Diverse
                                                    : DiversityStatus::NotDiverse;
    out.rule = tag + "q=1";
    return out;
  }
  if (!at_least(p, 1.0 / k.a1)) {
    out.status = DiversityStatus::NotDiverse;
    out.rule = tag + "p<1/a1";
  } else if (at_least(p, 1.0 / k.a2)) {
    out.status = DiversityStatus::Diverse;
    out.rule = tag + "p>=1/a2";
  } else {
    out.rule = "Gap";
  }
  return out;
}

}  // namespace divmkt
