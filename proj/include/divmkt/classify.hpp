#pragma once

#include <string>
#include <vector>

#include "divmkt/feller.hpp"
#include "divmkt/model.hpp"

namespace divmkt {

enum class DiversityStatus { Diverse, NotDiverse, Inconclusive };

std::string to_string(DiversityStatus s);

struct NamedEvidence {
  std::string name;  // e.g. "criterion[A2]", "integral_of_g"
  DivergenceVerdict verdict;
};

struct Preconditions {
  bool admissible = false;
  bool boundedness_required = false;
  bool boundedness_at_zero = false;
  bool sampled = false;  // flags come from sampling a black-box g
};

struct DiversityVerdict {
  DiversityStatus status = DiversityStatus::Inconclusive;
  // "Thm1-iff", "Thm2-i", "Thm2-ii", "Gap", "PreconditionFail",
  // "Cor1-i" .. "Cor2-iii", "Cor-none"
  std::string rule;
  std::vector<NamedEvidence> evidence;
  Preconditions preconditions;
};

// The analytic verdict: two stocks use the exact criterion, n >= 3 the two
// one-sided sufficient conditions with the gap between them reported as
// Inconclusive. Never throws on an undecided sub-result.
DiversityVerdict classify_diversity(int n, const DriftSpec& spec, Route route = Route::Auto);

// The weaker corollary clauses, evaluated independently of the main
// criteria: (i) diverse via an epsilon-reduced constant a2, (ii) not diverse
// via a constant a2 (n = 2) or a1 (n >= 3), (iii) not diverse when g is integrable.
// Existence of epsilon is searched over a2 * 2^-k, k = 1..20.
DiversityVerdict classify_by_corollary(int n, const DriftSpec& spec, Route route = Route::Auto);

// Closed-form case analysis for the power families (no quadrature). For
// n >= 3 the patched family is assumed. Throws ParameterError like A_coeffs.
DiversityVerdict golden_decision_table(int n, double delta, double p, double q);

}  // namespace divmkt
