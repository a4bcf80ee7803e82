#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <utility>

#include "divmkt/feller.hpp"

namespace oracle {

// A1 / A2.
inline double a1_factor(int n) { return 2.0 / (1.0 + 1.0 / (n - 1.0)); }

// Antiderivative of p / (z (1 - z) (c - z)) with c = 1 - delta, from partial
// fractions: p [ ln z / c - ln(1 - z) / (c - 1) - ln(c - z) / (c (1 - c)) ].
inline double q1_inner_antiderivative(double p, double delta, double z) {
  const double c = 1.0 - delta;
  return p * (std::log(z) / c - std::log(1.0 - z) / (c - 1.0) - std::log(c - z) / (c * (1.0 - c)));
}

// Hit iff scale and I are both finite; no hit iff the scale is infinite, or
// finite with I infinite; anything unknown is undecided.
inline divmkt::HitVerdict feller_two_clause(divmkt::Finiteness phi, divmkt::Finiteness i) {
  using divmkt::Finiteness;
  using divmkt::HitVerdict;
  if (phi == Finiteness::Infinite) return HitVerdict::NoHitAS;
  if (phi == Finiteness::Finite && i == Finiteness::Infinite) return HitVerdict::NoHitAS;
  if (phi == Finiteness::Finite && i == Finiteness::Finite) return HitVerdict::HitsWithPositiveProb;
  return HitVerdict::Inconclusive;
}

// Wilson score interval, written out from its textbook formula.
inline std::pair<double, double> wilson(double k, double n, double z = 1.959963984540054) {
  const double ph = k / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  return {centre - half, centre + half};
}

// Standard normal CDF.
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
