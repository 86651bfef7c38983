#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heavyset/exact_scalar.hpp"

namespace heavyset {

/// Continued fraction [a0; a1, a2, ...]. `quotients` holds the computed
/// prefix. A rational source gives a finite expansion; a quadratic
/// irrational gets a detected periodic tail that extends the prefix on demand.
struct ContinuedFraction {
  std::vector<Integer> quotients;
  bool finite = false;
  std::optional<std::size_t> period_start;
  std::size_t period_length = 0;

  bool periodic() const { return period_start.has_value(); }
  /// Number of quotients that can be produced (unbounded when periodic).
  std::size_t available() const;
  /// a_j, using the periodic tail beyond the stored prefix.
  const Integer& quotient(std::size_t j) const;
};

struct Convergent {
  Integer p;
  Integer q;
  friend bool operator==(const Convergent&, const Convergent&) = default;
};

/// First `count` partial quotients (a0 included) of 0 < gamma < 1.
ContinuedFraction cf_expand(const ExactScalar& gamma, std::size_t count);

/// The first n convergents p_j/q_j, j = 0..n-1.
std::vector<Convergent> convergents(const ContinuedFraction& cf, std::size_t n);

struct BelowEntry {
  Integer p;
  Integer q;
  ExactScalar gap;  // gamma - p/q
};

/// A certified one-sided approximation sequence: 0 <= gamma - p/q < c2/q^k.
struct BelowApprox {
  ExactScalar gamma;
  std::vector<BelowEntry> entries;
  Rational c2 = 1;
  unsigned k = 2;
  /// gamma is a finite truncation standing in for an irrational number.
  bool truncated_gamma = false;
  std::string source;

  /// Builds entries (and their gaps) from explicit fractions; no validation.
  static BelowApprox from_fractions(ExactScalar gamma, const std::vector<Convergent>& fractions,
                                    Rational c2, unsigned k, std::string source = "explicit");
  /// Every violated invariant, described; empty when the sequence certifies
  /// approximability from below to order k with constant c2.
  std::vector<std::string> violations() const;
};

/// Even-indexed convergents of an irrational gamma in (0,1); k = 2, c2 = 1.
BelowApprox below_sequence(const ExactScalar& gamma, std::size_t count);

struct OrderEstimate {
  double k_hat = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
  std::size_t used = 0;
  std::vector<std::string> warnings;
};

/// Least-squares fit of log(gap) = intercept - k log(q); diagnostic only.
OrderEstimate estimate_order(const BelowApprox& seq);

/// gamma = sum_{j=1..levels} base^-n_j with n_1 = 1, n_{j+1} = k n_j, returned
/// as its exact truncation, with the truncations p_j/q_j (q_j = base^n_j) as a
/// below-sequence certified with c2 = 2.
BelowApprox liouville_below(unsigned k, std::size_t levels, std::uint32_t base,
                            std::size_t max_bits = std::size_t{1} << 20);

/// Largest rational r <= x whose denominator is at most max_den.
Rational best_lower_rational(const ExactScalar& x, const Integer& max_den);

}  // namespace heavyset
