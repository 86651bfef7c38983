#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heavyset/diophantine.hpp"
#include "heavyset/exact_scalar.hpp"
#include "heavyset/group.hpp"
#include "heavyset/orbit.hpp"
#include "heavyset/target_set.hpp"

namespace heavyset {

/// Which deficit sequence a trace follows: X against A at level mu(A),
/// Y against A_eps at the rational level p/q, Z against A_eps at mu(A_eps).
enum class Variant { X, Y, Z };

std::string to_string(Variant v);

struct DeficitTrace {
  GroupPoint start;
  GroupPoint step;
  std::size_t horizon = 0;
  Variant variant = Variant::X;
  std::optional<std::size_t> stage;
  ExactScalar level;
  std::vector<std::uint8_t> chi;   // chi(x + j g), j = 0..n-1
  std::vector<ExactScalar> sums;   // S_1..S_n
};

struct HeavyVerdict {
  bool heavy = false;
  std::optional<std::size_t> first_failure;  // 1-based j with S_j <= 0
  ExactScalar min_partial_sum;                // over the full horizon
};

/// S_j = sum_{i<j} (chi_A(x + i g) - level), j = 1..n, in exact arithmetic
/// along the orbit produced by repeated translation.
DeficitTrace deficit_trace(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                           const ExactScalar& level, std::size_t n, Variant variant = Variant::X);

HeavyVerdict verdict_of(const DeficitTrace& trace);

/// Whether every partial sum S_1..S_n is strictly positive.
HeavyVerdict is_heavy(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                      const ExactScalar& level, std::size_t n);

/// One stage of the proof schedule built from a below-approximant p/q:
/// n = floor(q^(2k/(d - psi))) and eps the largest rational below n^(-1/2)
/// with denominator at most q^2 (exactly 1/sqrt(n) when n is a square).
struct Schedule {
  std::size_t index = 0;
  Integer p;
  Integer q;
  unsigned k = 2;
  Rational psi;
  int d = 1;
  Rational exponent;      // 2k / (d - psi); zero for explicit horizons
  double n_exact = 0.0;   // q^exponent before flooring
  Integer n;
  Rational eps;
  bool eps_exact = false;  // eps == n^(-1/2) exactly
  Rational level;          // p / q
  std::size_t horizon() const { return n.convert_to<std::size_t>(); }
};

std::vector<Schedule> make_schedule(const BelowApprox& seq, const Rational& psi, int d);

/// Schedule for a rational measure p/q: the configured horizons n_i with
/// eps_i the best rational below n_i^(-1/2) (denominator at most n_i) and
/// level p/q itself.
std::vector<Schedule> make_rational_schedule(const Rational& measure,
                                             const std::vector<Integer>& horizons, int d);

/// The eps envelope used by both schedule builders.
Rational schedule_eps(const Integer& n, const Integer& max_den, bool* exact = nullptr);

/// Verdict for the dilated set A_eps at level p/q over horizon n. A dilation
/// that covers the group is heavy for every x.
HeavyVerdict h_y_verdict(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                         const Schedule& sched);

/// Fraction of resolution-R grid points satisfying the predicate.
Rational measure_estimate(const std::function<bool(const GroupPoint&)>& predicate,
                          const GroupSpace& space, std::uint64_t resolution,
                          std::uint64_t cap = GroupSpace::kDefaultGridCap);

struct DistinctSums {
  std::size_t count = 0;
  bool separated = false;  // consecutive distinct values at least 1/q apart
};

/// Everything that one schedule stage needs for a fixed target and step:
/// the dilated set, the three orbit engines and exact level comparators.
class Stage {
 public:
  Stage(const TargetSet& a, const GroupPoint& g, Schedule sched);

  const Schedule& schedule() const { return sched_; }
  const TargetSet& target() const { return raw_.set(); }
  const TargetSet& dilated() const { return dilated_.set(); }
  const OrbitEngine& raw_engine() const { return raw_; }
  const OrbitEngine& dilated_engine() const { return dilated_; }
  const LevelComparator& x_level() const { return x_level_; }
  const LevelComparator& y_level() const { return y_level_; }
  const LevelComparator& z_level() const { return z_level_; }
  bool degenerate() const { return dilated_.set().is_full(); }
  std::size_t horizon() const { return sched_.horizon(); }
  const Rational& eps() const { return sched_.eps; }

  bool hx_heavy(const GroupPoint& x) const;
  bool hy_heavy(const GroupPoint& x) const;

  /// J(x) = #{j < n : x + j g in h_Y(n, g)} from one orbit of length 2n - 1.
  std::size_t j_count(const GroupPoint& x) const;
  /// Distinct values among the Y partial sums S_1..S_n of x.
  DistinctSums distinct_sums(const GroupPoint& x) const;

 private:
  Schedule sched_;
  OrbitEngine raw_;
  OrbitEngine dilated_;
  LevelComparator x_level_;
  LevelComparator y_level_;
  LevelComparator z_level_;
};

std::size_t j_count(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                    const Schedule& sched);
DistinctSums distinct_sums(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                           const Schedule& sched);

struct LoeveResult {
  std::size_t n = 0;
  std::size_t samples = 0;
  double lhs = 0.0;           // Monte-Carlo mean of (max_k |S_k|)^2
  double standard_error = 0.0;
  double rhs = 0.0;           // (log(4n)/log 2)^2 * n * gamma (1 - gamma)
  double rhs_quarter = 0.0;   // same with the variance bound 1/4
  bool pass = false;          // lhs <= rhs + 3 standard errors
};

/// Maximal inequality for Z_j = chi_B(x + j g) - mu(B), B = A or A_eps,
/// over uniformly drawn (x, g).
LoeveResult loeve_check(const TargetSet& a, const std::optional<Rational>& eps, std::size_t n,
                        std::size_t samples, std::uint64_t seed);

struct OrthogonalityPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double mean_product = 0.0;
  double standard_error = 0.0;
  double mean_i = 0.0;
  double mean_i_error = 0.0;
  bool pass = false;  // product and mean both within 4 standard errors of 0
};

struct OrthogonalityResult {
  std::vector<OrthogonalityPair> pairs;
  double max_abs = 0.0;
  bool pass = false;
};

/// Monte-Carlo E[Z_i Z_j] over (x, g) uniform in G x G, for Z built from
/// A_eps of the schedule stage.
OrthogonalityResult orthogonality_check(
    const TargetSet& a, const Schedule& sched,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t samples,
    std::uint64_t seed);

/// m g in the group (repeated translation, computed directly).
GroupPoint multiple(const GroupSpace& space, const GroupPoint& g, const Integer& m);

}  // namespace heavyset
