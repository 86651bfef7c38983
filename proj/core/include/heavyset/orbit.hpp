#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "heavyset/exact_scalar.hpp"
#include "heavyset/group.hpp"
#include "heavyset/target_set.hpp"

namespace heavyset {

/// Exact sign of the Birkhoff deficit hits - steps * level.
///
/// When the level's parts fit machine words the test runs on 128-bit integer
/// cross-multiplication; anything larger falls back to ExactScalar.
class LevelComparator {
 public:
  explicit LevelComparator(ExactScalar level);

  const ExactScalar& level() const { return level_; }
  int sign(std::uint64_t hits, std::uint64_t steps) const;
  /// S > 0, i.e. hits > steps * level.
  bool exceeds(std::uint64_t hits, std::uint64_t steps) const { return sign(hits, steps) > 0; }
  ExactScalar partial_sum(std::uint64_t hits, std::uint64_t steps) const;

 private:
  ExactScalar level_;
  bool lowered_ = false;
  std::int64_t num_a_ = 0;  // level = (num_a + num_b sqrt(D)) / den
  std::int64_t num_b_ = 0;
  std::int64_t den_ = 1;
  std::int64_t radicand_ = 0;
};

/// Orbit x, x+g, x+2g, ... of a translation together with exact membership
/// in a target set.
///
/// On the torus every coordinate is lowered to (u + w sqrt(D)) / L over one
/// common denominator L and stepped in 64-bit integers; on Z_p (p^m < 2^62)
/// points are residues mod p^m. A point whose orbit would leave the safe
/// integer range over the requested horizon is evaluated through the generic
/// ExactScalar path instead. Both paths are exact.
class OrbitEngine {
 public:
  OrbitEngine(const TargetSet& set, const GroupPoint& step);
  ~OrbitEngine();
  OrbitEngine(OrbitEngine&&) noexcept;
  OrbitEngine& operator=(OrbitEngine&&) noexcept;

  const TargetSet& set() const;
  const GroupPoint& step() const;
  /// Whether the integer fast path is available for this set and step.
  bool lowered() const;

  /// chi_A(x + j g) for j = 0..n-1.
  std::vector<std::uint8_t> chi(const GroupPoint& x, std::size_t n) const;
  /// First j in 1..n with hits_j - j*level <= 0, or nullopt if x survives.
  std::optional<std::size_t> first_failure(const GroupPoint& x, std::size_t n,
                                           const LevelComparator& level) const;
  /// Same as first_failure for every point of the resolution-R grid;
  /// entry i is the failure time or n + 1 when grid point i survives.
  std::vector<std::uint64_t> survival_grid(std::uint64_t resolution, std::size_t n,
                                           const LevelComparator& level, unsigned threads = 1,
                                           std::uint64_t cap = GroupSpace::kDefaultGridCap) const;
  /// Generic (ExactScalar) evaluation, for cross-checking the fast path.
  std::optional<std::size_t> first_failure_generic(const GroupPoint& x, std::size_t n,
                                                   const LevelComparator& level) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace heavyset
