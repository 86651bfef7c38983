#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "heavyset/exact_scalar.hpp"

namespace heavyset {

/// Point of the d-torus R^d / Z^d; every coordinate lies in [0, 1).
struct TorusPoint {
  std::vector<ExactScalar> coords;
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// Point of Z_p truncated at depth m: base-p digits, least significant first.
struct PAdicPoint {
  std::uint32_t prime = 2;
  std::vector<std::uint32_t> digits;

  Integer value() const;
  friend bool operator==(const PAdicPoint&, const PAdicPoint&) = default;
};

using GroupPoint = std::variant<TorusPoint, PAdicPoint>;

std::string to_string(const GroupPoint& x);

enum class GroupKind { torus, padic };

/// A compact abelian group with an invariant metric and normalized Haar
/// measure obeying c3 eps^d <= mu(ball of radius eps) <= c4 eps^d.
///
/// Two instances: the d-torus under the max-norm (c3 = c4 = 2^d), and the
/// p-adic integers with |x| = p^-v(x), truncated at m digits (c3 = 1/p,
/// c4 = 1, d = 1). Points are only meaningful relative to their space, so
/// every operation lives here and validates its arguments.
class GroupSpace {
 public:
  static constexpr std::uint64_t kDefaultGridCap = std::uint64_t{1} << 26;

  static GroupSpace torus(int dim);
  static GroupSpace padic(std::uint32_t prime, std::size_t depth);

  GroupKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == GroupKind::torus; }
  int dim() const { return dim_; }
  std::uint32_t prime() const { return prime_; }
  std::size_t depth() const { return depth_; }
  /// Exponent d of the regularity law.
  int exponent() const { return exponent_; }
  const Rational& c3() const { return c3_; }
  const Rational& c4() const { return c4_; }
  /// p^depth for the p-adic instance.
  Integer modulus() const;
  std::string describe() const;

  friend bool operator==(const GroupSpace&, const GroupSpace&) = default;

  GroupPoint zero() const;
  /// Builds a torus point, reducing each coordinate mod 1.
  GroupPoint torus_point(std::vector<ExactScalar> coords) const;
  /// Builds the p-adic point with the given integer value (mod p^depth).
  GroupPoint padic_point(const Integer& value) const;
  /// Throws SpaceMismatch unless x is a valid point of this space.
  void check(const GroupPoint& x) const;

  GroupPoint translate(const GroupPoint& x, const GroupPoint& g) const;
  GroupPoint negate(const GroupPoint& x) const;
  ExactScalar distance(const GroupPoint& x, const GroupPoint& y) const;
  /// Haar measure of the closed ball of radius eps > 0.
  ExactScalar ball_measure(const ExactScalar& eps) const;

  /// Number of points in the resolution-R grid.
  std::uint64_t grid_size(std::uint64_t resolution, std::uint64_t cap = kDefaultGridCap) const;
  /// Digit level of the p-adic grid: min(m, ceil(log_p R)).
  std::size_t padic_grid_level(std::uint64_t resolution) const;
  GroupPoint grid_point(std::uint64_t resolution, std::uint64_t index) const;
  std::vector<GroupPoint> grid_points(std::uint64_t resolution,
                                      std::uint64_t cap = kDefaultGridCap) const;
  /// Index of x in the resolution-R grid, if x is a grid point.
  std::optional<std::uint64_t> grid_index(std::uint64_t resolution, const GroupPoint& x) const;
  /// Uniform sample: dyadic coordinates with 32 fractional bits on the
  /// torus, uniform digits on Z_p.
  GroupPoint random_point(std::mt19937_64& rng) const;

 private:
  GroupKind kind_ = GroupKind::torus;
  int dim_ = 1;
  std::uint32_t prime_ = 0;
  std::size_t depth_ = 0;
  int exponent_ = 1;
  Rational c3_ = 2;
  Rational c4_ = 2;
};

struct RegularitySample {
  ExactScalar eps;
  ExactScalar measure;
  ExactScalar ratio;  // measure / eps^d
};

struct RegularityCheck {
  std::vector<RegularitySample> samples;
  ExactScalar c3_observed;  // min ratio
  ExactScalar c4_observed;  // max ratio
  bool pass = false;        // c3 <= every ratio <= c4
};

/// Checks c3 eps^d <= ball_measure(eps) <= c4 eps^d on a decreasing grid.
RegularityCheck verify_regularity(const GroupSpace& space, std::span<const ExactScalar> eps_grid);

}  // namespace heavyset
