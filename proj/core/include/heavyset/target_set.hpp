#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heavyset/exact_scalar.hpp"
#include "heavyset/group.hpp"

namespace heavyset {

/// Closed arc of the circle lifted to [0, 1]: 0 <= lo <= hi <= 1. An arc
/// ending at 1 also contains the point 0.
struct Arc {
  ExactScalar lo;
  ExactScalar hi;
  ExactScalar length() const { return hi - lo; }
  bool contains(const ExactScalar& y) const;
  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Axis-aligned closed box in [0, 1]^d (one lifted arc per axis).
struct Box {
  std::vector<Arc> sides;
  bool contains(const std::vector<ExactScalar>& y) const;
};

/// Closed (and open) ball of radius p^-level around a p-adic center.
struct PAdicBall {
  PAdicPoint center;
  std::size_t level = 0;
  bool contains(const PAdicPoint& y) const;
};

enum class TargetKind { intervals, boxes, padic_balls };

/// An interval (line) endpoint pair: [l, r] when l <= r (lengths >= 1 mean
/// the whole circle), or the wrapped arc [l, 1) u [0, r] when l > r.
using Endpoints = std::pair<ExactScalar, ExactScalar>;

/// Closed target set with exact membership, Haar measure, and max-norm
/// eps-dilation. Three families: interval unions on T^1, box unions on T^d,
/// and finite unions of balls in Z_p.
class TargetSet {
 public:
  static TargetSet intervals(const GroupSpace& space, const std::vector<Endpoints>& intervals);
  static TargetSet boxes(const GroupSpace& space, const std::vector<std::vector<Endpoints>>& boxes);
  static TargetSet padic_balls(const GroupSpace& space,
                               const std::vector<std::pair<Integer, std::size_t>>& balls);
  static TargetSet whole(const GroupSpace& space);

  const GroupSpace& space() const { return space_; }
  TargetKind kind() const { return kind_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<Box>& box_list() const { return boxes_; }
  const std::vector<PAdicBall>& balls() const { return balls_; }

  bool contains(const GroupPoint& x) const;
  const ExactScalar& measure() const { return measure_; }
  /// Closed set of measure one, i.e. the whole group.
  bool is_full() const { return measure_ == ExactScalar(1); }
  /// The eps-neighbourhood {x : dist(x, A) <= eps}.
  TargetSet dilate(const ExactScalar& eps) const;
  /// Upper Minkowski dimension of the boundary (analytic for every family).
  Rational boundary_dimension() const;
  /// Connected components on the circle (interval unions only).
  std::size_t circle_components() const;
  std::string describe() const;

 private:
  TargetSet(GroupSpace space, TargetKind kind) : space_(std::move(space)), kind_(kind) {}
  void normalize();

  GroupSpace space_;
  TargetKind kind_;
  std::vector<Arc> arcs_;
  std::vector<Box> boxes_;
  std::vector<PAdicBall> balls_;
  ExactScalar measure_;
};

/// Boundary content certificate mu(A_eps) - mu(A) <= c1 eps^(d-s) on a grid.
struct ContentCertificate {
  Rational s;
  ExactScalar c1;  // smallest constant valid on the grid
  std::optional<ExactScalar> analytic_c1;
  ExactScalar eps_min;
  ExactScalar eps_max;
  std::vector<std::pair<ExactScalar, ExactScalar>> growth;  // (eps, mu(A_eps) - mu(A))
  /// Inequality holds with c1 (and with analytic_c1 when present) at every eps.
  bool holds = false;
};

/// Certificate at s = boundary_dimension(A) over a decreasing eps grid.
ContentCertificate content_certificate(const TargetSet& set, std::span<const ExactScalar> eps_grid);

/// The infinite-content fallback mu(A_eps) - mu(A) <= eps^(d - s - tau) on a
/// grid, compared in log space (the exponent is real).
bool content_fallback_holds(const TargetSet& set, std::span<const ExactScalar> eps_grid,
                            const Rational& s, double tau);

}  // namespace heavyset
