#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heavyset/exact_scalar.hpp"
#include "heavyset/group.hpp"
#include "heavyset/target_set.hpp"

namespace heavyset {

/// exact_1d: maximum packing on the circle (sort and sweep over every start).
/// greedy: maximal packing by bucketed insertion, d >= 2.
/// exact_ultrametric: maximum packing in Z_p (one point per residue class).
enum class PackingMethod { exact_1d, greedy, exact_ultrametric };

std::string to_string(PackingMethod m);

struct PackingResult {
  Rational eps;
  std::size_t count = 0;
  PackingMethod method = PackingMethod::exact_1d;
  std::vector<std::size_t> selected;  // indices into the input, ascending
};

/// Largest (or, for greedy, a maximal) subset whose points are pairwise at
/// distance >= 2 eps.
PackingResult packing_number(const GroupSpace& space, std::span<const GroupPoint> points,
                             const Rational& eps);

/// Same for grid points given by ascending grid indices at resolution R.
/// Requires grid spacing <= eps / 4 so the grid cannot inflate the count.
PackingResult packing_number_grid(const GroupSpace& space, std::uint64_t resolution,
                                  std::span<const std::uint64_t> indices, const Rational& eps);

struct ScaleSample {
  Rational eps;
  std::size_t count = 0;
};

/// Least-squares and consecutive-pair slopes of log N against -log eps.
struct DimensionEstimate {
  std::vector<std::pair<double, double>> samples;  // (-log eps, log N)
  double slope = 0.0;
  double min_slope = 0.0;  // lower-dimension proxy
  double max_slope = 0.0;  // upper-dimension proxy
  double r2 = 0.0;
  std::vector<double> ratios;  // log N / -log eps (NaN at eps = 1)
};

DimensionEstimate dimension_estimate(std::span<const ScaleSample> series);

struct ContentEstimate {
  double s = 0.0;
  std::vector<std::pair<Rational, double>> samples;  // (eps, growth / eps^(d - s))
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double last_ratio = 0.0;
};

/// (mu(S_eps) - mu(S)) / eps^(d - s) over an eps grid, for an analytic set.
ContentEstimate content_estimate(const TargetSet& set, double s, std::span<const Rational> eps_grid);

/// The same for a finite point set, dilated exactly as a union of balls.
ContentEstimate content_estimate(const GroupSpace& space, std::span<const GroupPoint> points,
                                 double s, std::span<const Rational> eps_grid);

}  // namespace heavyset
