#include "heavyset/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "heavyset/errors.hpp"

namespace heavyset {

namespace {

double neg_log(const Rational& eps) {
  return log_of(denominator_of(eps)) - log_of(numerator_of(eps));
}

// Maximum subset of sorted circle positions (circumference `one`) whose
// consecutive gaps, including the wrap-around gap, are all >= sep. Requires
// 0 < sep <= one / 2. Greedy from a fixed start is optimal among packings
// containing that start; binary lifting runs it from every start.
template <class T>
std::vector<std::size_t> circle_packing(const std::vector<T>& pos, const T& one, const T& sep) {
  const std::size_t n = pos.size();
  if (n <= 1) {
    std::vector<std::size_t> out;
    if (n == 1) out.push_back(0);
    return out;
  }
  std::vector<T> ext(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    ext[i] = pos[i];
    ext[i + n] = pos[i] + one;
  }
  const std::size_t end = 2 * n;
  std::size_t levels = 1;
  while ((std::size_t{1} << levels) < n) ++levels;
  std::vector<std::vector<std::size_t>> up(levels + 1, std::vector<std::size_t>(end + 1, end));
  std::size_t j = 0;
  for (std::size_t i = 0; i < end; ++i) {
    j = std::max(j, i + 1);
    while (j < end && ext[j] - ext[i] < sep) ++j;
    up[0][i] = j;
  }
  for (std::size_t k = 1; k <= levels; ++k) {
    for (std::size_t i = 0; i <= end; ++i) up[k][i] = up[k - 1][up[k - 1][i]];
  }

  std::size_t best_start = 0;
  std::size_t best_count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const T limit = ext[s] + one - sep;
    std::size_t cur = s;
    std::size_t count = 1;
    for (std::size_t k = levels + 1; k-- > 0;) {
      const std::size_t c = up[k][cur];
      if (c < end && ext[c] <= limit) {
        cur = c;
        count += std::size_t{1} << k;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_start = s;
    }
  }

  std::vector<std::size_t> out{best_start};
  const T limit = ext[best_start] + one - sep;
  std::size_t cur = up[0][best_start];
  while (cur < end && ext[cur] <= limit) {
    out.push_back(cur % n);
    cur = up[0][cur];
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Greedy maximal packing with bucketed cells. `too_close(a, b)` decides
// whether two inputs violate the separation; cells(i) gives the cell of input
// i on a cyclic grid of `per_axis` cells per axis, wide enough that violating
// pairs sit in neighbouring cells.
template <class CellOf, class TooClose>
std::vector<std::size_t> greedy_packing(std::size_t n, int dim, std::uint64_t per_axis,
                                        CellOf&& cell_of, TooClose&& too_close) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  std::vector<std::size_t> out;
  std::vector<std::int64_t> offsets;
  for (std::int64_t o = -1; o <= 1; ++o) {
    if (per_axis >= 3 || (o >= 0 && static_cast<std::uint64_t>(o) < per_axis)) offsets.push_back(o);
  }
  std::vector<std::uint64_t> cell(dim);
  std::vector<std::size_t> digit(dim);
  for (std::size_t i = 0; i < n; ++i) {
    cell_of(i, cell);
    bool free = true;
    std::size_t combos = 1;
    for (int k = 0; k < dim; ++k) combos *= offsets.size();
    for (std::size_t c = 0; c < combos && free; ++c) {
      std::size_t rest = c;
      std::uint64_t key = 0;
      for (int k = 0; k < dim; ++k) {
        const std::int64_t o = offsets[rest % offsets.size()];
        rest /= offsets.size();
        const auto m = static_cast<std::int64_t>(per_axis);
        const std::int64_t v = ((static_cast<std::int64_t>(cell[k]) + o) % m + m) % m;
        key = key * per_axis + static_cast<std::uint64_t>(v);
      }
      auto it = buckets.find(key);
      if (it == buckets.end()) continue;
      for (std::size_t other : it->second) {
        if (too_close(i, other)) {
          free = false;
          break;
        }
      }
    }
    if (!free) continue;
    std::uint64_t key = 0;
    for (int k = 0; k < dim; ++k) key = key * per_axis + cell[k];
    buckets[key].push_back(i);
    out.push_back(i);
  }
  return out;
}

void require_positive(const Rational& eps) {
  if (eps <= 0) throw DomainError("packing radius must be positive");
}

// Number of leading digits two Z_p points must share to be closer than 2 eps.
std::size_t ultrametric_level(const GroupSpace& space, const Rational& eps) {
  // separated iff p^-v >= 2 eps, v the valuation of the difference
  std::size_t level = 0;
  Rational dist = 1;
  while (level < space.depth() && dist >= 2 * eps) {
    ++level;
    dist /= space.prime();
  }
  return level;
}

}  // namespace

std::string to_string(PackingMethod m) {
  switch (m) {
    case PackingMethod::exact_1d: return "exact-1d";
    case PackingMethod::greedy: return "greedy";
    case PackingMethod::exact_ultrametric: return "exact-ultrametric";
  }
  return "?";
}

PackingResult packing_number(const GroupSpace& space, std::span<const GroupPoint> points,
                             const Rational& eps) {
  require_positive(eps);
  for (const auto& x : points) space.check(x);
  PackingResult r;
  r.eps = eps;
  if (points.empty()) return r;

  if (!space.is_torus()) {
    r.method = PackingMethod::exact_ultrametric;
    const Integer mod = boost::multiprecision::pow(Integer(space.prime()),
                                                   static_cast<unsigned>(ultrametric_level(space, eps)));
    std::map<Integer, std::size_t> first;
    for (std::size_t i = 0; i < points.size(); ++i) {
      first.emplace(std::get<PAdicPoint>(points[i]).value() % mod, i);
    }
    for (const auto& [residue, i] : first) r.selected.push_back(i);
    std::sort(r.selected.begin(), r.selected.end());
    r.count = r.selected.size();
    return r;
  }

  const ExactScalar sep(2 * eps);
  if (space.dim() == 1) {
    r.method = PackingMethod::exact_1d;
    if (2 * sep > ExactScalar(1)) {
      r.selected = {0};
    } else {
      std::vector<std::size_t> order(points.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      auto coord = [&](std::size_t i) -> const ExactScalar& {
        return std::get<TorusPoint>(points[i]).coords[0];
      };
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return coord(a) < coord(b); });
      std::vector<ExactScalar> pos;
      for (auto i : order) pos.push_back(coord(i));
      for (auto k : circle_packing(pos, ExactScalar(1), sep)) r.selected.push_back(order[k]);
      std::sort(r.selected.begin(), r.selected.end());
    }
    r.count = r.selected.size();
    return r;
  }

  r.method = PackingMethod::greedy;
  const Integer cells = std::max(Integer(1), floor_of(Rational(1) / (2 * eps)));
  const auto per_axis = cells.convert_to<std::uint64_t>();
  r.selected = greedy_packing(
      points.size(), space.dim(), per_axis,
      [&](std::size_t i, std::vector<std::uint64_t>& cell) {
        const auto& c = std::get<TorusPoint>(points[i]).coords;
        for (int k = 0; k < space.dim(); ++k) {
          cell[k] = std::min(per_axis - 1, (c[k] * ExactScalar(cells)).floor().convert_to<std::uint64_t>());
        }
      },
      [&](std::size_t a, std::size_t b) { return space.distance(points[a], points[b]) < sep; });
  r.count = r.selected.size();
  return r;
}

PackingResult packing_number_grid(const GroupSpace& space, std::uint64_t resolution,
                                  std::span<const std::uint64_t> indices, const Rational& eps) {
  require_positive(eps);
  PackingResult r;
  r.eps = eps;

  if (!space.is_torus()) {
    const std::size_t grid_level = space.padic_grid_level(resolution);
    const Rational spacing(Integer(1), boost::multiprecision::pow(Integer(space.prime()),
                                                                  static_cast<unsigned>(grid_level)));
    if (grid_level < space.depth() && spacing * 4 > eps) {
      throw DomainError("grid too coarse for packing at this radius");
    }
    r.method = PackingMethod::exact_ultrametric;
    if (indices.empty()) return r;
    const std::size_t level = std::min(ultrametric_level(space, eps), grid_level);
    std::uint64_t mod = 1;
    for (std::size_t i = 0; i < level; ++i) mod *= space.prime();
    std::map<std::uint64_t, std::size_t> first;
    for (std::size_t i = 0; i < indices.size(); ++i) first.emplace(indices[i] % mod, i);
    for (const auto& [residue, i] : first) r.selected.push_back(i);
    std::sort(r.selected.begin(), r.selected.end());
    r.count = r.selected.size();
    return r;
  }

  if (eps * resolution < 4) throw DomainError("grid too coarse for packing at this radius");
  // two grid coordinates are separated along an axis iff their cyclic index
  // gap is at least ceil(2 eps R)
  const auto sep = ceil_of(2 * eps * resolution).convert_to<std::int64_t>();
  const auto res = static_cast<std::int64_t>(resolution);
  const int dim = space.dim();
  if (indices.empty()) {
    r.method = dim == 1 ? PackingMethod::exact_1d : PackingMethod::greedy;
    return r;
  }

  if (dim == 1) {
    r.method = PackingMethod::exact_1d;
    if (2 * sep > res) {
      r.selected = {0};
    } else {
      std::vector<std::int64_t> pos(indices.begin(), indices.end());
      if (!std::is_sorted(pos.begin(), pos.end())) throw DomainError("grid indices must be ascending");
      r.selected = circle_packing(pos, res, sep);
    }
    r.count = r.selected.size();
    return r;
  }

  r.method = PackingMethod::greedy;
  const auto per_axis = static_cast<std::uint64_t>(std::max<std::int64_t>(1, res / sep));
  auto coord = [&](std::size_t i, int k) {
    std::uint64_t v = indices[i];
    for (int t = dim - 1; t > k; --t) v /= resolution;
    return static_cast<std::int64_t>(v % resolution);
  };
  r.selected = greedy_packing(
      indices.size(), dim, per_axis,
      [&](std::size_t i, std::vector<std::uint64_t>& cell) {
        for (int k = 0; k < dim; ++k) {
          cell[k] = std::min(per_axis - 1, static_cast<std::uint64_t>(coord(i, k) / sep));
        }
      },
      [&](std::size_t a, std::size_t b) {
        for (int k = 0; k < dim; ++k) {
          const std::int64_t gap = std::abs(coord(a, k) - coord(b, k));
          if (std::min(gap, res - gap) >= sep) return false;
        }
        return true;
      });
  r.count = r.selected.size();
  return r;
}

DimensionEstimate dimension_estimate(std::span<const ScaleSample> series) {
  if (series.size() < 2) throw DomainError("dimension estimate needs at least two scales");
  DimensionEstimate e;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].eps <= 0) throw DomainError("scales must be positive");
    if (series[i].count < 1) throw DomainError("packing counts must be at least 1");
    if (i > 0 && !(series[i].eps < series[i - 1].eps)) {
      throw DomainError("scales must be strictly decreasing");
    }
    const double x = neg_log(series[i].eps);
    const double y = std::log(static_cast<double>(series[i].count));
    e.samples.emplace_back(x, y);
    e.ratios.push_back(x > 0 ? y / x : std::numeric_limits<double>::quiet_NaN());
  }
  const double n = static_cast<double>(e.samples.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : e.samples) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : e.samples) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  e.slope = sxy / sxx;
  e.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  e.min_slope = std::numeric_limits<double>::infinity();
  e.max_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < e.samples.size(); ++i) {
    const double s = (e.samples[i].second - e.samples[i - 1].second) /
                     (e.samples[i].first - e.samples[i - 1].first);
    e.min_slope = std::min(e.min_slope, s);
    e.max_slope = std::max(e.max_slope, s);
  }
  return e;
}

ContentEstimate content_estimate(const TargetSet& set, double s, std::span<const Rational> eps_grid) {
  const int d = set.space().exponent();
  if (s > d) throw DomainError("content exponent s must not exceed d");
  ContentEstimate c;
  c.s = s;
  c.min_ratio = std::numeric_limits<double>::infinity();
  c.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& eps : eps_grid) {
    if (eps <= 0) throw DomainError("content radius must be positive");
    const ExactScalar growth = set.dilate(ExactScalar(eps)).measure() - set.measure();
    // growth / eps^(d-s), through logs so tiny radii stay finite
    const double ratio = growth.is_zero()
                             ? 0.0
                             : std::exp(growth.log_abs() + (d - s) * neg_log(eps));
    c.samples.emplace_back(eps, ratio);
    c.min_ratio = std::min(c.min_ratio, ratio);
    c.max_ratio = std::max(c.max_ratio, ratio);
    c.last_ratio = ratio;
  }
  return c;
}

ContentEstimate content_estimate(const GroupSpace& space, std::span<const GroupPoint> points,
                                 double s, std::span<const Rational> eps_grid) {
  if (points.empty()) throw DomainError("content of an empty point set");
  for (const auto& x : points) space.check(x);
  if (!space.is_torus()) {
    std::vector<std::pair<Integer, std::size_t>> balls;
    for (const auto& x : points) balls.emplace_back(std::get<PAdicPoint>(x).value(), space.depth());
    return content_estimate(TargetSet::padic_balls(space, balls), s, eps_grid);
  }
  if (space.dim() == 1) {
    std::vector<Endpoints> pts;
    for (const auto& x : points) {
      const auto& c = std::get<TorusPoint>(x).coords[0];
      pts.emplace_back(c, c);
    }
    return content_estimate(TargetSet::intervals(space, pts), s, eps_grid);
  }
  std::vector<std::vector<Endpoints>> boxes;
  for (const auto& x : points) {
    std::vector<Endpoints> sides;
    for (const auto& c : std::get<TorusPoint>(x).coords) sides.emplace_back(c, c);
    boxes.push_back(std::move(sides));
  }
  return content_estimate(TargetSet::boxes(space, boxes), s, eps_grid);
}

}  // namespace heavyset
