#include "heavyset/group.hpp"

#include <algorithm>

#include "heavyset/errors.hpp"

namespace heavyset {

Integer PAdicPoint::value() const {
  Integer v = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) v = v * prime + *it;
  return v;
}

std::string to_string(const GroupPoint& x) {
  if (const auto* t = std::get_if<TorusPoint>(&x)) {
    if (t->coords.size() == 1) return t->coords[0].to_string();
    std::string out = "(";
    for (std::size_t i = 0; i < t->coords.size(); ++i) {
      if (i) out += "; ";
      out += t->coords[i].to_string();
    }
    return out + ")";
  }
  const auto& p = std::get<PAdicPoint>(x);
  std::string out = "[";
  for (std::size_t i = 0; i < p.digits.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(p.digits[i]);
  }
  return out + "]";
}

GroupSpace GroupSpace::torus(int dim) {
  if (dim < 1 || dim > 16) throw DomainError("torus dimension must be in [1, 16]");
  GroupSpace s;
  s.kind_ = GroupKind::torus;
  s.dim_ = dim;
  s.exponent_ = dim;
  s.c3_ = Rational(Integer(1) << dim);
  s.c4_ = s.c3_;
  return s;
}

GroupSpace GroupSpace::padic(std::uint32_t prime, std::size_t depth) {
  if (prime < 2) throw DomainError("p-adic prime must be >= 2");
  for (std::uint32_t f = 2; f * f <= prime; ++f) {
    if (prime % f == 0) throw DomainError("p-adic base " + std::to_string(prime) + " is not prime");
  }
  if (depth < 1 || depth > 4096) throw DomainError("p-adic depth must be in [1, 4096]");
  GroupSpace s;
  s.kind_ = GroupKind::padic;
  s.dim_ = 1;
  s.prime_ = prime;
  s.depth_ = depth;
  s.exponent_ = 1;
  s.c3_ = Rational(1, prime);
  s.c4_ = 1;
  return s;
}

Integer GroupSpace::modulus() const {
  if (!is_torus()) return boost::multiprecision::pow(Integer(prime_), static_cast<unsigned>(depth_));
  return 1;
}

std::string GroupSpace::describe() const {
  if (is_torus()) return "torus(d=" + std::to_string(dim_) + ")";
  return "padic(p=" + std::to_string(prime_) + ", m=" + std::to_string(depth_) + ")";
}

GroupPoint GroupSpace::zero() const {
  if (is_torus()) return TorusPoint{std::vector<ExactScalar>(dim_)};
  return PAdicPoint{prime_, std::vector<std::uint32_t>(depth_, 0)};
}

GroupPoint GroupSpace::torus_point(std::vector<ExactScalar> coords) const {
  if (!is_torus()) throw SpaceMismatch("torus_point on " + describe());
  if (static_cast<int>(coords.size()) != dim_) throw SpaceMismatch("coordinate count mismatch");
  for (auto& c : coords) c = c.mod1();
  return TorusPoint{std::move(coords)};
}

GroupPoint GroupSpace::padic_point(const Integer& value) const {
  if (is_torus()) throw SpaceMismatch("padic_point on " + describe());
  Integer v = value % modulus();
  if (v < 0) v += modulus();
  PAdicPoint out{prime_, std::vector<std::uint32_t>(depth_, 0)};
  for (std::size_t i = 0; i < depth_ && v != 0; ++i) {
    out.digits[i] = static_cast<std::uint32_t>(v % prime_);
    v /= prime_;
  }
  return out;
}

void GroupSpace::check(const GroupPoint& x) const {
  if (is_torus()) {
    const auto* t = std::get_if<TorusPoint>(&x);
    if (!t || static_cast<int>(t->coords.size()) != dim_) {
      throw SpaceMismatch("point " + to_string(x) + " is not in " + describe());
    }
    for (const auto& c : t->coords) {
      if (c.sign() < 0 || c >= ExactScalar(1)) {
        throw SpaceMismatch("torus coordinate outside [0,1): " + c.to_string());
      }
    }
    return;
  }
  const auto* p = std::get_if<PAdicPoint>(&x);
  if (!p || p->prime != prime_ || p->digits.size() != depth_) {
    throw SpaceMismatch("point " + to_string(x) + " is not in " + describe());
  }
  for (auto d : p->digits) {
    if (d >= prime_) throw SpaceMismatch("p-adic digit out of range");
  }
}

GroupPoint GroupSpace::translate(const GroupPoint& x, const GroupPoint& g) const {
  check(x);
  check(g);
  if (is_torus()) {
    const auto& a = std::get<TorusPoint>(x).coords;
    const auto& b = std::get<TorusPoint>(g).coords;
    TorusPoint out;
    out.coords.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ExactScalar s = a[i] + b[i];
      if (s >= ExactScalar(1)) s -= 1;
      out.coords.push_back(std::move(s));
    }
    return out;
  }
  const auto& a = std::get<PAdicPoint>(x).digits;
  const auto& b = std::get<PAdicPoint>(g).digits;
  PAdicPoint out{prime_, std::vector<std::uint32_t>(depth_)};
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < depth_; ++i) {
    const std::uint64_t s = std::uint64_t{a[i]} + b[i] + carry;
    out.digits[i] = static_cast<std::uint32_t>(s % prime_);
    carry = s / prime_;
  }
  return out;
}

GroupPoint GroupSpace::negate(const GroupPoint& x) const {
  check(x);
  if (is_torus()) {
    TorusPoint out = std::get<TorusPoint>(x);
    for (auto& c : out.coords) c = (-c).mod1();
    return out;
  }
  return padic_point(modulus() - std::get<PAdicPoint>(x).value());
}

ExactScalar GroupSpace::distance(const GroupPoint& x, const GroupPoint& y) const {
  check(x);
  check(y);
  if (is_torus()) {
    const auto& a = std::get<TorusPoint>(x).coords;
    const auto& b = std::get<TorusPoint>(y).coords;
    ExactScalar best = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const ExactScalar delta = (a[i] - b[i]).abs();
      best = max(best, min(delta, ExactScalar(1) - delta));
    }
    return best;
  }
  const auto& a = std::get<PAdicPoint>(x).digits;
  const auto& b = std::get<PAdicPoint>(y).digits;
  for (std::size_t v = 0; v < depth_; ++v) {
    if (a[v] != b[v]) {
      return ExactScalar(Rational(1, boost::multiprecision::pow(Integer(prime_), static_cast<unsigned>(v))));
    }
  }
  return 0;
}

ExactScalar GroupSpace::ball_measure(const ExactScalar& eps) const {
  if (eps.sign() <= 0) throw DomainError("ball radius must be positive");
  if (is_torus()) {
    const ExactScalar side = min(eps * 2, ExactScalar(1));
    return pow(side, static_cast<unsigned>(dim_));
  }
  if (eps >= ExactScalar(1)) return 1;
  // smallest n with p^-n <= eps
  Integer pn = 1;
  while (ExactScalar(Rational(1, pn)) > eps) pn *= prime_;
  return ExactScalar(Rational(1, pn));
}

std::size_t GroupSpace::padic_grid_level(std::uint64_t resolution) const {
  if (resolution < 1) throw DomainError("grid resolution must be >= 1");
  std::size_t level = 0;
  Integer size = 1;
  while (size < resolution && level < depth_) {
    size *= prime_;
    ++level;
  }
  return level;
}

std::uint64_t GroupSpace::grid_size(std::uint64_t resolution, std::uint64_t cap) const {
  if (resolution < 1) throw DomainError("grid resolution must be >= 1");
  Integer size;
  if (is_torus()) {
    size = boost::multiprecision::pow(Integer(resolution), static_cast<unsigned>(dim_));
  } else {
    size = boost::multiprecision::pow(Integer(prime_), static_cast<unsigned>(padic_grid_level(resolution)));
  }
  if (size > cap) {
    throw ResourceCap("grid of " + size.str() + " points exceeds cap " + std::to_string(cap));
  }
  return size.convert_to<std::uint64_t>();
}

GroupPoint GroupSpace::grid_point(std::uint64_t resolution, std::uint64_t index) const {
  if (is_torus()) {
    std::vector<ExactScalar> coords(dim_);
    for (int k = dim_ - 1; k >= 0; --k) {
      coords[k] = ExactScalar(Rational(static_cast<long long>(index % resolution),
                                       static_cast<long long>(resolution)));
      index /= resolution;
    }
    return TorusPoint{std::move(coords)};
  }
  return padic_point(Integer(index));
}

std::vector<GroupPoint> GroupSpace::grid_points(std::uint64_t resolution, std::uint64_t cap) const {
  const std::uint64_t n = grid_size(resolution, cap);
  std::vector<GroupPoint> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(grid_point(resolution, i));
  return out;
}

std::optional<std::uint64_t> GroupSpace::grid_index(std::uint64_t resolution,
                                                    const GroupPoint& x) const {
  check(x);
  if (is_torus()) {
    std::uint64_t index = 0;
    for (const auto& c : std::get<TorusPoint>(x).coords) {
      if (!c.is_rational()) return std::nullopt;
      const Rational scaled = c.rational_part() * resolution;
      if (denominator_of(scaled) != 1) return std::nullopt;
      index = index * resolution + numerator_of(scaled).convert_to<std::uint64_t>();
    }
    return index;
  }
  const std::size_t level = padic_grid_level(resolution);
  const auto& digits = std::get<PAdicPoint>(x).digits;
  for (std::size_t i = level; i < depth_; ++i) {
    if (digits[i] != 0) return std::nullopt;
  }
  return std::get<PAdicPoint>(x).value().convert_to<std::uint64_t>();
}

GroupPoint GroupSpace::random_point(std::mt19937_64& rng) const {
  if (is_torus()) {
    std::vector<ExactScalar> coords;
    coords.reserve(dim_);
    for (int k = 0; k < dim_; ++k) {
      const auto num = static_cast<long long>(rng() >> 32);
      coords.emplace_back(Rational(num, 1LL << 32));
    }
    return TorusPoint{std::move(coords)};
  }
  std::uniform_int_distribution<std::uint32_t> digit(0, prime_ - 1);
  PAdicPoint out{prime_, std::vector<std::uint32_t>(depth_)};
  for (auto& d : out.digits) d = digit(rng);
  return out;
}

RegularityCheck verify_regularity(const GroupSpace& space, std::span<const ExactScalar> eps_grid) {
  if (eps_grid.empty()) throw DomainError("empty eps grid");
  RegularityCheck out;
  out.pass = true;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const ExactScalar& eps = eps_grid[i];
    if (i > 0 && !(eps < eps_grid[i - 1])) throw DomainError("eps grid must be decreasing");
    const ExactScalar measure = space.ball_measure(eps);
    const ExactScalar ratio = measure / pow(eps, static_cast<unsigned>(space.exponent()));
    if (i == 0) {
      out.c3_observed = ratio;
      out.c4_observed = ratio;
    } else {
      out.c3_observed = min(out.c3_observed, ratio);
      out.c4_observed = max(out.c4_observed, ratio);
    }
    if (ratio < ExactScalar(space.c3()) || ratio > ExactScalar(space.c4())) out.pass = false;
    out.samples.push_back({eps, measure, ratio});
  }
  return out;
}

}  // namespace heavyset
