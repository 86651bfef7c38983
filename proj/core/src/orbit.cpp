#include "heavyset/orbit.hpp"

#include <algorithm>
#include <limits>

#include "heavyset/errors.hpp"
#include "heavyset/parallel.hpp"

namespace heavyset {

namespace {

using i64 = std::int64_t;
using u64 = std::uint64_t;
__extension__ typedef __int128 i128;
__extension__ typedef unsigned __int128 u128;

constexpr i64 kSafe = i64{1} << 61;
constexpr i64 kMaxDenominator = i64{1} << 52;

int sign_of(i128 v) { return (v > 0) - (v < 0); }

u128 abs128(i128 v) { return v < 0 ? static_cast<u128>(-v) : static_cast<u128>(v); }

// Sign of u + w sqrt(d); requires |u| < 2^63 and |w| sqrt(d) < 2^63.
int sign_quad(i64 u, i64 w, i64 d) {
  if (w == 0 || d == 0) return (u > 0) - (u < 0);
  const int su = (u > 0) - (u < 0);
  const int sw = (w > 0) - (w < 0);
  if (su == 0) return sw;
  if (su == sw) return su;
  const u128 uu = abs128(u) * abs128(u);
  const u128 ww = abs128(w) * abs128(w) * static_cast<u128>(d);
  return uu > ww ? su : sw;
}

i64 ceil_sqrt(i64 d) {
  if (d <= 0) return 0;
  i64 s = static_cast<i64>(integer_sqrt(Integer(d)).convert_to<long long>());
  if (s * s < d) ++s;
  return s;
}

// (u + w sqrt(D)) / L
struct Quad {
  i64 u = 0;
  i64 w = 0;
};

struct LatticeArc {
  Quad lo;
  Quad hi;
  bool ends_at_one = false;
};

// Common-denominator integer image of a torus target set and step.
struct TorusLattice {
  i64 scale = 1;     // L
  i64 radicand = 0;  // D
  i64 root_ceil = 0; // ceil(sqrt(D))
  i64 max_abs = 0;   // largest |u| or |w| sqrt(D) among set data
  std::vector<LatticeArc> arcs;                  // intervals
  std::vector<std::vector<LatticeArc>> boxes;    // boxes x dim
  std::vector<Quad> step;
  bool intervals = true;

  int cmp(const Quad& y, const Quad& v) const {
    return sign_quad(y.u - v.u, y.w - v.w, radicand);
  }

  bool in_arc(const Quad& y, const LatticeArc& a) const {
    if (cmp(y, a.lo) >= 0 && cmp(y, a.hi) <= 0) return true;
    return a.ends_at_one && y.u == 0 && y.w == 0;
  }

  bool contains(const std::vector<Quad>& y) const {
    if (intervals) {
      if (arcs.empty()) return false;
      const Quad& v = y[0];
      if (v.u == 0 && v.w == 0 && arcs.back().ends_at_one) return true;
      // last arc with lo <= v
      std::size_t lo = 0, hi = arcs.size();
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cmp(v, arcs[mid].lo) >= 0) lo = mid + 1;
        else hi = mid;
      }
      return lo > 0 && cmp(v, arcs[lo - 1].hi) <= 0;
    }
    for (const auto& box : boxes) {
      bool inside = true;
      for (std::size_t k = 0; k < box.size() && inside; ++k) inside = in_arc(y[k], box[k]);
      if (inside) return true;
    }
    return false;
  }

  void advance(std::vector<Quad>& y) const {
    for (std::size_t k = 0; k < y.size(); ++k) {
      y[k].u += step[k].u;
      y[k].w += step[k].w;
      if (sign_quad(y[k].u - scale, y[k].w, radicand) >= 0) y[k].u -= scale;
    }
  }

  // Whether n steps from `start` stay inside the safe integer range.
  bool safe_for(const std::vector<Quad>& start, std::size_t n) const {
    for (std::size_t k = 0; k < start.size(); ++k) {
      const i128 w = static_cast<i128>(std::abs(start[k].w)) +
                     static_cast<i128>(n + 1) * std::abs(step[k].w);
      const i128 reach = w * std::max<i64>(root_ceil, 1) + 4 * static_cast<i128>(scale) +
                         static_cast<i128>(std::abs(start[k].u)) + max_abs;
      if (reach >= kSafe) return false;
    }
    return true;
  }

  std::optional<Quad> lower(const ExactScalar& v) const {
    if (!v.is_rational() && v.radicand() != radicand) return std::nullopt;
    const Rational a = v.rational_part() * scale;
    const Rational b = v.radical_coefficient() * scale;
    if (denominator_of(a) != 1 || denominator_of(b) != 1) return std::nullopt;
    const Integer ua = numerator_of(a);
    const Integer wb = numerator_of(b);
    if (boost::multiprecision::abs(ua) >= kSafe || boost::multiprecision::abs(wb) >= kSafe) {
      return std::nullopt;
    }
    return Quad{ua.convert_to<i64>(), wb.convert_to<i64>()};
  }

  std::optional<std::vector<Quad>> lower_point(const TorusPoint& x) const {
    std::vector<Quad> out;
    for (const auto& c : x.coords) {
      auto q = lower(c);
      if (!q) return std::nullopt;
      out.push_back(*q);
    }
    return out;
  }
};

void collect(const ExactScalar& v, Integer& lcm, i64& radicand, bool& ok) {
  lcm = boost::multiprecision::lcm(lcm, denominator_of(v.rational_part()));
  lcm = boost::multiprecision::lcm(lcm, denominator_of(v.radical_coefficient()));
  if (!v.is_rational()) {
    if (radicand != 0 && radicand != v.radicand()) ok = false;
    radicand = v.radicand();
  }
}

std::optional<TorusLattice> build_torus_lattice(const TargetSet& set, const TorusPoint& step,
                                                const Integer& extra_den) {
  Integer lcm = extra_den;
  i64 radicand = 0;
  bool ok = true;
  auto visit_arc = [&](const Arc& a) {
    collect(a.lo, lcm, radicand, ok);
    collect(a.hi, lcm, radicand, ok);
  };
  for (const auto& a : set.arcs()) visit_arc(a);
  for (const auto& b : set.box_list()) {
    for (const auto& s : b.sides) visit_arc(s);
  }
  for (const auto& c : step.coords) collect(c, lcm, radicand, ok);
  if (!ok || lcm >= kMaxDenominator) return std::nullopt;

  TorusLattice lat;
  lat.scale = lcm.convert_to<i64>();
  lat.radicand = radicand;
  lat.root_ceil = ceil_sqrt(radicand);
  lat.intervals = set.kind() == TargetKind::intervals;
  auto lower_arc = [&](const Arc& a) -> std::optional<LatticeArc> {
    auto lo = lat.lower(a.lo);
    auto hi = lat.lower(a.hi);
    if (!lo || !hi) return std::nullopt;
    for (const Quad& q : {*lo, *hi}) {
      lat.max_abs = std::max({lat.max_abs, std::abs(q.u), std::abs(q.w) * std::max<i64>(lat.root_ceil, 1)});
    }
    return LatticeArc{*lo, *hi, a.hi == ExactScalar(1)};
  };
  for (const auto& a : set.arcs()) {
    auto la = lower_arc(a);
    if (!la) return std::nullopt;
    lat.arcs.push_back(*la);
  }
  for (const auto& b : set.box_list()) {
    std::vector<LatticeArc> sides;
    for (const auto& s : b.sides) {
      auto la = lower_arc(s);
      if (!la) return std::nullopt;
      sides.push_back(*la);
    }
    lat.boxes.push_back(std::move(sides));
  }
  for (const auto& c : step.coords) {
    auto q = lat.lower(c);
    if (!q) return std::nullopt;
    lat.step.push_back(*q);
  }
  if (lat.max_abs >= kSafe / 4) return std::nullopt;
  return lat;
}

// Residues mod p^m for the truncated p-adic integers.
struct PAdicLattice {
  u64 modulus = 0;
  u64 step = 0;
  std::vector<std::pair<u64, u64>> balls;  // (p^level, center mod p^level)

  bool contains(u64 y) const {
    for (const auto& [mod, residue] : balls) {
      if (y % mod == residue) return true;
    }
    return false;
  }

  u64 advance(u64 y) const {
    y += step;
    return y >= modulus ? y - modulus : y;
  }
};

std::optional<PAdicLattice> build_padic_lattice(const TargetSet& set, const PAdicPoint& step) {
  const Integer modulus = set.space().modulus();
  if (modulus >= Integer(kSafe)) return std::nullopt;
  PAdicLattice lat;
  lat.modulus = modulus.convert_to<u64>();
  lat.step = step.value().convert_to<u64>();
  for (const auto& b : set.balls()) {
    const Integer mod = boost::multiprecision::pow(Integer(set.space().prime()),
                                                   static_cast<unsigned>(b.level));
    lat.balls.emplace_back(mod.convert_to<u64>(), (b.center.value() % mod).convert_to<u64>());
  }
  return lat;
}

Integer torus_denominator(const TorusPoint& x) {
  Integer lcm = 1;
  for (const auto& c : x.coords) {
    lcm = boost::multiprecision::lcm(lcm, denominator_of(c.rational_part()));
    lcm = boost::multiprecision::lcm(lcm, denominator_of(c.radical_coefficient()));
  }
  return lcm;
}

}  // namespace

// ---- LevelComparator -------------------------------------------------------

LevelComparator::LevelComparator(ExactScalar level) : level_(std::move(level)) {
  const Integer den = boost::multiprecision::lcm(denominator_of(level_.rational_part()),
                                                 denominator_of(level_.radical_coefficient()));
  const Integer a = numerator_of(level_.rational_part() * den);
  const Integer b = numerator_of(level_.radical_coefficient() * den);
  const Integer limit = Integer(1) << 62;
  if (den < limit && boost::multiprecision::abs(a) < limit && boost::multiprecision::abs(b) < limit) {
    lowered_ = true;
    den_ = den.convert_to<i64>();
    num_a_ = a.convert_to<i64>();
    num_b_ = b.convert_to<i64>();
    radicand_ = level_.radicand();
  }
}

int LevelComparator::sign(std::uint64_t hits, std::uint64_t steps) const {
  constexpr std::uint64_t kSteps = std::uint64_t{1} << 40;
  if (lowered_ && steps < kSteps && hits <= steps) {
    const i128 p = static_cast<i128>(hits) * den_ - static_cast<i128>(steps) * num_a_;
    const i128 q = -static_cast<i128>(steps) * num_b_;
    if (q == 0 || radicand_ == 0) return sign_of(p);
    const int sp = sign_of(p);
    const int sq = sign_of(q);
    if (sp == 0) return sq;
    if (sp == sq) return sp;
    const u128 ap = abs128(p);
    const u128 aq = abs128(q);
    const u128 bound = u128{1} << 63;
    const u128 root = static_cast<u128>(ceil_sqrt(radicand_));
    if (ap < bound && aq * root < bound) {
      const u128 pp = ap * ap;
      const u128 qq = aq * aq * static_cast<u128>(radicand_);
      return pp > qq ? sp : sq;
    }
  }
  return partial_sum(hits, steps).sign();
}

ExactScalar LevelComparator::partial_sum(std::uint64_t hits, std::uint64_t steps) const {
  return ExactScalar(Integer(hits)) - ExactScalar(Integer(steps)) * level_;
}

// ---- OrbitEngine -----------------------------------------------------------

struct OrbitEngine::Impl {
  TargetSet set;
  GroupPoint step;
  std::optional<TorusLattice> torus;
  std::optional<PAdicLattice> padic;

  template <class Visit>
  void walk_generic(const GroupPoint& x, std::size_t n, Visit&& visit) const {
    const GroupSpace& space = set.space();
    GroupPoint y = x;
    for (std::size_t j = 0; j < n; ++j) {
      if (!visit(set.contains(y))) return;
      y = space.translate(y, step);
    }
  }

  template <class Visit>
  static void walk_torus(const TorusLattice& lat, std::vector<Quad> y, std::size_t n, Visit&& visit) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!visit(lat.contains(y))) return;
      lat.advance(y);
    }
  }

  template <class Visit>
  void walk(const GroupPoint& x, std::size_t n, Visit&& visit) const {
    set.space().check(x);
    if (torus) {
      const auto& tx = std::get<TorusPoint>(x);
      const Integer den = torus_denominator(tx);
      if (torus->scale % den == 0) {
        auto start = torus->lower_point(tx);
        if (start && torus->safe_for(*start, n)) {
          walk_torus(*torus, std::move(*start), n, visit);
          return;
        }
      } else if (auto lat = build_torus_lattice(set, std::get<TorusPoint>(step), den)) {
        auto start = lat->lower_point(tx);
        if (start && lat->safe_for(*start, n)) {
          walk_torus(*lat, std::move(*start), n, visit);
          return;
        }
      }
    } else if (padic) {
      u64 y = std::get<PAdicPoint>(x).value().convert_to<u64>();
      for (std::size_t j = 0; j < n; ++j) {
        if (!visit(padic->contains(y))) return;
        y = padic->advance(y);
      }
      return;
    }
    walk_generic(x, n, visit);
  }
};

OrbitEngine::OrbitEngine(const TargetSet& set, const GroupPoint& step)
    : impl_(std::make_unique<Impl>(Impl{set, step, std::nullopt, std::nullopt})) {
  set.space().check(step);
  if (set.space().is_torus()) {
    impl_->torus = build_torus_lattice(set, std::get<TorusPoint>(step), Integer(1));
  } else {
    impl_->padic = build_padic_lattice(set, std::get<PAdicPoint>(step));
  }
}

OrbitEngine::~OrbitEngine() = default;
OrbitEngine::OrbitEngine(OrbitEngine&&) noexcept = default;
OrbitEngine& OrbitEngine::operator=(OrbitEngine&&) noexcept = default;

const TargetSet& OrbitEngine::set() const { return impl_->set; }
const GroupPoint& OrbitEngine::step() const { return impl_->step; }
bool OrbitEngine::lowered() const { return impl_->torus.has_value() || impl_->padic.has_value(); }

std::vector<std::uint8_t> OrbitEngine::chi(const GroupPoint& x, std::size_t n) const {
  std::vector<std::uint8_t> out;
  out.reserve(n);
  impl_->walk(x, n, [&](bool in) {
    out.push_back(in ? 1 : 0);
    return true;
  });
  return out;
}

std::optional<std::size_t> OrbitEngine::first_failure(const GroupPoint& x, std::size_t n,
                                                      const LevelComparator& level) const {
  std::optional<std::size_t> failure;
  std::uint64_t hits = 0;
  std::size_t j = 0;
  impl_->walk(x, n, [&](bool in) {
    hits += in ? 1 : 0;
    ++j;
    if (!level.exceeds(hits, j)) {
      failure = j;
      return false;
    }
    return true;
  });
  return failure;
}

std::optional<std::size_t> OrbitEngine::first_failure_generic(const GroupPoint& x, std::size_t n,
                                                              const LevelComparator& level) const {
  impl_->set.space().check(x);
  std::optional<std::size_t> failure;
  ExactScalar sum = 0;
  std::size_t j = 0;
  impl_->walk_generic(x, n, [&](bool in) {
    sum += ExactScalar(in ? 1 : 0) - level.level();
    ++j;
    if (sum.sign() <= 0) {
      failure = j;
      return false;
    }
    return true;
  });
  return failure;
}

std::vector<std::uint64_t> OrbitEngine::survival_grid(std::uint64_t resolution, std::size_t n,
                                                      const LevelComparator& level, unsigned threads,
                                                      std::uint64_t cap) const {
  const GroupSpace& space = impl_->set.space();
  const std::uint64_t size = space.grid_size(resolution, cap);
  std::vector<std::uint64_t> out(size, n + 1);

  std::optional<TorusLattice> lat;
  if (impl_->torus) {
    if (impl_->torus->scale % static_cast<i64>(resolution) == 0) {
      lat = impl_->torus;
    } else {
      lat = build_torus_lattice(impl_->set, std::get<TorusPoint>(impl_->step), Integer(resolution));
    }
  }
  const int dim = space.is_torus() ? space.dim() : 1;

  parallel_for(size, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Quad> start(dim);
    for (std::size_t i = begin; i < end; ++i) {
      auto record = [&](std::uint64_t& slot, auto&& walker) {
        std::uint64_t hits = 0;
        std::size_t j = 0;
        walker([&](bool in) {
          hits += in ? 1 : 0;
          ++j;
          if (!level.exceeds(hits, j)) {
            slot = j;
            return false;
          }
          return true;
        });
      };
      if (lat) {
        std::uint64_t rest = i;
        const i64 unit = lat->scale / static_cast<i64>(resolution);
        for (int k = dim - 1; k >= 0; --k) {
          start[k] = Quad{static_cast<i64>(rest % resolution) * unit, 0};
          rest /= resolution;
        }
        if (lat->safe_for(start, n)) {
          record(out[i], [&](auto&& visit) { Impl::walk_torus(*lat, start, n, visit); });
          continue;
        }
      } else if (impl_->padic) {
        u64 y = i;
        record(out[i], [&](auto&& visit) {
          for (std::size_t j = 0; j < n; ++j) {
            if (!visit(impl_->padic->contains(y))) return;
            y = impl_->padic->advance(y);
          }
        });
        continue;
      }
      const GroupPoint x = space.grid_point(resolution, i);
      record(out[i], [&](auto&& visit) { impl_->walk_generic(x, n, visit); });
    }
  });
  return out;
}

}  // namespace heavyset
