#include "heavyset/heavy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "heavyset/errors.hpp"
#include "heavyset/parallel.hpp"

namespace heavyset {

namespace {

constexpr std::size_t kMaxHorizon = std::size_t{1} << 32;

void check_horizon(std::size_t n) {
  if (n < 1) throw DomainError("horizon must be at least 1");
  if (n > kMaxHorizon) throw ResourceCap("horizon " + std::to_string(n) + " exceeds 2^32");
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double standard_error() const {
    if (count < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(count) * m * m) /
                                         static_cast<double>(count - 1));
    return std::sqrt(var / static_cast<double>(count));
  }
};

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::X: return "X";
    case Variant::Y: return "Y";
    case Variant::Z: return "Z";
  }
  return "?";
}

DeficitTrace deficit_trace(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                           const ExactScalar& level, std::size_t n, Variant variant) {
  check_horizon(n);
  if (level.sign() < 0 || level > ExactScalar(1)) throw DomainError("level must lie in [0, 1]");
  const GroupSpace& space = a.space();
  space.check(x);
  space.check(g);
  DeficitTrace trace{x, g, n, variant, std::nullopt, level, {}, {}};
  trace.chi.reserve(n);
  trace.sums.reserve(n);
  const ExactScalar up = ExactScalar(1) - level;
  const ExactScalar down = -level;
  ExactScalar sum = 0;
  GroupPoint y = x;
  for (std::size_t j = 0; j < n; ++j) {
    const bool in = a.contains(y);
    trace.chi.push_back(in ? 1 : 0);
    sum += in ? up : down;
    trace.sums.push_back(sum);
    y = space.translate(y, g);
  }
  return trace;
}

HeavyVerdict verdict_of(const DeficitTrace& trace) {
  HeavyVerdict v;
  v.heavy = true;
  for (std::size_t j = 0; j < trace.sums.size(); ++j) {
    const ExactScalar& s = trace.sums[j];
    if (j == 0 || s < v.min_partial_sum) v.min_partial_sum = s;
    if (v.heavy && s.sign() <= 0) {
      v.heavy = false;
      v.first_failure = j + 1;
    }
  }
  return v;
}

HeavyVerdict is_heavy(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                      const ExactScalar& level, std::size_t n) {
  return verdict_of(deficit_trace(x, g, a, level, n));
}

Rational schedule_eps(const Integer& n, const Integer& max_den, bool* exact) {
  if (n < 1) throw DomainError("schedule horizon must be at least 1");
  const Integer s = integer_sqrt(n);
  if (s * s == n) {
    if (exact) *exact = true;
    return Rational(Integer(1), s);
  }
  if (exact) *exact = false;
  if (n >= (Integer(1) << 62)) throw ResourceCap("schedule horizon too large for an exact radius");
  const auto nn = n.convert_to<std::int64_t>();
  const ExactScalar inv_root = ExactScalar::sqrt(nn) / ExactScalar(n);
  return best_lower_rational(inv_root, max_den);
}

std::vector<Schedule> make_schedule(const BelowApprox& seq, const Rational& psi, int d) {
  if (psi >= d) throw DomainError("schedule needs psi < d");
  if (psi < 0) throw DomainError("schedule needs psi >= 0");
  const Rational exponent = Rational(2 * static_cast<int>(seq.k)) / (Rational(d) - psi);
  const Integer num = numerator_of(exponent);
  const Integer den = denominator_of(exponent);
  if (num > 4096 || den > 4096) throw ResourceCap("schedule exponent has too large a height");
  std::vector<Schedule> out;
  for (std::size_t i = 0; i < seq.entries.size(); ++i) {
    const auto& e = seq.entries[i];
    Schedule s;
    s.index = i + 1;
    s.p = e.p;
    s.q = e.q;
    s.k = seq.k;
    s.psi = psi;
    s.d = d;
    s.exponent = exponent;
    s.n_exact = std::exp(exponent.convert_to<double>() * log_of(e.q));
    s.n = integer_root(boost::multiprecision::pow(e.q, num.convert_to<unsigned>()),
                       den.convert_to<unsigned>());
    s.eps = schedule_eps(s.n, e.q * e.q, &s.eps_exact);
    s.level = Rational(e.p, e.q);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Schedule> make_rational_schedule(const Rational& measure,
                                             const std::vector<Integer>& horizons, int d) {
  std::vector<Schedule> out;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw DomainError("rational-branch horizons must be increasing");
    }
    Schedule s;
    s.index = i + 1;
    s.p = numerator_of(measure);
    s.q = denominator_of(measure);
    s.d = d;
    s.n = horizons[i];
    s.n_exact = horizons[i].convert_to<double>();
    s.eps = schedule_eps(s.n, s.n, &s.eps_exact);
    s.level = measure;
    out.push_back(std::move(s));
  }
  return out;
}

HeavyVerdict h_y_verdict(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                         const Schedule& sched) {
  const TargetSet dilated = a.dilate(sched.eps);
  if (dilated.is_full() && sched.level < 1) {
    a.space().check(x);
    return {true, std::nullopt, ExactScalar(1) - ExactScalar(sched.level)};
  }
  return is_heavy(x, g, dilated, sched.level, sched.horizon());
}

Rational measure_estimate(const std::function<bool(const GroupPoint&)>& predicate,
                          const GroupSpace& space, std::uint64_t resolution, std::uint64_t cap) {
  const std::uint64_t size = space.grid_size(resolution, cap);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < size; ++i) {
    if (predicate(space.grid_point(resolution, i))) ++hits;
  }
  return Rational(Integer(hits), Integer(size));
}

Stage::Stage(const TargetSet& a, const GroupPoint& g, Schedule sched)
    : sched_(std::move(sched)),
      raw_(a, g),
      dilated_(a.dilate(sched_.eps), g),
      x_level_(a.measure()),
      y_level_(sched_.level),
      z_level_(dilated_.set().measure()) {
  check_horizon(sched_.horizon());
}

bool Stage::hx_heavy(const GroupPoint& x) const {
  return !raw_.first_failure(x, horizon(), x_level_).has_value();
}

bool Stage::hy_heavy(const GroupPoint& x) const {
  if (degenerate() && sched_.level < 1) return true;
  return !dilated_.first_failure(x, horizon(), y_level_).has_value();
}

std::size_t Stage::j_count(const GroupPoint& x) const {
  const std::size_t n = horizon();
  const auto chi = dilated_.chi(x, 2 * n - 1);
  std::vector<std::uint64_t> prefix(chi.size() + 1, 0);
  for (std::size_t i = 0; i < chi.size(); ++i) prefix[i + 1] = prefix[i] + chi[i];
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    bool heavy = true;
    for (std::size_t m = 1; m <= n && heavy; ++m) {
      heavy = y_level_.exceeds(prefix[j + m] - prefix[j], m);
    }
    if (heavy) ++count;
  }
  return count;
}

DistinctSums Stage::distinct_sums(const GroupPoint& x) const {
  const std::size_t n = horizon();
  const auto chi = dilated_.chi(x, n);
  // q S_j = q hits_j - j p is an integer
  std::set<Integer> values;
  const Integer up = sched_.q - sched_.p;
  const Integer down = -sched_.p;
  Integer scaled = 0;
  for (std::size_t j = 0; j < n; ++j) {
    scaled += chi[j] ? up : down;
    values.insert(scaled);
  }
  DistinctSums out;
  out.count = values.size();
  out.separated = true;
  for (auto it = values.begin(); it != values.end(); ++it) {
    auto next = std::next(it);
    if (next != values.end() && *next - *it < 1) out.separated = false;
  }
  return out;
}

std::size_t j_count(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                    const Schedule& sched) {
  return Stage(a, g, sched).j_count(x);
}

DistinctSums distinct_sums(const GroupPoint& x, const GroupPoint& g, const TargetSet& a,
                           const Schedule& sched) {
  return Stage(a, g, sched).distinct_sums(x);
}

GroupPoint multiple(const GroupSpace& space, const GroupPoint& g, const Integer& m) {
  space.check(g);
  if (space.is_torus()) {
    std::vector<ExactScalar> coords;
    for (const auto& c : std::get<TorusPoint>(g).coords) coords.push_back(c * ExactScalar(m));
    return space.torus_point(std::move(coords));
  }
  return space.padic_point(std::get<PAdicPoint>(g).value() * m);
}

LoeveResult loeve_check(const TargetSet& a, const std::optional<Rational>& eps, std::size_t n,
                        std::size_t samples, std::uint64_t seed) {
  check_horizon(n);
  if (samples < 2) throw DomainError("maximal-inequality check needs at least 2 samples");
  const TargetSet b = eps ? a.dilate(ExactScalar(*eps)) : a;
  const GroupSpace& space = b.space();
  const double gamma = b.measure().to_double();

  Moments moments;
  for (std::size_t s = 0; s < samples; ++s) {
    std::mt19937_64 rng(derive_seed(seed, s));
    const GroupPoint x = space.random_point(rng);
    const GroupPoint g = space.random_point(rng);
    const auto chi = OrbitEngine(b, g).chi(x, n);
    double peak = 0.0;
    std::uint64_t hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
      hits += chi[k];
      peak = std::max(peak, std::abs(static_cast<double>(hits) - static_cast<double>(k + 1) * gamma));
    }
    moments.add(peak * peak);
  }

  LoeveResult r;
  r.n = n;
  r.samples = samples;
  r.lhs = moments.mean();
  r.standard_error = moments.standard_error();
  const double factor = std::pow(std::log(4.0 * static_cast<double>(n)) / std::log(2.0), 2);
  r.rhs = factor * static_cast<double>(n) * gamma * (1.0 - gamma);
  r.rhs_quarter = factor * static_cast<double>(n) * 0.25;
  r.pass = r.lhs <= r.rhs + 3.0 * r.standard_error;
  return r;
}

OrthogonalityResult orthogonality_check(
    const TargetSet& a, const Schedule& sched,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t samples,
    std::uint64_t seed) {
  if (samples < 2) throw DomainError("orthogonality check needs at least 2 samples");
  const TargetSet b = a.dilate(ExactScalar(sched.eps));
  const GroupSpace& space = b.space();
  const double mu = b.measure().to_double();

  OrthogonalityResult out;
  out.pass = true;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto [i, j] = pairs[pi];
    if (i == j) throw DomainError("orthogonality needs distinct indices");
    Moments product;
    Moments single;
    for (std::size_t s = 0; s < samples; ++s) {
      std::mt19937_64 rng(derive_seed(derive_seed(seed, pi), s));
      const GroupPoint x = space.random_point(rng);
      const GroupPoint g = space.random_point(rng);
      const auto zi = (b.contains(space.translate(x, multiple(space, g, Integer(i)))) ? 1.0 : 0.0) - mu;
      const auto zj = (b.contains(space.translate(x, multiple(space, g, Integer(j)))) ? 1.0 : 0.0) - mu;
      product.add(zi * zj);
      single.add(zi);
    }
    OrthogonalityPair p{i, j, product.mean(), product.standard_error(), single.mean(),
                        single.standard_error(), false};
    p.pass = std::abs(p.mean_product) <= 4.0 * p.standard_error &&
             std::abs(p.mean_i) <= 4.0 * p.mean_i_error;
    out.max_abs = std::max(out.max_abs, std::abs(p.mean_product));
    out.pass = out.pass && p.pass;
    out.pairs.push_back(p);
  }
  return out;
}

}  // namespace heavyset
