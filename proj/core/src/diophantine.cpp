#include "heavyset/diophantine.hpp"

#include <cmath>
#include <unordered_map>

#include "heavyset/errors.hpp"

namespace heavyset {

namespace mp = boost::multiprecision;

namespace {

constexpr std::size_t kPeriodSearchExtra = 4096;

// Quotients of any real x (no range precondition); stops early on rationals.
ContinuedFraction expand(const ExactScalar& x0, std::size_t count) {
  ContinuedFraction cf;
  if (x0.is_rational()) {
    Integer n = numerator_of(x0.as_rational());
    Integer d = denominator_of(x0.as_rational());
    const Integer a0 = floor_of(x0.as_rational());
    cf.quotients.push_back(a0);
    n -= a0 * d;
    while (n != 0) {
      // remaining value n/d in (0,1); next complete quotient is d/n
      const Integer a = d / n;
      cf.quotients.push_back(a);
      Integer r = d - a * n;
      d = n;
      n = r;
    }
    cf.finite = true;
    if (cf.quotients.size() > count) cf.quotients.resize(count);
    return cf;
  }
  std::unordered_map<std::string, std::size_t> seen;
  ExactScalar x = x0;
  const std::size_t limit = count + kPeriodSearchExtra;
  for (std::size_t j = 0; j < limit; ++j) {
    if (j >= 1) {
      auto [it, inserted] = seen.emplace(x.to_string(), j);
      if (!inserted) {
        cf.period_start = it->second;
        cf.period_length = j - it->second;
        break;
      }
    }
    const Integer a = x.floor();
    if (j < count || !cf.period_start) cf.quotients.push_back(a);
    x = ExactScalar(1) / (x - ExactScalar(a));
  }
  if (cf.quotients.size() > count && cf.periodic()) {
    const std::size_t keep = std::max(count, *cf.period_start + cf.period_length);
    cf.quotients.resize(keep);
  }
  return cf;
}

}  // namespace

std::size_t ContinuedFraction::available() const {
  if (periodic()) return static_cast<std::size_t>(-1);
  return quotients.size();
}

const Integer& ContinuedFraction::quotient(std::size_t j) const {
  if (j < quotients.size()) return quotients[j];
  if (!periodic()) {
    throw DomainError("continued fraction has only " + std::to_string(quotients.size()) +
                      " quotients");
  }
  const std::size_t start = *period_start;
  return quotients[start + (j - start) % period_length];
}

ContinuedFraction cf_expand(const ExactScalar& gamma, std::size_t count) {
  if (gamma.sign() <= 0 || gamma >= ExactScalar(1)) {
    throw DomainError("cf_expand needs 0 < gamma < 1, got " + gamma.to_string());
  }
  ContinuedFraction cf = expand(gamma, count);
  if (!cf.periodic() && !cf.finite && cf.quotients.size() > count) cf.quotients.resize(count);
  return cf;
}

std::vector<Convergent> convergents(const ContinuedFraction& cf, std::size_t n) {
  if (n > cf.available()) {
    throw DomainError("requested " + std::to_string(n) + " convergents, only " +
                      std::to_string(cf.available()) + " available");
  }
  std::vector<Convergent> out;
  out.reserve(n);
  Integer p2 = 0, q2 = 1;  // p_{-2}, q_{-2}
  Integer p1 = 1, q1 = 0;  // p_{-1}, q_{-1}
  for (std::size_t j = 0; j < n; ++j) {
    const Integer& a = cf.quotient(j);
    Integer p = a * p1 + p2;
    Integer q = a * q1 + q2;
    p2 = std::move(p1);
    q2 = std::move(q1);
    p1 = p;
    q1 = q;
    out.push_back({std::move(p), std::move(q)});
  }
  return out;
}

BelowApprox BelowApprox::from_fractions(ExactScalar gamma, const std::vector<Convergent>& fractions,
                                        Rational c2, unsigned k, std::string source) {
  BelowApprox out;
  out.gamma = std::move(gamma);
  out.c2 = std::move(c2);
  out.k = k;
  out.source = std::move(source);
  for (const auto& f : fractions) {
    if (f.q <= 0) throw DomainError("below-approximant denominators must be positive");
    out.entries.push_back({f.p, f.q, out.gamma - ExactScalar(Rational(f.p, f.q))});
  }
  return out;
}

std::vector<std::string> BelowApprox::violations() const {
  std::vector<std::string> out;
  if (c2 <= 0) out.push_back("c2 must be positive");
  if (k < 1) out.push_back("k must be >= 1");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string tag = "entry " + std::to_string(i) + " (" + e.p.str() + "/" + e.q.str() + ")";
    if (e.q <= 0) {
      out.push_back(tag + ": denominator not positive");
      continue;
    }
    if (mp::gcd(mp::abs(e.p), e.q) != 1) out.push_back(tag + ": not in lowest terms");
    if (i > 0 && !(e.q > entries[i - 1].q)) out.push_back(tag + ": q not strictly increasing");
    const ExactScalar gap = gamma - ExactScalar(Rational(e.p, e.q));
    if (gap != e.gap) out.push_back(tag + ": stored gap does not match gamma - p/q");
    if (gap.sign() < 0) out.push_back(tag + ": p/q exceeds gamma");
    const ExactScalar bound(c2 / Rational(mp::pow(e.q, k)));
    if (!(gap < bound)) out.push_back(tag + ": gap " + gap.to_string() + " >= c2/q^k");
  }
  return out;
}

BelowApprox below_sequence(const ExactScalar& gamma, std::size_t count) {
  if (gamma.is_rational()) {
    throw DomainError("below_sequence needs an irrational gamma; " + gamma.to_string() +
                      " is rational (use the rational-measure branch)");
  }
  if (count == 0) throw DomainError("below_sequence count must be positive");
  const ContinuedFraction cf = cf_expand(gamma, 2 * count - 1);
  const auto conv = convergents(cf, 2 * count - 1);
  std::vector<Convergent> even;
  for (std::size_t j = 0; j < conv.size(); j += 2) even.push_back(conv[j]);
  return BelowApprox::from_fractions(gamma, even, 1, 2, "convergents");
}

OrderEstimate estimate_order(const BelowApprox& seq) {
  OrderEstimate out;
  std::vector<double> xs, ys;
  for (const auto& e : seq.entries) {
    if (e.gap.sign() <= 0) {
      out.warnings.push_back("excluded " + e.p.str() + "/" + e.q.str() + ": gap is " +
                             (e.gap.is_zero() ? "zero" : "negative"));
      continue;
    }
    xs.push_back(log_of(e.q));
    ys.push_back(e.gap.log_abs());
  }
  if (xs.size() < 3) {
    throw DomainError("estimate_order needs at least 3 entries with positive gap, got " +
                      std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DomainError("estimate_order: all denominators equal");
  const double slope = sxy / sxx;
  out.k_hat = -slope;
  out.intercept = my - slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (out.intercept + slope * xs[i]);
    out.residuals.push_back(r);
    ss_res += r * r;
  }
  out.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  out.used = xs.size();
  return out;
}

BelowApprox liouville_below(unsigned k, std::size_t levels, std::uint32_t base,
                            std::size_t max_bits) {
  if (k < 2) throw DomainError("liouville_below needs k >= 2");
  if (base < 2) throw DomainError("liouville_below needs base >= 2");
  if (levels < 1) throw DomainError("liouville_below needs levels >= 1");
  std::vector<std::uint64_t> exps{1};
  const double bits_per_digit = std::log2(static_cast<double>(base));
  for (std::size_t j = 1; j < levels; ++j) {
    const double next = static_cast<double>(exps.back()) * k;
    if (next * bits_per_digit > static_cast<double>(max_bits)) {
      throw ResourceCap("liouville_below: level " + std::to_string(j + 1) + " needs more than " +
                        std::to_string(max_bits) + " bits");
    }
    exps.push_back(exps.back() * k);
  }
  std::vector<Convergent> fractions;
  Rational partial = 0;
  for (auto e : exps) {
    const Integer q = mp::pow(Integer(base), static_cast<unsigned>(e));
    partial += Rational(1, q);
    fractions.push_back({numerator_of(partial * q), q});
  }
  BelowApprox out = BelowApprox::from_fractions(ExactScalar(partial), fractions, 2, k, "liouville");
  out.truncated_gamma = true;
  return out;
}

Rational best_lower_rational(const ExactScalar& x, const Integer& max_den) {
  if (max_den < 1) throw DomainError("best_lower_rational needs max_den >= 1");
  Integer p2 = 0, q2 = 1, p1 = 1, q1 = 0;
  Rational best(x.floor());
  ExactScalar rem = x;
  for (std::size_t j = 0;; ++j) {
    const Integer a = rem.floor();
    // Semiconvergents (p_{j-2} + t p_{j-1}) / (q_{j-2} + t q_{j-1}) sit on the
    // side of p_j/q_j, which is below x for even j.
    if (j % 2 == 0 && j >= 2) {
      Integer t = (max_den - q2) / q1;
      if (t > a) t = a;
      if (t >= 1) {
        const Rational cand(p2 + t * p1, q2 + t * q1);
        if (cand > best) best = cand;
      }
    }
    const Integer p = a * p1 + p2;
    const Integer q = a * q1 + q2;
    if (q > max_den) break;
    const ExactScalar frac = rem - ExactScalar(a);
    if (j % 2 == 0 || frac.is_zero()) {
      const Rational cand(p, q);
      if (cand > best) best = cand;
    }
    if (frac.is_zero()) break;
    p2 = p1;
    q2 = q1;
    p1 = p;
    q1 = q;
    rem = ExactScalar(1) / frac;
  }
  return best;
}

}  // namespace heavyset
