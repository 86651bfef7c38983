#include "heavyset/exact_scalar.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "heavyset/errors.hpp"

namespace heavyset {

namespace mp = boost::multiprecision;

Integer numerator_of(const Rational& r) { return mp::numerator(r); }
Integer denominator_of(const Rational& r) { return mp::denominator(r); }

Integer floor_of(const Rational& r) {
  Integer n = mp::numerator(r);
  const Integer d = mp::denominator(r);
  Integer q = n / d;  // truncates toward zero
  if (n < 0 && q * d != n) --q;
  return q;
}

Integer ceil_of(const Rational& r) { return -floor_of(-r); }

Integer integer_sqrt(const Integer& n) {
  if (n < 0) throw DomainError("integer_sqrt of a negative number");
  return mp::sqrt(n);
}

Integer integer_root(const Integer& n, unsigned k) {
  if (n < 0) throw DomainError("integer_root of a negative number");
  if (k == 0) throw DomainError("integer_root with k = 0");
  if (k == 1 || n < 2) return n;
  // Bisection on [0, 2^(bits/k + 1)].
  const unsigned bits = static_cast<unsigned>(mp::msb(n)) + 1;
  Integer lo = 0;
  Integer hi = Integer(1) << (bits / k + 1);
  while (lo < hi) {
    Integer mid = (lo + hi + 1) / 2;
    if (mp::pow(mid, k) <= n) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

double log_of(const Integer& n) {
  if (n <= 0) throw DomainError("log_of requires a positive integer");
  const auto top = mp::msb(n);
  if (top < 1000) return std::log(n.convert_to<double>());
  const auto shift = top - 60;
  const Integer head = n >> shift;
  return std::log(head.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

std::string to_string(const Rational& r) {
  const Integer d = mp::denominator(r);
  std::string out = mp::numerator(r).str();
  if (d != 1) out += "/" + d.str();
  return out;
}

namespace {

// Square-free factorization n = s^2 * core; returns {s, core}.
std::pair<Integer, std::int64_t> split_square(std::int64_t n) {
  Integer s = 1;
  std::int64_t core = n;
  for (std::int64_t p = 2; p <= core / p; ++p) {
    while (core % (p * p) == 0) {
      core /= p * p;
      s *= p;
    }
  }
  return {s, core};
}

using BigFloat = mp::cpp_bin_float_100;

BigFloat big_of(const Rational& r) {
  return BigFloat(mp::numerator(r)) / BigFloat(mp::denominator(r));
}

int sign_of(const Rational& r) { return r.sign(); }

}  // namespace

ExactScalar::ExactScalar(Rational value) : a_(std::move(value)) {}
ExactScalar::ExactScalar(Integer value) : a_(std::move(value)) {}

ExactScalar::ExactScalar(Rational a, Rational b, std::int64_t radicand)
    : a_(std::move(a)), b_(std::move(b)), d_(radicand) {
  if (d_ < 0) throw DomainError("negative radicand");
  canonicalize();
}

ExactScalar ExactScalar::sqrt(std::int64_t n) { return ExactScalar(0, 1, n); }

ExactScalar ExactScalar::fraction(long long num, long long den) {
  if (den == 0) throw DomainError("zero denominator");
  return ExactScalar(Rational(num, den));
}

void ExactScalar::canonicalize() {
  if (d_ == 0 || b_ == 0) {
    b_ = 0;
    d_ = 0;
    return;
  }
  auto [s, core] = split_square(d_);
  b_ *= s;
  d_ = core;
  if (d_ == 1) {
    a_ += b_;
    b_ = 0;
    d_ = 0;
  }
}

const Rational& ExactScalar::as_rational() const {
  if (d_ != 0) throw DomainError("value is irrational: " + to_string());
  return a_;
}

std::int64_t ExactScalar::common_radicand(const ExactScalar& y) const {
  if (d_ == 0) return y.d_;
  if (y.d_ == 0 || y.d_ == d_) return d_;
  throw UnsupportedField("mixing Q(sqrt " + std::to_string(d_) + ") and Q(sqrt " +
                         std::to_string(y.d_) + ")");
}

int ExactScalar::sign() const {
  const int sa = sign_of(a_);
  const int sb = sign_of(b_);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Opposite signs: compare a^2 with b^2 D by exact rational arithmetic.
  const Rational lhs = a_ * a_;
  const Rational rhs = b_ * b_ * d_;
  if (lhs == rhs) return 0;  // unreachable for square-free D > 1
  return lhs > rhs ? sa : sb;
}

ExactScalar ExactScalar::conjugate() const {
  ExactScalar out = *this;
  out.b_ = -out.b_;
  return out;
}

Rational ExactScalar::norm() const { return a_ * a_ - b_ * b_ * d_; }

Integer ExactScalar::floor() const {
  if (d_ == 0) return floor_of(a_);
  // b sqrt(D) = sqrt(bn^2 D) / bd lies strictly between s/bd and (s+1)/bd.
  const Integer bn = mp::abs(mp::numerator(b_));
  const Integer bd = mp::denominator(b_);
  const Integer s = integer_sqrt(Integer(bn * bn * d_));
  const Rational lo = b_ > 0 ? a_ + Rational(s, bd) : a_ - Rational(s + 1, bd);
  const Integer candidate = floor_of(lo) + 1;
  return (*this - ExactScalar(candidate)).sign() >= 0 ? candidate : candidate - 1;
}

ExactScalar ExactScalar::mod1() const { return *this - ExactScalar(floor()); }

FloatApprox ExactScalar::to_float() const {
  if (is_zero()) return {0.0, 0.0};
  BigFloat v;
  if (d_ == 0) {
    v = big_of(a_);
  } else {
    const BigFloat t = big_of(b_) * mp::sqrt(BigFloat(d_));
    if (a_ == 0 || sign_of(a_) == sign_of(b_)) {
      v = big_of(a_) + t;
    } else {
      // Opposite signs cancel; divide the exact norm by the conjugate instead.
      v = big_of(norm()) / (big_of(a_) - t);
    }
  }
  const double out = v.convert_to<double>();
  const double bound =
      std::abs(out) * std::ldexp(1.0, -52) + std::numeric_limits<double>::denorm_min();
  return {out, bound};
}

double ExactScalar::log_abs() const {
  if (is_zero()) throw DomainError("log of zero");
  if (d_ == 0) {
    return log_of(mp::abs(mp::numerator(a_))) - log_of(mp::denominator(a_));
  }
  const double v = to_float().value;
  if (v != 0.0 && std::isfinite(v)) return std::log(std::abs(v));
  // |x| = |norm| / |conjugate|.
  const Rational n = mp::abs(norm());
  return log_of(mp::numerator(n)) - log_of(mp::denominator(n)) - conjugate().log_abs();
}

std::string ExactScalar::to_string() const {
  if (d_ == 0) return heavyset::to_string(a_);
  std::string out;
  if (a_ != 0) out = heavyset::to_string(a_) + (b_ > 0 ? " + " : " - ");
  else if (b_ < 0) out = "-";
  const Rational mag = mp::abs(b_);
  if (mag != 1) out += heavyset::to_string(mag) + "*";
  out += "sqrt(" + std::to_string(d_) + ")";
  return out;
}

ExactScalar ExactScalar::operator-() const {
  ExactScalar out = *this;
  out.a_ = -out.a_;
  out.b_ = -out.b_;
  return out;
}

ExactScalar& ExactScalar::operator+=(const ExactScalar& y) {
  d_ = common_radicand(y);
  a_ += y.a_;
  b_ += y.b_;
  canonicalize();
  return *this;
}

ExactScalar& ExactScalar::operator-=(const ExactScalar& y) {
  d_ = common_radicand(y);
  a_ -= y.a_;
  b_ -= y.b_;
  canonicalize();
  return *this;
}

ExactScalar& ExactScalar::operator*=(const ExactScalar& y) {
  const std::int64_t d = common_radicand(y);
  Rational a = a_ * y.a_ + b_ * y.b_ * d;
  Rational b = a_ * y.b_ + b_ * y.a_;
  a_ = std::move(a);
  b_ = std::move(b);
  d_ = d;
  canonicalize();
  return *this;
}

ExactScalar& ExactScalar::operator/=(const ExactScalar& y) {
  if (y.is_zero()) throw DomainError("division by zero");
  common_radicand(y);
  const Rational n = y.norm();
  *this *= y.conjugate();
  a_ /= n;
  b_ /= n;
  canonicalize();
  return *this;
}

namespace {

// Sign of u + c sqrt(D2) with u in Q(sqrt D1): one squaring reduces it to a
// sign in Q(sqrt D1).
int mixed_sign(const ExactScalar& u, const Rational& c, std::int64_t d2) {
  const int su = u.sign();
  const int sc = c > 0 ? 1 : (c < 0 ? -1 : 0);
  if (sc == 0) return su;
  if (su == 0 || su == sc) return sc;
  const int bigger = (u * u - ExactScalar(c * c * d2)).sign();
  return bigger > 0 ? su : (bigger < 0 ? sc : 0);
}

}  // namespace

std::strong_ordering operator<=>(const ExactScalar& x, const ExactScalar& y) {
  int s = 0;
  if (x.radicand() != 0 && y.radicand() != 0 && x.radicand() != y.radicand()) {
    const ExactScalar u(x.rational_part() - y.rational_part(), x.radical_coefficient(), x.radicand());
    s = mixed_sign(u, -y.radical_coefficient(), y.radicand());
  } else {
    s = (x - y).sign();
  }
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::strong_ordering compare(const ExactScalar& x, const ExactScalar& y) { return x <=> y; }

ExactScalar min(const ExactScalar& x, const ExactScalar& y) { return y < x ? y : x; }
ExactScalar max(const ExactScalar& x, const ExactScalar& y) { return x < y ? y : x; }

ExactScalar pow(const ExactScalar& x, unsigned exponent) {
  ExactScalar result = 1;
  ExactScalar base = x;
  while (exponent > 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

// ---- parsing ---------------------------------------------------------------

Rational parse_rational(std::string_view text) {
  const ExactScalar v = ExactScalar::parse(text);
  if (!v.is_rational()) throw DomainError("expected a rational, got " + std::string(text));
  return v.rational_part();
}

namespace {

class ScalarParser {
 public:
  explicit ScalarParser(std::string_view text) : text_(text) {}

  ExactScalar run() {
    ExactScalar v = expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("cannot parse scalar '" + std::string(text_) + "': " + what +
                      " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExactScalar expr() {
    ExactScalar v = term();
    for (;;) {
      if (accept('+')) v += term();
      else if (accept('-')) v -= term();
      else return v;
    }
  }

  ExactScalar term() {
    ExactScalar v = factor();
    for (;;) {
      if (accept('*')) v *= factor();
      else if (accept('/')) v /= factor();
      else return v;
    }
  }

  ExactScalar factor() {
    if (accept('-')) return -factor();
    if (accept('+')) return factor();
    if (accept('(')) {
      ExactScalar v = expr();
      if (!accept(')')) fail("expected ')'");
      return v;
    }
    skip_space();
    if (text_.substr(pos_, 4) == "sqrt") {
      pos_ += 4;
      skip_space();
      ExactScalar arg;
      if (pos_ < text_.size() && text_[pos_] == '(') {
        arg = factor();
      } else {
        arg = number();
      }
      return root_of(arg);
    }
    return number();
  }

  ExactScalar root_of(const ExactScalar& arg) {
    if (!arg.is_rational() || arg.sign() < 0) fail("sqrt needs a nonnegative rational");
    const Rational& r = arg.rational_part();
    const Integer n = mp::numerator(r);
    const Integer d = mp::denominator(r);
    const Integer radicand = n * d;
    if (radicand > std::numeric_limits<std::int64_t>::max()) fail("radicand too large");
    return ExactScalar(0, Rational(1, d), radicand.convert_to<std::int64_t>());
  }

  ExactScalar number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected a number");
    Integer value(std::string(text_.substr(start, pos_ - start)));
    Integer scale = 1;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      const std::size_t frac = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + (text_[pos_] - '0');
        scale *= 10;
        ++pos_;
      }
      if (pos_ == frac) fail("expected digits after '.'");
    }
    return ExactScalar(Rational(value, scale));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ExactScalar ExactScalar::parse(std::string_view text) { return ScalarParser(text).run(); }

}  // namespace heavyset
