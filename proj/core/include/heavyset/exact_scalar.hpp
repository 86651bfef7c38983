#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace heavyset {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

Integer numerator_of(const Rational& r);
Integer denominator_of(const Rational& r);
Integer floor_of(const Rational& r);
Integer ceil_of(const Rational& r);
Integer integer_sqrt(const Integer& n);            // floor(sqrt(n)), n >= 0
Integer integer_root(const Integer& n, unsigned k); // floor(n^(1/k)), n >= 0
double log_of(const Integer& n);                    // natural log, n > 0
std::string to_string(const Rational& r);
Rational parse_rational(std::string_view text);

/// A double approximation and an upper bound on its absolute error.
struct FloatApprox {
  double value = 0.0;
  double error_bound = 0.0;
};

/// Exact element a + b*sqrt(D) of Q or a real quadratic field Q(sqrt D).
///
/// The representation is canonical: D is square-free and greater than one,
/// or D == 0 together with b == 0 for plain rationals. Structural equality is
/// therefore value equality. Arithmetic between two different fields throws
/// UnsupportedField (a rational operand mixes with any field); ordering across
/// fields is exact.
class ExactScalar {
 public:
  ExactScalar() = default;
  template <std::integral T>
  ExactScalar(T value) : a_(value) {}  // NOLINT(google-explicit-constructor)
  ExactScalar(Rational value);  // NOLINT(google-explicit-constructor)
  ExactScalar(Integer value);   // NOLINT(google-explicit-constructor)
  /// a + b*sqrt(radicand); square factors of the radicand are pulled into b.
  ExactScalar(Rational a, Rational b, std::int64_t radicand);

  static ExactScalar sqrt(std::int64_t n);
  static ExactScalar fraction(long long num, long long den);
  /// Parses expressions such as "1/2", "0.35", "(sqrt5-1)/2",
  /// "-1/2 + 1/2*sqrt(5)". Division by any nonzero element is allowed.
  static ExactScalar parse(std::string_view text);

  const Rational& rational_part() const { return a_; }
  const Rational& radical_coefficient() const { return b_; }
  std::int64_t radicand() const { return d_; }
  bool is_rational() const { return d_ == 0; }
  bool is_zero() const { return d_ == 0 && a_ == 0; }
  /// Precondition: is_rational().
  const Rational& as_rational() const;

  int sign() const;
  ExactScalar abs() const { return sign() < 0 ? -*this : *this; }
  ExactScalar conjugate() const;
  /// a^2 - b^2 D, the field norm.
  Rational norm() const;
  Integer floor() const;
  /// x - floor(x), in [0, 1).
  ExactScalar mod1() const;
  FloatApprox to_float() const;
  double to_double() const { return to_float().value; }
  /// Natural log of |x|, robust for values outside double range. x != 0.
  double log_abs() const;
  /// Canonical text "a + b*sqrt(D)"; parse(to_string()) reproduces the value.
  std::string to_string() const;

  ExactScalar operator-() const;
  ExactScalar& operator+=(const ExactScalar& y);
  ExactScalar& operator-=(const ExactScalar& y);
  ExactScalar& operator*=(const ExactScalar& y);
  ExactScalar& operator/=(const ExactScalar& y);
  friend ExactScalar operator+(ExactScalar x, const ExactScalar& y) { return x += y; }
  friend ExactScalar operator-(ExactScalar x, const ExactScalar& y) { return x -= y; }
  friend ExactScalar operator*(ExactScalar x, const ExactScalar& y) { return x *= y; }
  friend ExactScalar operator/(ExactScalar x, const ExactScalar& y) { return x /= y; }

  friend bool operator==(const ExactScalar&, const ExactScalar&) = default;
  friend std::strong_ordering operator<=>(const ExactScalar& x, const ExactScalar& y);

 private:
  void canonicalize();
  std::int64_t common_radicand(const ExactScalar& y) const;

  Rational a_ = 0;
  Rational b_ = 0;
  std::int64_t d_ = 0;
};

std::strong_ordering compare(const ExactScalar& x, const ExactScalar& y);
ExactScalar min(const ExactScalar& x, const ExactScalar& y);
ExactScalar max(const ExactScalar& x, const ExactScalar& y);
ExactScalar pow(const ExactScalar& x, unsigned exponent);

}  // namespace heavyset
