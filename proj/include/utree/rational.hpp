#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace utree {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "a/b", "a" or "-a/b". Throws ParseError on malformed text or a zero
/// denominator. The result is canonical.
Rational parse_rational(std::string_view text);

/// Always "numerator/denominator", including "0/1" and "3/1".
std::string format_rational(const Rational& r);

/// mpq -> double that saturates to +-infinity instead of relying on the
/// platform behaviour of mpq_get_d for huge magnitudes.
double to_double(const Rational& r);

/// Number of bits of |r| above the binary point (can be negative).
long magnitude_bits(const Rational& r);

/// Gaussian rational a + b i with exact parts.
struct CRational {
  Rational re;
  Rational im;

  CRational() = default;
  CRational(Rational r) : re(std::move(r)) {}
  CRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  CRational(long r) : re(r) {}

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  bool is_real() const { return sgn(im) == 0; }

  CRational& operator+=(const CRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  CRational& operator-=(const CRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  CRational& operator*=(const CRational& o);

  friend CRational operator+(CRational a, const CRational& b) { return a += b; }
  friend CRational operator-(CRational a, const CRational& b) { return a -= b; }
  friend CRational operator*(CRational a, const CRational& b) { return a *= b; }
  friend CRational operator-(const CRational& a) { return CRational(-a.re, -a.im); }
  friend bool operator==(const CRational& a, const CRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  /// Multiplicative inverse. Throws ArgumentError on zero.
  CRational inverse() const;
  /// |z|^2, exact.
  Rational norm2() const { return re * re + im * im; }
  std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }
};

/// Bounded ratio t/(1+t) used by both metrics; returns 1 for t = +inf.
inline double bounded_ratio(double t) {
  if (!(t < 1e300)) return 1.0;
  return t / (1.0 + t);
}

/// Hash of an exact rational's limbs; stable within one process.
std::size_t hash_rational(const Rational& r);

}  // namespace utree
