#include "utree/rational.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "utree/errors.hpp"

namespace utree {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return ParseError("malformed rational '" + s + "'"); };
  if (s.empty()) throw bad();
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  auto digits_ok = [](const std::string& part, bool allow_sign) {
    if (part.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (part[0] == '-' || part[0] == '+')) i = 1;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') return false;
    return true;
  };
  if (!digits_ok(num, true) || !digits_ok(den, false)) throw bad();
  if (num[0] == '+') num.erase(0, 1);
  Integer n(num, 10);
  Integer d(den, 10);
  if (d == 0) throw bad();
  Rational r(n, d);
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

long magnitude_bits(const Rational& r) {
  if (sgn(r) == 0) return std::numeric_limits<long>::min();
  return static_cast<long>(mpz_sizeinbase(r.get_num_mpz_t(), 2)) -
         static_cast<long>(mpz_sizeinbase(r.get_den_mpz_t(), 2));
}

double to_double(const Rational& r) {
  if (sgn(r) == 0) return 0.0;
  long bits = magnitude_bits(r);
  if (bits > 1020) return sgn(r) > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
  if (bits < -1080) return 0.0;
  return r.get_d();
}

CRational& CRational::operator*=(const CRational& o) {
  if (o.is_real()) {
    re *= o.re;
    im *= o.re;
    return *this;
  }
  Rational r = re * o.re - im * o.im;
  Rational i = re * o.im + im * o.re;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

CRational CRational::inverse() const {
  if (is_zero()) throw ArgumentError("inverse of zero");
  Rational n = norm2();
  return CRational(re / n, -im / n);
}

namespace {
std::size_t hash_mpz(const mpz_t z) {
  // Size plus the lowest and highest limbs: cheap on very long integers.
  const std::size_t n = mpz_size(z);
  if (n == 0) return 0;
  const mp_limb_t* limbs = mpz_limbs_read(z);
  std::size_t h = n * 0x9e3779b97f4a7c15ULL;
  h ^= std::hash<mp_limb_t>{}(limbs[0]) + (h << 6) + (h >> 2);
  h ^= std::hash<mp_limb_t>{}(limbs[n - 1]) + (h << 6) + (h >> 2);
  return mpz_sgn(z) < 0 ? ~h : h;
}
}  // namespace

std::size_t hash_rational(const Rational& r) {
  std::size_t h = hash_mpz(r.get_num_mpz_t());
  return h * 1000003u ^ hash_mpz(r.get_den_mpz_t());
}

}  // namespace utree
