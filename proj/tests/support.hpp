#pragma once

#include <random>
#include <string>

#include "utree/io.hpp"

namespace utree::testing {

inline CRational cr(long re, long im = 0) { return CRational(Rational(re), Rational(im)); }
inline CRational cr(const Rational& re) { return CRational(re); }

inline Value ev(long re, long im = 0) { return Value(std::vector<CRational>{cr(re, im)}); }

inline TreeConfig binary(int cap = 10000) {
  return TreeConfig::uniform(LocalRule::make({Rational(1, 2), Rational(1, 2)}, {}, "[]"), cap);
}

inline TreeConfig third(int cap = 64) {
  return TreeConfig::uniform(LocalRule::make({Rational(1, 3), Rational(2, 3)}, {}, "[]"), cap);
}

inline TreeConfig mixed(int cap = 40) {
  return TreeConfig::periodic({LocalRule::make({Rational(1, 2), Rational(1, 2)}, {}, "[]"),
                               LocalRule::make({Rational(1, 6), Rational(1, 3), Rational(1, 2)}, {}, "[0]")},
                              cap);
}

inline std::string fixture(const std::string& name) { return std::string(UTREE_FIXTURES) + "/" + name; }

/// Hand-rolled generators over a fixed-seed engine.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

  Rational rational(long bound = 6, long max_den = 4) {
    return Rational(integer(-bound * max_den, bound * max_den), integer(1, max_den));
  }

  CRational complex(long bound = 6, long max_den = 4) {
    CRational c(rational(bound, max_den), rational(bound, max_den));
    c.re.canonicalize();
    c.im.canonicalize();
    return c;
  }

  Value value(std::size_t m) {
    std::vector<CRational> v;
    for (std::size_t i = 0; i < m; ++i) v.push_back(complex());
    return Value(std::move(v));
  }

  SimpleFunction simple(const TreeConfig& config, std::size_t m, int level) {
    LevelLayout layout(config, level);
    SimpleFunction f{level, {}};
    for (std::size_t i = 0; i < layout.level_size(level); ++i) f.values.push_back(value(m));
    return f;
  }

  /// Sparse variant: most sectors share one value, so distances are small.
  SimpleFunction near(const TreeConfig& config, const SimpleFunction& base) {
    SimpleFunction f = base;
    for (auto& v : f.values)
      if (integer(0, 3) == 0) v = value(v.dim());
    return f;
  }
};

}  // namespace utree::testing
