#include <doctest.h>

#include "support.hpp"
#include "utree/errors.hpp"

using namespace utree;
using namespace utree::testing;

namespace {

HarmonicTruncation random_harmonic(Gen& g, const TreeConfig& t, std::size_t m, int level, int depth) {
  return harmonic_lift(t, g.simple(t, m, level), depth);
}

TreeConfig complex_weights() {
  return TreeConfig::uniform(
      LocalRule::make({Rational(1, 3), Rational(2, 3)}, {cr(2, 1), cr(-1, -1)}, "[]"), 30);
}

}  // namespace

TEST_SUITE("harmonic") {
  TEST_CASE("lifts and extensions are harmonic") {
    Gen g(5);
    for (const TreeConfig& t : {binary(), third(), mixed(), complex_weights()}) {
      for (int trial = 0; trial < 6; ++trial) {
        const std::size_t m = static_cast<std::size_t>(g.integer(1, 2));
        HarmonicTruncation f = random_harmonic(g, t, m, static_cast<int>(g.integer(0, 3)), 4);
        CHECK(is_harmonic(t, f).pass());
        CHECK(is_harmonic(t, constant_extend(t, f, 7)).pass());
        SimpleFunction targets = g.simple(t, m, 5);
        CorrectedExtension c = corrected_extend(t, f, targets);
        CHECK(c.f.depth == 5);
        CHECK(is_harmonic(t, c.f).pass());
        CHECK(is_harmonic(t, linear_combination(t, {g.complex(), g.complex()}, {f, c.f})).pass());
      }
    }
  }

  TEST_CASE("corrected extension matches targets off the correction children") {
    TreeConfig t = third();
    Gen g(6);
    HarmonicTruncation f = constant_truncation(t, 2, ev(0));
    SimpleFunction targets = g.simple(t, 1, 3);
    CorrectedExtension c = corrected_extend(t, f, targets);
    LevelLayout layout(t, 3);
    Rational light = 0;
    for (std::size_t x = 0; x < layout.level_size(2); ++x) {
      const std::size_t first = layout.child_begin(2, x);
      CHECK(c.correction_children[x] == 0);  // 1/3 is the lighter child
      light += layout.measure(3, first);
      for (std::size_t k = 1; k < layout.branching(2, x); ++k)
        CHECK(c.f.at(layout, 3, first + k) == targets.values[first + k]);
    }
    CHECK(c.correction_measure == light);
    CHECK(c.correction_measure == Rational(1, 3));
  }

  TEST_CASE("a broken value is reported") {
    TreeConfig t = binary();
    HarmonicTruncation f = constant_truncation(t, 3, ev(2));
    LevelLayout layout(t, 3);
    f.at(layout, 3, 5) = ev(7);
    HarmonicityReport r = is_harmonic(t, f);
    REQUIRE_FALSE(r.pass());
    CHECK(r.violations.front().vertex == layout.vertex(2, 2));
  }

  TEST_CASE("martingale identity with w = q") {
    Gen g(7);
    for (const TreeConfig& t : {binary(), third(), mixed()}) {
      HarmonicTruncation f = random_harmonic(g, t, 2, 3, 5);
      CHECK(martingale_check(t, f).pass());
    }
  }

  TEST_CASE("level projection of a lift returns the lifted function") {
    Gen g(8);
    TreeConfig t = mixed();
    SimpleFunction h = g.simple(t, 1, 3);
    HarmonicTruncation f = harmonic_lift(t, h, 5);
    CHECK(same_element(t, level_projection(t, f, 3), h));
    CHECK(same_element(t, level_projection(t, f, 5), refine(t, h, 5)));
  }

  TEST_CASE("pointwise metric") {
    Gen g(9);
    TreeConfig t = binary();
    HarmonicTruncation a = random_harmonic(g, t, 1, 2, 4), b = random_harmonic(g, t, 1, 2, 4);
    Interval ab = pointwise_metric(t, a, b), ba = pointwise_metric(t, b, a);
    CHECK(ab.lo == ba.lo);
    CHECK(ab.lo <= ab.hi);
    CHECK(pointwise_metric(t, a, a).lo == 0.0);
    // 31 shared vertices leave a tail of 2^-31
    CHECK(pointwise_metric(t, a, a).hi == doctest::Approx(std::ldexp(1.0, -31)));
  }

  TEST_CASE("flattening offsets") {
    TreeConfig t = binary();
    for (std::uint64_t n = 1; n <= 6; ++n) {
      SimpleFunction e = dense_family(t, 1, n + 3);
      const int depth = std::max(flatten_depth(t, n), e.level) + 2;
      HarmonicTruncation phi = harmonic_lift(t, e, depth);
      HarmonicTruncation f = constant_truncation(t, depth, ev(1, -1));
      FlattenResult r = flatten_perturbation(t, f, phi, n);
      CHECK(r.flat_depth == flatten_depth(t, n));
      CHECK(r.flat_below);
      CHECK(r.to_difference.hi < 1.0 / static_cast<double>(n));
      CHECK(r.sum_to_target.hi < 1.0 / static_cast<double>(n));
      CHECK(r.pass(n));
      CHECK(is_harmonic(t, r.g).pass());
    }
  }

  TEST_CASE("mode mixing is rejected") {
    TreeConfig t = binary();
    HarmonicTruncation a = constant_truncation(t, 2, ev(1));
    HarmonicTruncation b = constant_truncation(t, 2, ev(1).to_floating());
    CHECK_THROWS_AS(add(a, b), ModeError);
  }
}
