#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace utree;
using namespace utree::testing;

TEST_SUITE("measure") {
  TEST_CASE("level measures sum to one exactly") {
    for (const TreeConfig& t : {binary(), third(), mixed()}) {
      for (int n = 0; n <= 10; ++n) {
        Rational sum = 0;
        for (const auto& v : level(t, n)) sum += sector_measure(t, v);
        CHECK(sum == 1);
        CHECK(consistency_check(t, n).pass());
      }
    }
  }

  TEST_CASE("sector measure is the product along the path") {
    TreeConfig t = third();
    CHECK(sector_measure(t, VertexId({1, 1, 0})) == Rational(4, 27));
  }

  TEST_CASE("probability metric axioms on random triples") {
    Gen g(2024);
    for (const TreeConfig& t : {binary(), third(), mixed()}) {
      for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = static_cast<std::size_t>(g.integer(1, 3));
        SimpleFunction a = g.simple(t, m, static_cast<int>(g.integer(0, 4)));
        SimpleFunction b = g.near(t, refine(t, a, a.level + static_cast<int>(g.integer(0, 2))));
        SimpleFunction c = g.simple(t, m, static_cast<int>(g.integer(0, 4)));
        const double ab = probability_metric(t, a, b), ba = probability_metric(t, b, a);
        const double bc = probability_metric(t, b, c), ac = probability_metric(t, a, c);
        CHECK(ab == ba);
        CHECK(ac <= ab + bc + 1e-12);
        CHECK(ab >= 0.0);
        CHECK(ab < 1.0);
        CHECK(probability_metric(t, a, a) == 0.0);
        // translation invariance
        CHECK(std::abs(probability_metric(t, add(t, a, c), add(t, b, c)) - ab) <= 1e-12);
        // refinement invariance
        CHECK(probability_metric(t, refine(t, a, a.level + 2), b) == doctest::Approx(ab).epsilon(1e-12));
        // scaling bound
        const CRational k = g.complex(4, 2);
        const double scaled = probability_metric(t, scale(k, a), scale(k, b));
        CHECK(scaled <= std::max(1.0, std::abs(k.to_complex())) * ab + 1e-12);
      }
    }
  }

  TEST_CASE("perturbation lands in the first light sector") {
    TreeConfig t = binary();
    SimpleFunction zero = SimpleFunction::constant(t, 0, ev(0));
    SimpleFunction p = perturb(t, zero, Rational(1, 16));
    CHECK_FALSE(same_element(t, zero, p));
    // first sector lighter than 1/16 has measure 1/32; distance 1/32 * 1/2
    CHECK(probability_metric(t, zero, p) == doctest::Approx(1.0 / 64));
    CHECK(p.level == 5);
  }

  TEST_CASE("dense family reaches a level-one indicator early") {
    TreeConfig t = binary();
    SimpleFunction e{1, {ev(0), ev(1)}};
    bool found = false;
    for (std::uint64_t i = 1; i <= 171 && !found; ++i) found = same_element(t, dense_family(t, 1, i), e);
    CHECK(found);
  }

  TEST_CASE("dense family elements are distinct simple functions") {
    TreeConfig t = binary();
    SimpleFunction prev = dense_family(t, 2, 1);
    for (std::uint64_t i = 2; i <= 40; ++i) {
      SimpleFunction f = dense_family(t, 2, i);
      CHECK(f.dim() == 2);
      CHECK_FALSE(same_element(t, prev, f));
      prev = f;
    }
  }
}
