#include <doctest.h>

#include "support.hpp"
#include "utree/errors.hpp"

using namespace utree;
using namespace utree::testing;

TEST_SUITE("density") {
  TEST_CASE("counting density is exact") {
    IndexSet evens({2, 4, 6, 8, 10}, 10);
    CHECK(counting_density(evens, 10) == Rational(1, 2));
    CHECK(counting_density(evens, 3) == Rational(1, 3));
    CHECK(evens.count_up_to(7) == 3);
    CHECK(evens.contains(6));
    CHECK_FALSE(evens.contains(7));
    CHECK_THROWS_AS(counting_density(evens, 11), ArgumentError);
  }

  TEST_CASE("two-adic classes have densities 2^-(k+1)") {
    const std::uint64_t H = 1 << 12;
    for (unsigned k = 0; k < 5; ++k) {
      std::vector<std::uint64_t> idx;
      for (std::uint64_t n = 1; n <= H; ++n)
        if (two_adic_valuation(n) == k) idx.push_back(n);
      CHECK(counting_density(IndexSet(idx, H), H) == Rational(1, 2 << k));
    }
    CHECK_THROWS_AS(two_adic_valuation(0), ArgumentError);
  }

  TEST_CASE("profile tracks finite-horizon extremes") {
    Gen g(31);
    std::vector<std::uint64_t> idx;
    for (std::uint64_t n = 1; n <= 500; ++n)
      if (g.integer(0, 2) == 0) idx.push_back(n);
    IndexSet s(idx, 500);
    DensityReport r = density_profile(s, 100);
    CHECK(r.profile.size() == 401);
    CHECK(r.profile.front().n == 100);
    Rational lo = 1, hi = 0;
    for (const auto& c : r.profile) {
      CHECK(c.count == s.count_up_to(c.n));
      lo = std::min(lo, c.density());
      hi = std::max(hi, c.density());
    }
    CHECK(r.finite_horizon_min.density() == lo);
    CHECK(r.finite_horizon_max.density() == hi);
    CHECK(density_profile(s).window_start == 250);
  }

  TEST_CASE("index sets are normalized and bounded") {
    CHECK(IndexSet({3, 2, 3}, 5).indices() == std::vector<std::uint64_t>{2, 3});
    CHECK_THROWS_AS(IndexSet({0, 2}, 5), ArgumentError);
    CHECK_THROWS_AS(IndexSet({2, 6}, 5), ArgumentError);
  }
}
