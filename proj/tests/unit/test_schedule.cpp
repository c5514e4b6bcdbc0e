#include <doctest.h>

#include "support.hpp"
#include "utree/errors.hpp"

using namespace utree;
using namespace utree::testing;

namespace {

std::vector<Target> units(const TreeConfig& t, std::size_t k) {
  std::vector<Target> out;
  for (std::size_t i = 0; i < k; ++i) {
    SimpleFunction f{1, {ev(i % 2 == 0 ? 1 : 0), ev(i % 2 == 0 ? 0 : 1)}};
    if (i >= 2) f.values[0] = ev(static_cast<long>(i));
    out.push_back(Target{f, "h" + std::to_string(i + 1)});
  }
  (void)t;
  return out;
}

}  // namespace

TEST_SUITE("schedule") {
  TEST_CASE("transition length") {
    CHECK(transition_length(binary(), Rational(3, 4)) == 1);
    CHECK(transition_length(binary(), Rational(1, 100)) == 7);
    CHECK(transition_length(binary(), Rational(1, 128)) == 7);
    CHECK(transition_length(third(), Rational(1, 5)) == 2);
    CHECK_THROWS_AS(transition_length(binary(), Rational(0)), ArgumentError);
    CHECK_THROWS_AS(transition_length(binary(), Rational(1)), ArgumentError);
  }

  TEST_CASE("X schedule blocks grow factorially and tile the horizon") {
    TreeConfig t = binary();
    auto targets = units(t, 2);
    XScheduleOptions o;
    o.skip_until = 120;
    Schedule s = make_x_schedule(t, targets, 5040, o);
    REQUIRE(s.blocks.size() == 2);
    CHECK(s.blocks[0].transition_start == 121);
    CHECK(s.blocks[0].hold_end == 720);
    CHECK(s.blocks[0].target == 1);
    CHECK(s.blocks[1].transition_start == 721);
    CHECK(s.blocks[1].hold_end == 5040);
    CHECK(s.blocks[1].target == 0);
    const std::uint64_t L = transition_length(t, o.epsilon);
    for (const auto& b : s.blocks) {
      CHECK(b.hold_start - b.transition_start + 1 == L);
      CHECK(x_block_end_bound(b, L) >= 0.8);
    }
    CHECK_THROWS_AS(make_x_schedule(t, targets, 10, o), ScheduleError);
  }

  TEST_CASE("FM schedule assigns targets by two-adic valuation") {
    TreeConfig t = binary();
    for (std::size_t K = 1; K <= 4; ++K) {
      auto targets = units(t, K);
      Schedule s = make_fm_schedule(t, targets, std::vector<Rational>(K, Rational(1, 100)), 8, 1024);
      CHECK(s.blocks.size() == 128);
      for (std::size_t i = 0; i < s.blocks.size(); ++i) {
        const auto& b = s.blocks[i];
        CHECK(b.hold_start == 8 * (i + 1));
        CHECK(b.hold_length() == 1);
        CHECK(b.target == std::min<std::size_t>(two_adic_valuation(i + 1), K - 1));
      }
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t e = k + 1 < K ? k + 1 : K - 1;
        CHECK(counting_density(s.hold_levels(k), 1024) == Rational(1, 8 << e));
      }
    }
  }

  TEST_CASE("FM stride below the transition budget is infeasible") {
    TreeConfig t = binary();
    auto targets = units(t, 2);
    CHECK_THROWS_AS(make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 6, 512),
                    ScheduleError);
    CHECK_THROWS_AS(make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 8, 10),
                    ScheduleError);
  }

  TEST_CASE("validation rejects broken block layouts") {
    TreeConfig t = binary(100);
    auto targets = units(t, 1);
    Schedule s;
    s.horizon = 20;
    Block b;
    b.target = 0;
    b.epsilon = Rational(1, 10);
    b.transition_start = 1;
    b.transition_end = 2;
    b.hold_start = 3;
    b.hold_end = 10;
    s.blocks = {b};
    CHECK_THROWS_AS(validate(t, s, targets), ScheduleError);  // budget 4, block gives 3
    s.blocks[0].transition_end = 3;
    s.blocks[0].hold_start = 4;
    CHECK_NOTHROW(validate(t, s, targets));
    s.blocks[0].hold_end = 30;
    CHECK_THROWS_AS(validate(t, s, targets), ScheduleError);
    s.horizon = 200;
    CHECK_THROWS_AS(validate(t, s, targets), CapError);
  }

  TEST_CASE("block lookup") {
    TreeConfig t = binary();
    auto targets = units(t, 2);
    Schedule s = make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 8, 64);
    CHECK(s.block_at(8) == std::optional<std::size_t>(0));
    CHECK(s.block_at(9) == std::optional<std::size_t>(1));
    CHECK(s.tolerance(1) == Rational(1, 100));
  }
}
