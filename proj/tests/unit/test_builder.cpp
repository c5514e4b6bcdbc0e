#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "utree/errors.hpp"

using namespace utree;
using namespace utree::testing;

namespace {

Schedule one_block(std::uint64_t horizon, std::uint64_t start, std::uint64_t hold_start,
                   const Rational& eps) {
  Schedule s;
  s.horizon = horizon;
  Block b;
  b.target = 0;
  b.epsilon = eps;
  b.transition_start = start;
  b.transition_end = hold_start - 1;
  b.hold_start = hold_start;
  b.hold_end = horizon;
  s.blocks = {b};
  return s;
}

std::vector<Target> unit_pair() {
  return {Target{SimpleFunction{1, {ev(1), ev(0)}}, "a"}, Target{SimpleFunction{1, {ev(0), ev(1)}}, "b"}};
}

bool all_pass(const VerifyReport& v) {
  for (const auto& c : v.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.pass);
  }
  return v.pass();
}

}  // namespace

TEST_SUITE("builder") {
  TEST_CASE("contraction oracle on the binary tree") {
    TreeConfig t = binary();
    std::vector<Target> target{Target{SimpleFunction{1, {ev(1), ev(0)}}, "e1"}};
    Schedule s = one_block(8, 1, 3, Rational(1, 5));
    BuildResult r = build(t, target, s, ev(0));
    REQUIRE(r.log.size() == 8);
    CHECK(r.log[0].distance[0] == 0.25);
    CHECK(r.log[1].distance[0] == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(r.log[2].distance[0] == doctest::Approx(1.0 / 10).epsilon(1e-15));
    LevelLayout layout(t, 3);
    // lowest-index correction: the forced value sits 1, 2, 4 below its target
    const long forced[] = {0, -1, -3};
    for (int n = 1; n <= 3; ++n) {
      CHECK(r.prefix.at(layout, n, 0) == ev(forced[n - 1]));
      CHECK(*r.log[n - 1].unmatched == Rational(1, 1 << n));
    }
    BuildOptions right;
    right.policy = CorrectionPolicy::fixed(1);
    BuildResult rr = build(t, target, s, ev(0), right);
    const long forced_right[] = {-1, -2, -4};
    for (int n = 1; n <= 3; ++n) {
      CHECK(rr.prefix.at(layout, n, layout.level_size(n) - 1) == ev(forced_right[n - 1]));
      CHECK(rr.log[n - 1].distance[0] == r.log[n - 1].distance[0]);
    }
    for (const auto& rec : r.log) CHECK(rec.distance[0] <= std::ldexp(1.0, -static_cast<int>(rec.level)));
    CHECK(all_pass(verify(t, target, s, r)));
  }

  TEST_CASE("empty schedule keeps the initial constant") {
    TreeConfig t = binary();
    std::vector<Target> target{Target{SimpleFunction{1, {ev(1), ev(0)}}, "e1"}};
    Schedule s;
    s.horizon = 16;
    BuildResult r = build(t, target, s, ev(3, 1));
    for (const auto& v : r.prefix.values) CHECK(v == ev(3, 1));
    CHECK(r.visits[0].size() == 0);
    CHECK(all_pass(verify(t, target, s, r)));
  }

  TEST_CASE("FM builds visit exactly the scheduled levels") {
    TreeConfig t = binary();
    auto targets = unit_pair();
    Schedule s = make_fm_schedule(t, targets, {Rational(1, 200), Rational(1, 200)}, 8, 512);
    BuildResult r = build(t, targets, s, ev(0));
    CHECK(r.visits[0] == s.hold_levels(0));
    CHECK(r.visits[1] == s.hold_levels(1));
    CHECK(r.audit.pass());
    CHECK(all_pass(verify(t, targets, s, r)));
  }

  TEST_CASE("random targets and trees pass verification") {
    Gen g(77);
    for (const TreeConfig& t : {third(), mixed()}) {
      for (int trial = 0; trial < 3; ++trial) {
        const std::size_t m = static_cast<std::size_t>(g.integer(1, 2));
        std::vector<Target> targets;
        for (int k = 0; k < 2; ++k)
          targets.push_back(Target{g.simple(t, m, static_cast<int>(g.integer(1, 2))), "t" + std::to_string(k)});
        XScheduleOptions o;
        o.epsilon = Rational(1, 4);
        o.first_boundary = 3;
        Schedule s = make_x_schedule(t, targets, 36, o);
        BuildOptions bo;
        bo.dense_depth = 7;
        BuildResult r = build(t, targets, s, g.value(m), bo);
        CHECK(is_harmonic(t, r.prefix).pass());
        CHECK(all_pass(verify(t, targets, s, r)));
        for (std::size_t k = 0; k < targets.size(); ++k) {
          const IndexSet holds = s.hold_levels(k);
          for (auto n : holds.indices()) CHECK(r.visits[k].contains(n));
        }
      }
    }
  }

  TEST_CASE("logged distances agree with direct projections") {
    Gen g(78);
    TreeConfig t = mixed();
    std::vector<Target> targets{Target{g.simple(t, 1, 2), "x"}};
    Schedule s = make_x_schedule(t, targets, 9, {Rational(1, 3), 2, 0});
    BuildOptions bo;
    bo.dense_depth = 9;
    BuildResult r = build(t, targets, s, ev(0), bo);
    for (int n = 1; n <= 9; ++n) {
      const double direct = probability_metric(t, level_projection(t, r.prefix, n), targets[0].h);
      CHECK(std::abs(direct - r.log[n - 1].distance[0]) <= 1e-12);
    }
  }

  TEST_CASE("float mode follows the exact build") {
    TreeConfig t = binary();
    auto targets = unit_pair();
    std::vector<Target> ft = targets;
    for (auto& x : ft)
      for (auto& v : x.h.values) v = v.to_floating();
    Schedule s = make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 8, 32);
    BuildResult exact = build(t, targets, s, ev(0));
    BuildResult approx = build(t, ft, s, ev(0).to_floating());
    for (std::size_t i = 0; i < exact.log.size(); ++i)
      CHECK(std::abs(exact.log[i].distance[0] - approx.log[i].distance[0]) <= 1e-9);
    CHECK(approx.visits == exact.visits);
    CHECK(all_pass(verify(t, ft, s, approx)));
  }

  TEST_CASE("float audit flags precision loss on deep correction paths") {
    TreeConfig t = binary();
    std::vector<Target> ft = unit_pair();
    for (auto& x : ft)
      for (auto& v : x.h.values) v = v.to_floating();
    Schedule s = make_fm_schedule(t, ft, {Rational(1, 100), Rational(1, 100)}, 8, 128);
    BuildResult approx = build(t, ft, s, ev(0).to_floating());
    CHECK_FALSE(approx.audit.pass());
    CHECK_FALSE(verify(t, ft, s, approx).pass());
  }

  TEST_CASE("shape mismatches are rejected") {
    TreeConfig t = binary();
    auto targets = unit_pair();
    Schedule s = make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 8, 64);
    CHECK_THROWS_AS(build(t, targets, s, Value::zero(2, Mode::exact)), ModeError);
    CHECK_THROWS_AS(build(t, targets, s, ev(0).to_floating()), ModeError);
  }
}
