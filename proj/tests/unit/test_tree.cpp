#include <doctest.h>

#include "support.hpp"
#include "utree/errors.hpp"

using namespace utree;
using namespace utree::testing;

TEST_SUITE("tree") {
  TEST_CASE("breadth-first index") {
    TreeConfig t = binary();
    CHECK(bfs_index(t, VertexId()) == 1);
    CHECK(bfs_index(t, VertexId({1})) == 3);
    CHECK(bfs_index(t, VertexId({0, 1})) == 5);
    CHECK(bfs_index(t, VertexId({1, 1, 1})) == 15);
  }

  TEST_CASE("flattening depth") {
    TreeConfig t = binary();
    CHECK(flatten_depth(t, 1) == 1);
    CHECK(flatten_depth(t, 4) == 2);
  }

  TEST_CASE("addresses outside the tree") {
    TreeConfig t = binary(8);
    CHECK_THROWS_AS(t.check_address(VertexId({0, 2})), AddressError);
    CHECK_NOTHROW(t.check_address(VertexId({1, 0})));
    CHECK_THROWS_AS(level(t, 9), CapError);
  }

  TEST_CASE("weights are validated") {
    CHECK_THROWS_AS(LocalRule::make({Rational(1, 2)}, {}, "[]"), ValidationError);
    CHECK_THROWS_AS(LocalRule::make({Rational(49, 100), Rational(1, 2)}, {}, "[]"), ValidationError);
    CHECK_THROWS_AS(LocalRule::make({Rational(3, 2), Rational(-1, 2)}, {}, "[]"), ValidationError);
    CHECK_THROWS_AS(LocalRule::make({Rational(1, 2), Rational(1, 2)}, {cr(1), cr(1)}, "[]"),
                    ValidationError);
    CHECK_NOTHROW(LocalRule::make({Rational(1, 2), Rational(1, 2)}, {cr(2, 1), cr(-1, -1)}, "[]"));
    try {
      LocalRule::make({Rational(49, 100), Rational(1, 2)}, {}, "[0,1]");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.vertex() == "[0,1]");
    }
  }

  TEST_CASE("periodic branching and explicit overrides") {
    TreeConfig p = mixed();
    CHECK(level(p, 1).size() == 2);
    CHECK(level(p, 2).size() == 6);
    CHECK(level(p, 3).size() == 12);
    std::map<VertexId, LocalRule> nodes;
    nodes.emplace(VertexId({1}), LocalRule::make({Rational(1, 4), Rational(1, 4), Rational(1, 2)}, {}, "[1]"));
    TreeConfig e = TreeConfig::explicit_prefix(nodes, {LocalRule::make({Rational(1, 2), Rational(1, 2)}, {}, "[]")}, 10);
    CHECK(level(e, 2).size() == 5);
    CHECK(sector_measure(e, VertexId({1, 2})) == Rational(1, 4));
    CHECK(e.homogeneous_depth() >= 2);
  }

  TEST_CASE("level layout addressing matches vertex ids") {
    TreeConfig p = mixed();
    LevelLayout layout(p, 4);
    for (int n = 1; n <= 4; ++n)
      for (std::size_t i = 0; i < layout.level_size(n); ++i) {
        VertexId v = layout.vertex(n, i);
        CHECK(layout.index_of(v) == i);
        CHECK(layout.vertex(n - 1, layout.parent(n, i)) == v.parent());
        CHECK(layout.measure(n, i) == sector_measure(p, v));
      }
  }
}
