#include <doctest.h>

#include "support.hpp"
#include "utree/errors.hpp"

using namespace utree;
using namespace utree::testing;

namespace {

template <class T, class Parse>
void round_trip(const T& x, Parse parse) {
  const Json j = to_json(x);
  const Json back = to_json(parse(Json::parse(j.dump())));
  CHECK(back == j);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("tree configs load from fixtures and round trip") {
    TreeConfig b = tree_from_json(read_json_file(fixture("binary.json")));
    CHECK(b.depth_cap() == 10000);
    CHECK(b.contraction() == Rational(1, 2));
    TreeConfig p = tree_from_json(read_json_file(fixture("periodic.json")));
    CHECK(level(p, 2).size() == 6);
    round_trip(b, tree_from_json);
    round_trip(p, tree_from_json);
    round_trip(mixed(), tree_from_json);
    std::map<VertexId, LocalRule> nodes;
    nodes.emplace(VertexId({0}), LocalRule::make({Rational(1, 3), Rational(2, 3)}, {cr(2, 1), cr(-1, -1)}, "[0]"));
    round_trip(TreeConfig::explicit_prefix(nodes, {LocalRule::make({Rational(1, 2), Rational(1, 2)}, {}, "[]")}, 9),
               tree_from_json);
  }

  TEST_CASE("bad documents raise the right errors") {
    CHECK_THROWS_AS(read_json_file(fixture("malformed.json")), ParseError);
    CHECK_THROWS_AS(read_json_file(fixture("missing.json")), ParseError);
    CHECK_THROWS_AS(tree_from_json(read_json_file(fixture("bad_weights.json"))), ValidationError);
    CHECK_THROWS_AS(tree_from_json(Json::parse(R"({"rule": {"kind": "spiral"}, "q": ["1/2","1/2"], "depth_cap": 3})")),
                    ParseError);
    CHECK_THROWS_AS(tree_from_json(Json::parse(R"({"rule": {"kind": "uniform"}, "q": ["1/2","1/2"]})")), ParseError);
    CHECK_THROWS_AS(rational_from_json(Json(0.5)), ParseError);
    CHECK_THROWS_AS(value_from_json(Json::parse(R"([["1","0"],["2","0"]])"), 3, Mode::exact), ParseError);
  }

  TEST_CASE("values and functions round trip") {
    Gen g(55);
    TreeConfig t = mixed();
    for (int i = 0; i < 20; ++i) {
      const std::size_t m = static_cast<std::size_t>(g.integer(1, 3));
      SimpleFunction f = g.simple(t, m, static_cast<int>(g.integer(0, 3)));
      round_trip(f, simple_from_json);
      round_trip(harmonic_lift(t, f, f.level + 1), harmonic_from_json);
      const Value v = g.value(m);
      CHECK(value_from_json(to_json(v), m, Mode::exact) == v);
    }
    CHECK(value_from_json(Json::parse(R"(["1/2","3"])"), 1, Mode::exact) ==
          Value(std::vector<CRational>{CRational(Rational(1, 2), Rational(3))}));
    SimpleFunction fl = SimpleFunction::constant(t, 1, ev(1, 2).to_floating());
    round_trip(fl, simple_from_json);
  }

  TEST_CASE("schedules, builds and certificates round trip") {
    TreeConfig t = binary();
    std::vector<Target> targets{Target{SimpleFunction{1, {ev(1), ev(0)}}, "a"},
                                Target{SimpleFunction{1, {ev(0), ev(1)}}, "b"}};
    round_trip(targets, targets_from_json);
    Schedule s = make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 8, 64);
    round_trip(s, schedule_from_json);
    BuildResult r = build(t, targets, s, ev(0));
    round_trip(r, build_from_json);
    round_trip(r.visits[0], index_set_from_json);
    round_trip(density_profile(r.visits[1], 10), density_from_json);
    auto jts = pattern_targets(targets, 2, 1);
    JointOptions o;
    o.combos = {Combo{{cr(1, -2), cr(Rational(3, 2))}}};
    std::vector<Target> proxy{Target{jts[0].parts[1], "a"}, Target{jts[1].parts[1], "b"}};
    JointFamily fam = joint_build(t, jts, make_x_schedule(t, proxy, 40, {Rational(1, 10), 1, 1}), o);
    round_trip(fam.certificates.front(), certificate_from_json);
    round_trip(o.combos.front(), combo_from_json);
  }

  TEST_CASE("manifest round trip and file output") {
    RunManifest m;
    m.config_path = "c.json";
    m.command = "build";
    m.parameters = {{"horizon", "64"}};
    m.outputs = {"build.json"};
    m.seed = 3;
    m.hashes = {{"build.json", "00ff"}};
    round_trip(m, manifest_from_json);
    const auto dir = std::filesystem::temp_directory_path() / "utree_io_test";
    write_text_file(dir / "x" / "m.json", dump(to_json(m)));
    CHECK(manifest_from_json(read_json_file(dir / "x" / "m.json")).seed == 3);
    std::filesystem::remove_all(dir);
  }
}
