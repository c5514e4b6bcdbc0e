#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "support.hpp"
#include "utree/cli.hpp"

using namespace utree;
using namespace utree::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::vector<Target> unit_pair() {
  return {Target{SimpleFunction{1, {ev(1), ev(0)}}, "h1"}, Target{SimpleFunction{1, {ev(0), ev(1)}}, "h2"}};
}

Outcome measure_exactness() {
  Outcome o;
  for (const TreeConfig& t : {binary(), third()}) {
    for (int n = 0; n <= 12; ++n) {
      Rational sum = 0;
      for (const auto& v : level(t, n)) sum += sector_measure(t, v);
      o.require(sum == 1, "level " + std::to_string(n) + " sums to " + format_rational(sum));
      o.require(consistency_check(t, n).pass(), "consistency fails at level " + std::to_string(n));
    }
  }
  o.detail = o.pass ? "binary and (1/3,2/3) trees, levels 0..12" : o.detail;
  return o;
}

Outcome metric_suite() {
  Outcome o;
  Gen g(20260101);
  std::size_t triples = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const TreeConfig t = trial % 2 == 0 ? binary() : third();
    const std::size_t m = static_cast<std::size_t>(g.integer(1, 3));
    const SimpleFunction a = g.simple(t, m, static_cast<int>(g.integer(0, 6)));
    const SimpleFunction b =
        trial % 3 == 0 ? g.simple(t, m, static_cast<int>(g.integer(0, 6))) : g.near(t, refine(t, a, 6));
    const SimpleFunction c = g.simple(t, m, static_cast<int>(g.integer(0, 6)));
    const double ab = probability_metric(t, a, b), ba = probability_metric(t, b, a);
    const double ac = probability_metric(t, a, c), bc = probability_metric(t, b, c);
    const std::string at = "triple " + std::to_string(trial);
    o.require(ab == ba, at + ": symmetry");
    o.require(ac <= ab + bc + 1e-12, at + ": triangle");
    o.require(probability_metric(t, add(t, a, c), add(t, b, c)) == ab, at + ": translation invariance");
    o.require(probability_metric(t, refine(t, a, 6), refine(t, b, 6)) == ab, at + ": refinement invariance");
    const CRational k = g.complex(4, 3);
    const double scaled = probability_metric(t, scale(k, a), scale(k, b));
    o.require(scaled <= std::max(1.0, std::abs(k.to_complex())) * ab + 1e-12, at + ": scaling bound");
    ++triples;
  }
  if (o.pass) o.detail = std::to_string(triples) + " random triples, m in {1,2,3}, levels <= 6";
  return o;
}

Outcome harmonicity() {
  Outcome o;
  const TreeConfig t = binary();
  Gen g(3);
  std::size_t checked = 0;
  auto check = [&](const HarmonicTruncation& f, const std::string& what) {
    o.require(f.depth >= 12, what + ": depth " + std::to_string(f.depth));
    HarmonicityReport r = is_harmonic(t, f);
    o.require(r.pass(), what + ": harmonic identity fails");
    o.require(martingale_check(t, f).pass(), what + ": martingale identity fails");
    ++checked;
  };
  HarmonicTruncation lift = harmonic_lift(t, g.simple(t, 2, 3), 4);
  check(constant_extend(t, lift, 12), "constant_extend");
  HarmonicTruncation f = lift;
  while (f.depth < 12) f = corrected_extend(t, f, g.simple(t, 2, f.depth + 1)).f;
  check(f, "corrected_extend");

  auto targets = unit_pair();
  Schedule s = make_fm_schedule(t, targets, {Rational(1, 100), Rational(1, 100)}, 8, 64);
  check(build(t, targets, s, ev(0)).prefix, "build");

  std::vector<JointTarget> jts = pattern_targets(targets, 3, 2);
  std::vector<Target> proxy{Target{jts[0].parts[2], "h1"}, Target{jts[1].parts[2], "h2"}};
  JointFamily fam = joint_build(t, jts, make_x_schedule(t, proxy, 64, {Rational(1, 10), 1, 1}));
  for (std::size_t i = 0; i < 3; ++i) check(fam.coordinate(i), "joint_build coordinate " + std::to_string(i + 1));
  Combo c{{cr(2, -1), cr(-3), cr(0, 4)}};
  check(combo(fam, c), "combo");
  if (o.pass) o.detail = std::to_string(checked) + " truncations harmonic and martingale at depth 12";
  return o;
}

// exact P between a real-valued level projection and a real target
Rational exact_probability(const TreeConfig& t, const SimpleFunction& f, const SimpleFunction& h) {
  LevelLayout layout(t, f.level);
  const SimpleFunction r = refine(t, h, f.level);
  Rational sum = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    Rational d = abs(f.values[i].exact()[0].re - r.values[i].exact()[0].re);
    sum += layout.measure(f.level, i) * d / (1 + d);
  }
  return sum;
}

Outcome builder_contraction() {
  Outcome o;
  const TreeConfig t = binary();
  std::vector<Target> target{Target{SimpleFunction{1, {ev(1), ev(0)}}, "e1"}};
  Schedule s;
  s.horizon = 40;
  Block b;
  b.target = 0;
  b.epsilon = Rational(1, 5);
  b.transition_start = 1;
  b.transition_end = 2;
  b.hold_start = 3;
  b.hold_end = 40;
  s.blocks = {b};
  BuildResult r = build(t, target, s, ev(0));
  const Rational expect[] = {Rational(1, 4), Rational(1, 6), Rational(1, 10)};
  for (int n = 1; n <= 3; ++n) {
    const Rational p = exact_probability(t, level_projection(t, r.prefix, n), target[0].h);
    o.require(p == expect[n - 1], "level " + std::to_string(n) + ": P = " + format_rational(p));
    const double logged = r.log[n - 1].distance[0];
    o.require(std::abs(logged - to_double(expect[n - 1])) <= 0x1p-52 * logged,
              "logged P differs at level " + std::to_string(n));
  }
  for (const auto& rec : r.log)
    if (b.in_hold(rec.level))
      o.require(rec.distance[0] <= std::ldexp(1.0, -static_cast<int>(rec.level - b.transition_start + 1)),
                "hold level " + std::to_string(rec.level) + " above 2^-j");
  o.require(verify(t, target, s, r).pass(), "verify fails");
  if (o.pass) o.detail = "P = 1/4, 1/6, 1/10 exactly (logged doubles within 1 ulp); 38 hold levels within 2^-j";
  return o;
}

Outcome flattening() {
  Outcome o;
  const TreeConfig t = binary();
  Gen g(5);
  for (std::uint64_t n = 1; n <= 8; ++n) {
    const int N = flatten_depth(t, n);
    const int depth = N + 4;
    HarmonicTruncation f = harmonic_lift(t, g.simple(t, 1, 2), depth);
    HarmonicTruncation phi = harmonic_lift(t, dense_family(t, 1, n + 10), depth);
    FlattenResult r = flatten_perturbation(t, f, phi, n);
    const std::string at = "n = " + std::to_string(n);
    const SimpleFunction base = level_projection(t, r.g, N);
    for (int k = N + 1; k <= r.g.depth; ++k)
      o.require(same_element(t, level_projection(t, r.g, k), refine(t, base, k)), at + ": level " + std::to_string(k) + " not flat");
    const double bound = 1.0 / static_cast<double>(n);
    o.require(pointwise_metric(t, subtract(phi, f), r.g).hi < bound, at + ": rho(phi - f, g)");
    o.require(pointwise_metric(t, add(f, r.g), phi).hi < bound, at + ": rho(f + g, phi)");
  }
  if (o.pass) o.detail = "n = 1..8: flat below N(n), both distances < 1/n";
  return o;
}

Outcome x_density() {
  Outcome o;
  const TreeConfig t = binary();
  auto targets = unit_pair();
  XScheduleOptions x;
  x.skip_until = 120;
  Schedule s = make_x_schedule(t, targets, 5040, x);
  BuildResult r = build(t, targets, s, ev(0));
  VerifyReport v = verify(t, targets, s, r);
  o.require(v.pass(), "verify fails");
  std::ostringstream d;
  for (const auto& b : s.blocks) {
    const Rational dens = counting_density(r.visits[b.target], b.hold_end);
    o.require(dens >= Rational(4, 5), "block ending at " + std::to_string(b.hold_end) + ": density " + format_rational(dens));
    for (auto n = b.hold_start; n <= b.hold_end; ++n)
      o.require(r.log[n - 1].distance[b.target] < 0.1, "hold level " + std::to_string(n) + " misses 1/10");
    d << targets[b.target].label << "@" << b.hold_end << " " << to_double(dens) << " ";
  }
  if (o.pass) o.detail = "block-end densities " + d.str();
  return o;
}

Outcome fm_density() {
  Outcome o;
  const TreeConfig t = binary();
  auto targets = unit_pair();
  const std::uint64_t H = 8192;
  Schedule s = make_fm_schedule(t, targets, {Rational(1, 200), Rational(1, 200)}, 8, H);
  BuildResult r = build(t, targets, s, ev(0));
  o.require(verify(t, targets, s, r).pass(), "verify fails");
  for (std::size_t k = 0; k < 2; ++k) {
    o.require(r.visits[k] == s.hold_levels(k), "target " + std::to_string(k + 1) + ": realized set differs");
    o.require(counting_density(r.visits[k], H) == Rational(1, 16), "target " + std::to_string(k + 1) + ": density");
  }
  for (auto n : r.visits[0].indices()) o.require(!r.visits[1].contains(n), "sets intersect");
  if (o.pass)
    o.detail = "realized = scheduled, densities 1/16 and 1/16, disjoint (" + std::to_string(r.visits[0].size()) +
               " + " + std::to_string(r.visits[1].size()) + " visits)";
  return o;
}

SimpleFunction combined_target(const TreeConfig& t, const JointTarget& jt, const Combo& c, int n) {
  SimpleFunction out = SimpleFunction::constant(t, n, Value::zero(1, Mode::exact));
  for (std::size_t i = 0; i < c.s(); ++i) out = add(t, out, scale(c.a[i], refine(t, jt.parts[i], n)));
  return out;
}

Outcome span_certificates_check() {
  Outcome o;
  const TreeConfig t = binary();
  const std::size_t J = 3;
  std::vector<Target> base = cli::unit_targets(t, J, 1, Mode::exact);
  std::vector<JointTarget> jts;
  std::vector<Target> proxy;
  for (std::size_t k = 0; k < J; ++k) {
    jts.push_back(pattern_targets(std::span<const Target>(&base[k], 1), J, k).front());
    proxy.push_back(base[k]);
  }
  Schedule s = make_x_schedule(t, proxy, 1000, {Rational(1, 10), 1, 1});
  JointOptions opt;
  opt.combos = cli::random_combos(50, J, 4, 8);
  JointFamily fam = joint_build(t, jts, s, opt);
  o.require(fam.build.audit.pass(), "stacked build audit fails");
  std::size_t levels = 0, unsound = 0, direct = 0;
  for (std::size_t c = 0; c < fam.certificates.size(); ++c) {
    const SpanCertificate& cert = fam.certificates[c];
    unsound += cert.unsound;
    levels += cert.levels.size();
    const HarmonicTruncation h = combo(fam, opt.combos[c]);
    for (const auto& e : cert.entries) {
      o.require(e.measured < 0.1 && e.measured <= e.predicted_bound + 1e-12,
                "unsound level " + std::to_string(e.level) + " for " + cert.combo.to_string());
      if (e.level > static_cast<std::uint64_t>(h.depth)) continue;
      const int n = static_cast<int>(e.level);
      const double p = probability_metric(t, level_projection(t, h, n),
                                          combined_target(t, jts[s.blocks[*s.block_at(e.level)].target], opt.combos[c], n));
      o.require(std::abs(p - e.measured) <= 1e-12, "direct P differs at level " + std::to_string(n));
      ++direct;
    }
  }
  o.require(unsound == 0, std::to_string(unsound) + " unsound certificates");
  if (o.pass)
    o.detail = "50 combos, " + std::to_string(levels) + " certified levels, 0 unsound, " + std::to_string(direct) +
               " prefix levels recomputed directly";
  return o;
}

Outcome demo() {
  Outcome o;
  cli::DemoArgs args;
  args.config = fixture("binary.json");
  args.horizon = 5040;
  std::ostringstream out, err;
  const int code = cli::cmd_demo_double_genericity(args, out, err);
  o.require(code == 0, "exit code " + std::to_string(code) + " " + err.str());
  const std::string report = out.str();
  o.require(report.find("FM floors") != std::string::npos, "report lacks FM floors");
  o.require(report.find("X block-end densities") != std::string::npos, "report lacks X block-end densities");
  o.require(report.find("result: PASS") != std::string::npos, "report does not pass");
  if (o.pass) o.detail = "exit 0, report shows FM floors and X block-end densities";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "measure exactness", 5, measure_exactness},
      {2, "metric suite", 30, metric_suite},
      {3, "harmonicity and martingale", 60, harmonicity},
      {4, "builder contraction", 5, builder_contraction},
      {5, "flattening operator", 10, flattening},
      {6, "X-schedule density", 120, x_density},
      {7, "FM-schedule density", 120, fm_density},
      {8, "span certificates", 120, span_certificates_check},
      {9, "double-genericity demo", 300, demo},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d %s (%.2f s, limit %.0f s): %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_s, o.detail.c_str(), in_time ? "" : " [over time limit]");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
