#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "utree/cli.hpp"
#include "utree/errors.hpp"

namespace utree::cli {

namespace {

namespace fs = std::filesystem;

const Rational kFmEpsilon{1, 100};
constexpr std::uint64_t kFmStride = 8;
constexpr std::uint64_t kXSkip = 120;
constexpr long kCoefficientBound = 4;

std::string num(double x, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

struct Family {
  std::string name;
  std::unique_ptr<JointFamily> fam;
  VerifyReport verify;
  std::size_t unsound = 0;
  std::size_t certified_levels = 0;
};

// joint target k carries base target k in coordinate k mod J, zeros elsewhere
std::vector<JointTarget> rotating_targets(const std::vector<Target>& base, std::size_t J) {
  std::vector<JointTarget> out;
  for (std::size_t k = 0; k < base.size(); ++k) {
    auto one = pattern_targets(std::span<const Target>(&base[k], 1), J, k % J);
    out.push_back(std::move(one.front()));
  }
  return out;
}

// the nonzero part of each joint target drives the schedule
std::vector<Target> proxies(const std::vector<JointTarget>& jts) {
  std::vector<Target> out;
  for (const auto& jt : jts) {
    std::size_t i = jt.parts.size() - 1;
    for (std::size_t p = 0; p < jt.parts.size(); ++p)
      if (std::any_of(jt.parts[p].values.begin(), jt.parts[p].values.end(),
                      [](const Value& v) { return !v.is_zero(); }))
        i = p;
    out.push_back(Target{jt.parts[i], jt.label});
  }
  return out;
}

// first level a joint schedule may correct
std::uint64_t joint_first_level(const TreeConfig& config, std::size_t J,
                                const std::vector<JointTarget>& jts) {
  int flat = 0;
  for (std::size_t i = 0; i < J; ++i) flat = std::max(flat, flatten_depth(config, i + 1));
  int A = std::max(config.homogeneous_depth(), flat);
  for (const auto& jt : jts)
    for (const auto& p : jt.parts) A = std::max(A, p.level);
  return static_cast<std::uint64_t>(std::max(flat + 1, A));
}

Schedule family_schedule(const TreeConfig& config, const std::string& kind,
                         const std::vector<JointTarget>& jts, std::size_t J, std::uint64_t horizon,
                         const Rational& eps, std::uint64_t stride, std::uint64_t skip_until) {
  const std::vector<Target> proxy = proxies(jts);
  const std::uint64_t first = joint_first_level(config, J, jts);
  if (kind == "fm")
    return make_fm_schedule(config, proxy, std::vector<Rational>(proxy.size(), eps), stride, horizon,
                            first);
  if (kind == "x") {
    XScheduleOptions x;
    x.epsilon = eps;
    x.skip_until = std::max(skip_until, first - 1);
    return make_x_schedule(config, proxy, horizon, x);
  }
  throw ArgumentError("joint schedules are x or fm, got '" + kind + "'");
}

void run_family(Family& f, const TreeConfig& config, const std::vector<JointTarget>& jts,
                const Schedule& schedule, const std::vector<Combo>& combos,
                const Rational& certificate_eps) {
  JointOptions options;
  options.combos = combos;
  options.certificate_epsilon = certificate_eps;
  f.fam = std::make_unique<JointFamily>(joint_build(config, jts, schedule, options));
  f.verify = verify(config, f.fam->stacked_targets, schedule, f.fam->build);
  for (const auto& c : f.fam->certificates) {
    f.unsound += c.unsound;
    f.certified_levels += c.levels.size();
  }
}

Json certificates_json(const JointFamily& fam) {
  Json out = Json::array();
  for (const auto& c : fam.certificates) out.push_back(to_json(c));
  return out;
}

std::string verify_lines(const VerifyReport& v) {
  std::ostringstream t;
  for (const auto& c : v.checks)
    t << "  " << (c.pass ? "[ok]   " : "[fail] ") << c.name << (c.detail.empty() ? "" : ": " + c.detail)
      << '\n';
  return t.str();
}

std::string certificate_lines(const JointFamily& fam) {
  std::ostringstream t;
  for (const auto& c : fam.certificates) {
    t << "  " << std::left << std::setw(28) << c.combo.to_string() << " certified " << c.levels.size()
      << " unsound " << c.unsound;
    for (std::size_t k = 0; k < c.by_target.size(); ++k) t << " | " << fam.targets[k].label << ' ' << c.by_target[k].size();
    t << '\n';
  }
  return t.str();
}

// FM floor for target k of K: 2^-(k+1)/stride, the last target takes 2^-(K-1)/stride
Rational fm_floor(std::size_t k, std::size_t K, std::uint64_t stride) {
  const std::size_t e = k + 1 < K ? k + 1 : K - 1;
  Rational r(1);
  for (std::size_t i = 0; i < e; ++i) r /= 2;
  return r / Rational(static_cast<long>(stride));
}

Rational density_of(const IndexSet& s, std::uint64_t n) { return counting_density(s, n); }

}  // namespace

int cmd_span(const SpanArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    TreeConfig config = load_config(args.config);
    if (args.coordinates == 0) throw ArgumentError("at least one coordinate is required");
    std::vector<Target> base = load_targets(config, args.targets, args.mode);
    const bool count = args.targets.find_first_not_of("0123456789") == std::string::npos;
    auto jts = count ? rotating_targets(base, args.coordinates)
                     : pattern_targets(base, args.coordinates, args.coordinates - 1);
    const Rational eps = parse_rational(args.epsilon);
    Schedule schedule = family_schedule(config, args.schedule, jts, args.coordinates, args.horizon, eps,
                                        args.stride, 0);
    auto combos = random_combos(args.combos, args.coordinates, kCoefficientBound, args.seed);
    Family f;
    f.name = args.schedule;
    run_family(f, config, jts, schedule, combos, Rational(1, 10));

    RunManifest m;
    if (!args.out.empty()) {
      const fs::path dir = args.out;
      auto put = [&](const std::string& name, const std::string& text) {
        write_text_file(dir / name, text);
        m.outputs.push_back(name);
        m.hashes[name] = sha256_hex(text);
      };
      put("schedule.json", dump(to_json(schedule)));
      put("certificates.json", dump(certificates_json(*f.fam)));
      m.config_path = args.config;
      m.command = "span";
      m.seed = args.seed;
      m.parameters = {{"mode", mode_name(args.mode)},
                      {"horizon", std::to_string(args.horizon)},
                      {"targets", args.targets},
                      {"schedule", args.schedule},
                      {"epsilon", args.epsilon},
                      {"stride", std::to_string(args.stride)},
                      {"coordinates", std::to_string(args.coordinates)},
                      {"combos", std::to_string(args.combos)},
                      {"threads", std::to_string(thread_width())}};
      write_text_file(dir / "manifest.json", dump(to_json(m)));
    }
    out << "joint family: " << args.coordinates << " coordinates, anchor " << f.fam->anchor_depth
        << ", flat depth " << f.fam->flat_depth << ", " << schedule.blocks.size() << " blocks\n";
    out << certificate_lines(*f.fam);
    out << "certified levels " << f.certified_levels << ", unsound " << f.unsound << "\n";
    out << verify_lines(f.verify);
    return f.unsound == 0 && f.verify.pass() ? int(ok) : int(validation_failure);
  });
}

int cmd_demo_double_genericity(const DemoArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    TreeConfig config = load_config(args.config);
    if (args.coordinates == 0) throw ArgumentError("at least one coordinate is required");
    if (args.horizon > static_cast<std::uint64_t>(config.depth_cap()))
      throw CapError("horizon " + std::to_string(args.horizon) + " exceeds depth cap " +
                     std::to_string(config.depth_cap()));
    const std::size_t J = args.coordinates;
    const std::size_t K = args.targets;
    std::vector<Target> base = unit_targets(config, K, 1, Mode::exact);
    auto jts = rotating_targets(base, J);
    // both schedules are checked before any build starts
    Schedule fm = family_schedule(config, "fm", jts, J, args.horizon, kFmEpsilon, kFmStride, 0);
    Schedule xs = family_schedule(config, "x", jts, J, args.horizon, Rational(1, 10), 0, kXSkip);
    const std::uint64_t L = transition_length(config, Rational(1, 10));

    auto combos = random_combos(args.combos, J, kCoefficientBound, args.seed);
    Family f1, f2;
    f1.name = "FM";
    f2.name = "X";
    run_family(f1, config, jts, fm, combos, Rational(1, 10));
    run_family(f2, config, jts, xs, combos, Rational(1, 10));
    const std::uint64_t H = args.horizon;

    std::ostringstream r;
    bool pass = f1.verify.pass() && f2.verify.pass() && f1.unsound == 0 && f2.unsound == 0;
    r << "double genericity demo: horizon " << H << ", " << K << " targets, " << J << " coordinates, "
      << combos.size() << " combos, seed " << args.seed << "\n\n";

    r << "family 1 (FM, stride " << kFmStride << ", tolerance " << format_rational(kFmEpsilon) << ", "
      << fm.blocks.size() << " blocks, anchor " << f1.fam->anchor_depth << ")\n";
    r << verify_lines(f1.verify) << certificate_lines(*f1.fam);
    r << "  FM floors at N = " << H << " (realized density of each combo's certified visits per target)\n";
    for (std::size_t k = 0; k < K; ++k) {
      const Rational floor = fm_floor(k, K, kFmStride);
      const Rational scheduled = density_of(fm.hold_levels(k), H);
      Rational worst(1);
      for (const auto& c : f1.fam->certificates) worst = std::min(worst, density_of(c.by_target[k], H));
      const Rational stacked = density_of(f1.fam->build.visits[k], H);
      const bool ok_k = worst >= floor && stacked >= floor;
      pass = pass && ok_k;
      r << "    " << base[k].label << ": floor " << format_rational(floor) << "  scheduled "
        << format_rational(scheduled) << "  family " << format_rational(stacked) << "  min over combos "
        << format_rational(worst) << " (" << num(to_double(worst)) << ")  " << (ok_k ? "ok" : "BELOW FLOOR")
        << "\n";
    }

    r << "\nfamily 2 (X, blocks N_j = j!, tolerance 1/10, transition " << L << ", skip to " << kXSkip << ", "
      << xs.blocks.size() << " blocks, anchor " << f2.fam->anchor_depth << ")\n";
    r << verify_lines(f2.verify) << certificate_lines(*f2.fam);
    r << "  X block-end densities (scheduled bound, family visits, min over combos)\n";
    std::vector<bool> seen(K, false);
    for (std::size_t b = xs.blocks.size(); b-- > 0;) {
      const Block& blk = xs.blocks[b];
      const std::uint64_t end = blk.hold_end;
      const std::size_t k = blk.target;
      double worst = 1.0;
      for (const auto& c : f2.fam->certificates)
        worst = std::min(worst, to_double(density_of(c.by_target[k], end)));
      const double fam_d = to_double(density_of(f2.fam->build.visits[k], end));
      const double bound = x_block_end_bound(blk, L);
      const bool last_for_target = !seen[k];
      seen[k] = true;
      const bool ok_b = fam_d >= bound - 1e-12 && (!last_for_target || worst >= 0.8);
      pass = pass && ok_b;
      r << "    block " << b + 1 << " (" << blk.transition_start << ".." << end << ") " << base[k].label
        << ": bound " << num(bound) << "  family " << num(fam_d) << "  combos " << num(worst)
        << (ok_b ? "" : "  FAIL") << "\n";
    }

    std::size_t distinct = 0;
    for (const auto& c : combos) {
      HarmonicTruncation a = combo(*f1.fam, c), b = combo(*f2.fam, c);
      if (pointwise_metric(config, a, b).lo > 0.0) ++distinct;
    }
    r << "\nevidence: " << distinct << " of " << combos.size()
      << " nonzero combos differ between the families on the materialized prefix\n";
    r << "\nresult: " << (pass ? "PASS" : "FAIL") << "\n";

    if (!args.out.empty()) {
      const fs::path dir = args.out;
      RunManifest m;
      m.config_path = args.config;
      m.command = "demo";
      m.seed = args.seed;
      m.parameters = {{"horizon", std::to_string(H)},
                      {"targets", std::to_string(K)},
                      {"coordinates", std::to_string(J)},
                      {"combos", std::to_string(args.combos)},
                      {"threads", std::to_string(thread_width())}};
      auto put = [&](const std::string& name, const std::string& text) {
        write_text_file(dir / name, text);
        m.outputs.push_back(name);
        m.hashes[name] = sha256_hex(text);
      };
      for (const Family* f : {&f1, &f2}) {
        const std::string tag = f == &f1 ? "fm" : "x";
        put(tag + "_schedule.json", dump(to_json(f->fam->schedule)));
        put(tag + "_build.json", dump(to_json(f->fam->build)));
        put(tag + "_certificates.json", dump(certificates_json(*f->fam)));
        std::ostringstream tables;
        for (std::size_t k = 0; k < f->verify.densities.size(); ++k)
          tables << "# " << f->name << " family, target " << base[k].label << "\n"
                 << f->verify.densities[k].table();
        put(tag + "_density.txt", tables.str());
      }
      put("report.txt", r.str());
      write_text_file(dir / "manifest.json", dump(to_json(m)));
    }
    out << r.str();
    return pass ? int(ok) : int(validation_failure);
  });
}

}  // namespace utree::cli
