#include "utree/cli.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "utree/errors.hpp"

namespace utree::cli {

namespace fs = std::filesystem;

TreeConfig load_config(const std::string& path) {
  TreeConfig config = tree_from_json(read_json_file(path));
  if (const char* cap = std::getenv("UTREE_DEPTH_CAP")) {
    try {
      return config.with_depth_cap(std::stoi(cap));
    } catch (const std::logic_error&) {
      throw ArgumentError(std::string("UTREE_DEPTH_CAP is not a number: ") + cap);
    }
  }
  return config;
}

unsigned thread_width() {
  if (const char* t = std::getenv("UTREE_THREADS")) {
    const long v = std::strtol(t, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw ArgumentError("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::vector<Target> unit_targets(const TreeConfig& config, std::size_t k, std::size_t m, Mode mode) {
  if (k == 0) throw ArgumentError("at least one target is required");
  const std::size_t b = config.rule_at(VertexId()).branching();
  std::vector<Target> out;
  for (std::size_t t = 0; t < k; ++t) {
    SimpleFunction f{1, {}};
    for (std::size_t x = 0; x < b; ++x)
      f.values.push_back(Value::constant(m, CRational(x == t % b ? 1 : 0), mode));
    out.push_back(Target{std::move(f), "h" + std::to_string(t + 1)});
  }
  return out;
}

std::vector<Target> load_targets(const TreeConfig& config, const std::string& spec, Mode mode) {
  if (!spec.empty() && spec.find_first_not_of("0123456789") == std::string::npos)
    return unit_targets(config, std::stoul(spec), 1, mode);
  std::vector<Target> targets = targets_from_json(read_json_file(spec));
  if (mode == Mode::floating)
    for (auto& t : targets)
      for (auto& v : t.h.values) v = v.to_floating();
  return targets;
}

std::vector<Combo> random_combos(std::size_t count, std::size_t max_s, long bound,
                                 std::uint64_t seed) {
  if (max_s == 0) throw ArgumentError("combos need at least one coefficient");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(1, max_s);
  std::uniform_int_distribution<long> part(-bound, bound);
  std::vector<Combo> out;
  for (std::size_t c = 0; c < count; ++c) {
    Combo combo;
    const std::size_t s = size(rng);
    for (std::size_t i = 0; i < s; ++i) {
      // keep |a_i| <= bound
      long re = part(rng), im = part(rng);
      while (re * re + im * im > bound * bound) {
        re = part(rng);
        im = part(rng);
      }
      combo.a.emplace_back(Rational(re), Rational(im));
    }
    if (combo.a.back().is_zero()) combo.a.back() = CRational(1);
    out.push_back(std::move(combo));
  }
  return out;
}

int guarded(std::ostream& err, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\noffending vertex " << e.vertex() << "\n";
    return validation_failure;
  } catch (const ScheduleError& e) {
    err << "infeasible schedule: " << e.what() << "\n";
    return infeasible;
  } catch (const CapError& e) {
    err << "depth cap: " << e.what() << "\n";
    return infeasible;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return parse_failure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return parse_failure;
  } catch (const nlohmann::json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return parse_failure;
  }
}

namespace {

struct Outputs {
  fs::path dir;
  RunManifest manifest;

  void write(const std::string& name, const std::string& text) {
    if (dir.empty()) return;
    write_text_file(dir / name, text);
    manifest.outputs.push_back(name);
    manifest.hashes[name] = sha256_hex(text);
  }
  void finish() {
    if (dir.empty()) return;
    write_text_file(dir / "manifest.json", dump(to_json(manifest)));
  }
};

Outputs start_outputs(const std::string& out, const std::string& config, const std::string& command,
                      std::uint64_t seed) {
  Outputs o;
  o.dir = out;
  o.manifest.config_path = config;
  o.manifest.command = command;
  o.manifest.seed = seed;
  o.manifest.parameters["threads"] = std::to_string(thread_width());
  return o;
}

std::string exact_text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trace_text(const BuildResult& r) {
  std::ostringstream t;
  t << "# level block distance_per_target unmatched\n";
  for (const auto& rec : r.log) {
    t << rec.level << ' ' << (rec.block ? std::to_string(*rec.block + 1) : "-");
    for (double d : rec.distance) t << ' ' << exact_text(d);
    t << ' ' << (rec.unmatched ? format_rational(*rec.unmatched) : "-") << '\n';
  }
  return t.str();
}

std::string verify_text(const VerifyReport& v) {
  std::ostringstream t;
  for (const auto& c : v.checks)
    t << (c.pass ? "[ok]   " : "[fail] ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  return t.str();
}

}  // namespace

int cmd_tree_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    TreeConfig config = load_config(config_path);
    // deeper levels repeat the per-depth rules already covered
    const int period = static_cast<int>(config.phases().size());
    const int last = std::min(config.depth_cap(), config.homogeneous_depth() + period + 1);
    std::size_t vertices = 0;
    for (int n = 0; n <= last; ++n) {
      ConsistencyReport r = consistency_check(config, n);
      vertices += r.vertices_checked;
      if (!r.pass()) {
        const auto& v = r.violations.front();
        err << "consistency violation at vertex " << v.vertex.to_string() << ": measure "
            << format_rational(v.parent_measure) << " vs children " << format_rational(v.children_sum)
            << "\n";
        return int(validation_failure);
      }
    }
    out << "ok: levels 0.." << last << " consistent (" << vertices << " vertices), contraction "
        << format_rational(config.contraction()) << ", depth cap " << config.depth_cap() << "\n";
    return int(ok);
  });
}

int cmd_metric(const MetricArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    TreeConfig config = load_config(args.config);
    const Json a = read_json_file(args.first);
    const Json b = read_json_file(args.second);
    const bool harmonic = a.contains("depth") && b.contains("depth");
    if (harmonic) {
      HarmonicTruncation f = harmonic_from_json(a), g = harmonic_from_json(b);
      const int n = std::min(f.depth, g.depth);
      Interval rho = pointwise_metric(config, f, g);
      double p = probability_metric(config, level_projection(config, f, n), level_projection(config, g, n));
      out << "P(level " << n << ") " << exact_text(p) << "\n";
      out << "rho in [" << exact_text(rho.lo) << ", " << exact_text(rho.hi) << "]\n";
    } else {
      double p = probability_metric(config, simple_from_json(a), simple_from_json(b));
      out << "P " << exact_text(p) << "\n";
    }
    return int(ok);
  });
}

int cmd_build(const BuildArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    TreeConfig config = load_config(args.config);
    std::vector<Target> targets = load_targets(config, args.targets, args.mode);
    const Rational eps = parse_rational(args.epsilon);
    Schedule schedule;
    if (args.schedule == "x") {
      XScheduleOptions x;
      x.epsilon = eps;
      x.skip_until = args.skip_until;
      schedule = make_x_schedule(config, targets, args.horizon, x);
    } else if (args.schedule == "fm") {
      schedule = make_fm_schedule(config, targets, std::vector<Rational>(targets.size(), eps),
                                  args.stride, args.horizon);
    } else if (args.schedule == "file") {
      schedule = schedule_from_json(read_json_file(args.schedule_file));
      if (args.horizon != 0) schedule.horizon = args.horizon;
      validate(config, schedule, targets);
    } else {
      throw ArgumentError("unknown schedule kind '" + args.schedule + "'");
    }
    const std::size_t m = targets.front().h.dim();
    BuildOptions options;
    BuildResult result = build(config, targets, schedule, Value::zero(m, args.mode), options);
    VerifyReport report = verify(config, targets, schedule, result);

    Outputs o = start_outputs(args.out, args.config, "build", args.seed);
    o.manifest.parameters = {{"mode", mode_name(args.mode)},   {"horizon", std::to_string(schedule.horizon)},
                             {"targets", args.targets},         {"schedule", args.schedule},
                             {"epsilon", args.epsilon},         {"stride", std::to_string(args.stride)},
                             {"skip_until", std::to_string(args.skip_until)},
                             {"threads", std::to_string(thread_width())}};
    if (args.schedule == "file") o.manifest.parameters["schedule_file"] = args.schedule_file;
    o.write("schedule.json", dump(to_json(schedule)));
    o.write("build.json", dump(to_json(result)));
    o.write("trace.txt", trace_text(result));
    std::ostringstream tables;
    for (std::size_t k = 0; k < report.densities.size(); ++k)
      tables << "# target " << targets[k].label << "\n" << report.densities[k].table();
    o.write("density.txt", tables.str());
    o.write("verify.txt", verify_text(report));
    o.finish();

    const std::size_t shown = std::min<std::size_t>(result.log.size(), 12);
    out << "levels 1.." << result.horizon << ", anchor " << result.anchor_depth << ", "
        << schedule.blocks.size() << " blocks\n";
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& rec = result.log[i];
      out << "  level " << rec.level;
      for (std::size_t k = 0; k < rec.distance.size(); ++k)
        out << "  P(" << targets[k].label << ") " << exact_text(rec.distance[k]);
      out << "\n";
    }
    for (std::size_t k = 0; k < targets.size(); ++k)
      out << "visits " << targets[k].label << ": " << result.visits[k].size() << "\n";
    out << verify_text(report);
    return report.pass() ? int(ok) : int(validation_failure);
  });
}

int cmd_density(const DensityArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Json doc = read_json_file(args.input);
    std::vector<IndexSet> sets;
    if (doc.contains("visits")) sets = build_from_json(doc).visits;
    else sets.push_back(index_set_from_json(doc));
    Json reports = Json::array();
    for (std::size_t k = 0; k < sets.size(); ++k) {
      DensityReport r = density_profile(sets[k], args.window_start);
      out << "# set " << k + 1 << "\n" << r.table();
      reports.push_back(to_json(r));
    }
    Outputs o = start_outputs(args.out, args.input, "density", 0);
    o.manifest.parameters["window_start"] = std::to_string(args.window_start);
    o.write("density.json", dump(reports));
    o.finish();
    return int(ok);
  });
}

}  // namespace utree::cli
