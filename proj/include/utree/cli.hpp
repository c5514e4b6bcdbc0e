#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "utree/io.hpp"

namespace utree::cli {

enum ExitCode : int { ok = 0, parse_failure = 1, validation_failure = 2, infeasible = 3 };

/// Reads a tree config; UTREE_DEPTH_CAP overrides its depth cap.
TreeConfig load_config(const std::string& path);

/// Requested parallelism width: UTREE_THREADS, default 1.
unsigned thread_width();

std::string sha256_hex(const std::string& bytes);

/// K level-1 unit targets: target k is 1 on child k mod b of the root, 0 elsewhere.
std::vector<Target> unit_targets(const TreeConfig& config, std::size_t k, std::size_t m, Mode mode);

/// A targets document path, or a plain count K for unit targets.
std::vector<Target> load_targets(const TreeConfig& config, const std::string& spec, Mode mode);

int cmd_tree_validate(const std::string& config_path, std::ostream& out, std::ostream& err);

struct MetricArgs {
  std::string config;
  std::string first;   // simple function or harmonic truncation document
  std::string second;
};

/// P between two simple functions; rho as well when both are truncations.
int cmd_metric(const MetricArgs& args, std::ostream& out, std::ostream& err);

struct BuildArgs {
  std::string config;
  Mode mode = Mode::exact;
  std::uint64_t horizon = 0;
  std::string targets = "2";
  std::string schedule = "x";  // x | fm | file
  std::string schedule_file;
  std::string epsilon = "1/10";
  std::uint64_t stride = 8;
  std::uint64_t skip_until = 0;
  std::string out;
  std::uint64_t seed = 0;
};

/// Writes build.json, schedule.json, trace.txt, density tables, verify.txt
/// and manifest.json under out; exit 0 iff verify passes.
int cmd_build(const BuildArgs& args, std::ostream& out, std::ostream& err);

struct DensityArgs {
  std::string input;  // index set or build result document
  std::uint64_t window_start = 0;
  std::string out;
};

int cmd_density(const DensityArgs& args, std::ostream& out, std::ostream& err);

struct SpanArgs {
  std::string config;
  Mode mode = Mode::exact;
  std::uint64_t horizon = 1000;
  std::string targets = "2";
  std::string schedule = "x";  // x | fm
  std::string epsilon = "1/10";
  std::uint64_t stride = 8;
  std::size_t coordinates = 3;
  std::size_t combos = 50;
  std::uint64_t seed = 1;
  std::string out;
};

/// Joint build plus random-coefficient certificates; exit 0 iff all sound.
int cmd_span(const SpanArgs& args, std::ostream& out, std::ostream& err);

struct DemoArgs {
  std::string config;
  std::uint64_t horizon = 5040;
  std::size_t targets = 2;
  std::size_t coordinates = 2;
  std::size_t combos = 8;
  std::uint64_t seed = 1;
  std::string out;
};

/// FM and X joint families over one config, certificates for random combos of
/// each, and a combined density report; exit 0 iff every check passes.
int cmd_demo_double_genericity(const DemoArgs& args, std::ostream& out, std::ostream& err);

/// Random combos: s in 1..max_s, real and imaginary parts in [-bound, bound],
/// last coefficient nonzero.
std::vector<Combo> random_combos(std::size_t count, std::size_t max_s, long bound,
                                 std::uint64_t seed);

/// Runs fn, mapping library errors to exit codes and messages on err.
int guarded(std::ostream& err, const std::function<int()>& fn);

}  // namespace utree::cli
