#include <CLI11.hpp>

#include <iostream>

#include "utree/cli.hpp"

namespace {

utree::Mode mode_of(const std::string& s) { return utree::parse_mode(s); }

}  // namespace

int main(int argc, char** argv) {
  using namespace utree::cli;
  CLI::App app{"utree: harmonic functions on rooted trees at finite truncations"};
  app.require_subcommand(1);
  int code = 0;
  std::string mode = "exact";

  std::string validate_config;
  auto* validate = app.add_subcommand("tree-validate", "check a tree config's measure consistency");
  validate->add_option("--config", validate_config, "tree config JSON")->required();
  validate->callback([&] { code = cmd_tree_validate(validate_config, std::cout, std::cerr); });

  MetricArgs margs;
  auto* metric = app.add_subcommand("metric", "distance between two functions");
  metric->add_option("--config", margs.config, "tree config JSON")->required();
  metric->add_option("first", margs.first, "simple function or truncation JSON")->required();
  metric->add_option("second", margs.second, "simple function or truncation JSON")->required();
  metric->callback([&] { code = cmd_metric(margs, std::cout, std::cerr); });

  BuildArgs bargs;
  auto* build = app.add_subcommand("build", "scheduled level-by-level build");
  build->add_option("--config", bargs.config, "tree config JSON")->required();
  build->add_option("--mode", mode, "exact | float")->check(CLI::IsMember({"exact", "float"}));
  build->add_option("--horizon", bargs.horizon, "last level built");
  build->add_option("--targets", bargs.targets, "targets JSON, or a count of unit targets");
  build->add_option("--schedule", bargs.schedule, "x | fm | file")->check(CLI::IsMember({"x", "fm", "file"}));
  build->add_option("--schedule-file", bargs.schedule_file, "schedule JSON for --schedule file");
  build->add_option("--epsilon", bargs.epsilon, "block tolerance");
  build->add_option("--stride", bargs.stride, "FM stride");
  build->add_option("--skip-until", bargs.skip_until, "X blocks ending at or before this level stay constant");
  build->add_option("--out", bargs.out, "output directory");
  build->add_option("--seed", bargs.seed, "recorded in the manifest");
  build->callback([&] {
    bargs.mode = mode_of(mode);
    code = cmd_build(bargs, std::cout, std::cerr);
  });

  DensityArgs dargs;
  auto* density = app.add_subcommand("density", "counting-density profile of visit sets");
  density->add_option("input", dargs.input, "index set or build result JSON")->required();
  density->add_option("--window-start", dargs.window_start, "first N of the profile");
  density->add_option("--out", dargs.out, "output directory");
  density->callback([&] { code = cmd_density(dargs, std::cout, std::cerr); });

  SpanArgs sargs;
  auto* span = app.add_subcommand("span", "joint family and certificates for random combos");
  span->add_option("--config", sargs.config, "tree config JSON")->required();
  span->add_option("--mode", mode, "exact | float")->check(CLI::IsMember({"exact", "float"}));
  span->add_option("--horizon", sargs.horizon, "last level built");
  span->add_option("--targets", sargs.targets, "targets JSON, or a count of unit targets");
  span->add_option("--schedule", sargs.schedule, "x | fm")->check(CLI::IsMember({"x", "fm"}));
  span->add_option("--epsilon", sargs.epsilon, "block tolerance");
  span->add_option("--stride", sargs.stride, "FM stride");
  span->add_option("--coordinates", sargs.coordinates, "coordinates per joint target");
  span->add_option("--combos", sargs.combos, "random combos to certify");
  span->add_option("--seed", sargs.seed, "combo seed");
  span->add_option("--out", sargs.out, "output directory");
  span->callback([&] {
    sargs.mode = mode_of(mode);
    code = cmd_span(sargs, std::cout, std::cerr);
  });

  DemoArgs gargs;
  auto* demo = app.add_subcommand("demo", "FM and X joint families over one config");
  demo->add_option("--config", gargs.config, "tree config JSON")->required();
  demo->add_option("--horizon", gargs.horizon, "shared horizon");
  demo->add_option("--targets", gargs.targets, "number of unit targets");
  demo->add_option("--coordinates", gargs.coordinates, "coordinates per joint target");
  demo->add_option("--combos", gargs.combos, "random combos per family");
  demo->add_option("--seed", gargs.seed, "combo seed");
  demo->add_option("--out", gargs.out, "output directory");
  demo->callback([&] { code = cmd_demo_double_genericity(gargs, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(parse_failure);
  }
  return code;
}
