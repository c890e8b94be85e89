// Copyright 2026 The qetsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qetsim: scenario runner.
//
//   qetsim run <config.json> [--seed N] [--out-dir DIR] [--check]
//   qetsim calibrate <config.json> [--out-dir DIR]
//   qetsim validate <config.json>
//   qetsim list-scenarios
//
// Exit codes: 0 ok, 1 check failure, 2 config error, 3 runtime error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qetsim/error.hpp"
#include "qetsim/io.hpp"
#include "qetsim/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool check = false;
};

qet::scenario::ScenarioConfig load(const Options& opt) {
  auto cfg = qet::scenario::load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

std::filesystem::path out_dir(const Options& opt, const qet::scenario::ScenarioConfig& cfg) {
  return opt.out_dir.empty() ? std::filesystem::path("out") / cfg.kind
                             : std::filesystem::path(opt.out_dir);
}

int cmd_run(const Options& opt) {
  const auto cfg = load(opt);
  const auto report = qet::scenario::run(cfg);
  const auto dir = out_dir(opt, cfg);
  qet::scenario::write_outputs(report, dir);
  for (const auto& [name, value] : report.metrics) {
    std::cout << name << " = " << qet::io::fmt_double(value) << "\n";
  }
  std::cout << "wrote " << dir.string() << "/report.json\n";
  if (!opt.check) return kOk;
  for (const auto& name : report.failed_checks) std::cerr << "check failed: " << name << "\n";
  if (!report.failed_checks.empty()) return kCheckFailed;
  std::cout << "all " << cfg.checks.size() << " checks passed\n";
  return kOk;
}

int cmd_calibrate(const Options& opt) {
  const auto cfg = load(opt);
  const auto result = qet::scenario::calibrate(cfg);
  const auto text = result.dump(2) + "\n";
  if (!opt.out_dir.empty()) {
    qet::io::write_atomic(std::filesystem::path(opt.out_dir) / "calibration.json", text);
  }
  std::cout << text;
  return kOk;
}

int cmd_validate(const Options& opt) {
  const auto cfg = load(opt);
  std::cout << opt.config << ": ok (" << cfg.kind << ")\n";
  return kOk;
}

int cmd_list() {
  for (const auto& k : qet::scenario::scenario_kinds()) {
    std::cout << k << "\t" << qet::scenario::describe(k) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qetsim: entanglement-transfer simulator"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out-dir", opt.out_dir, "output directory (default out/<scenario>)");
  app.add_flag("--check", opt.check, "exit 1 if any check threshold in the config fails");
  app.fallthrough();

  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("config", opt.config, "scenario config (JSON)")->required();
  auto* cal = app.add_subcommand("calibrate", "solve the noise model only");
  cal->add_option("config", opt.config, "scenario config (JSON)")->required();
  auto* val = app.add_subcommand("validate", "lint a config");
  val->add_option("config", opt.config, "scenario config (JSON)")->required();
  auto* list = app.add_subcommand("list-scenarios", "list scenario kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (seed_opt->count() > 0) opt.seed = seed;

  try {
    if (*run) return cmd_run(opt);
    if (*cal) return cmd_calibrate(opt);
    if (*val) return cmd_validate(opt);
    if (*list) return cmd_list();
  } catch (const qet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const qet::TruncationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
