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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(QETSIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qetsim_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config(const std::string& kind) { return std::string(QET_CONFIG_DIR) + "/" + kind + ".json"; }

}  // namespace

TEST_CASE("subcommands and exit codes") {
  CHECK(cli("list-scenarios") == 0);
  CHECK(cli("validate " + config("jsa")) == 0);
  CHECK(cli("") == 2);
  CHECK(cli("validate /nonexistent.json") == 2);

  const auto dir = scratch("codes");
  std::ofstream(dir / "typo.json") << R"({"scenario": "roundtrip", "chek": {}})";
  CHECK(cli("validate " + (dir / "typo.json").string()) == 2);
  std::ofstream(dir / "fail.json")
      << R"({"scenario": "roundtrip", "check": {"roundtrip_fidelity": {"min": 1.5}}})";
  CHECK(cli("run " + (dir / "fail.json").string() + " --out-dir " + (dir / "a").string()) == 0);
  CHECK(cli("run " + (dir / "fail.json").string() + " --check --out-dir " + (dir / "a").string()) == 1);
  CHECK(cli("--check run " + config("roundtrip") + " --out-dir " + (dir / "b").string()) == 0);
  CHECK(fs::exists(dir / "b" / "report.json"));
  CHECK(fs::exists(dir / "b" / "timing.json"));
  CHECK(cli("calibrate " + config("franson_before") + " --out-dir " + (dir / "c").string()) == 0);
  CHECK(fs::exists(dir / "c" / "calibration.json"));
  CHECK(cli("calibrate " + config("jsa")) == 2);
}

TEST_CASE("same config and seed give byte-identical outputs") {
  const auto dir = scratch("determinism");
  for (const char* kind : {"franson_before", "oam_fringe_chsh"}) {
    CAPTURE(kind);
    REQUIRE(cli("run " + config(kind) + " --out-dir " + (dir / "x").string()) == 0);
    REQUIRE(cli("run " + config(kind) + " --out-dir " + (dir / "y").string()) == 0);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dir / "x")) {
      const auto name = entry.path().filename();
      if (name == "timing.json") continue;
      CHECK(slurp(entry.path()) == slurp(dir / "y" / name));
      ++compared;
    }
    CHECK(compared >= 3);
    REQUIRE(cli("run " + config(kind) + " --seed 99 --out-dir " + (dir / "z").string()) == 0);
    CHECK(slurp(dir / "x" / "report.json") != slurp(dir / "z" / "report.json"));
    fs::remove_all(dir / "x");
    fs::remove_all(dir / "y");
  }
}
