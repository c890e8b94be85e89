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

#pragma once
// Scenario runner: wires source -> interferometer -> detection -> analysis
// into the six reproducible experiments, plus noise calibration.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qetsim/analysis.hpp"
#include "qetsim/detection.hpp"
#include "qetsim/hilbert.hpp"
#include "qetsim/source.hpp"

namespace qet::scenario {

inline constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& scenario_kinds();
/// One-line description for list-scenarios.
std::string describe(const std::string& kind);

struct CalibrationStep {
  std::string parameter;  // white_noise_weight | dephasing_weight | phase_jitter_sigma | phase_offset
  std::string metric;     // visibility | fidelity | purity | chsh
  double target = 0.0;
};

struct Bound {
  std::optional<double> min;
  std::optional<double> max;
};

struct ScenarioConfig {
  std::string kind;
  BasisSpec basis;
  std::uint64_t seed = 1;
  detection::NoiseModel noise;
  std::vector<CalibrationStep> calibration;
  detection::CountModel counts;
  double integration_s = 10.0;
  int grid_points = 32;
  std::string target = "phi_plus";
  double input_phase = 0.0;
  int bootstrap_replicas = 100;

  // oam_fringe_chsh
  double chsh_integration_s = 30.0;
  std::vector<CalibrationStep> chsh_calibration;
  analysis::ChshAngles chsh_angles;

  // jsa
  double fwhm_target_nm = 80.0;
  source::Envelope envelope = source::Envelope::sinc;
  double pump_linewidth_hz = 1e6;
  bool include_26_28 = false;

  // timescales (s)
  double pump_coherence_s = 1e-6;
  double mzi_delay_s = 1e-9;
  double correlation_time_s = 1e-13;

  std::map<std::string, Bound> checks;
};

/// Strict parse; unknown keys and bad values raise ConfigError with a path.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& cfg);

// ---- calibration ----------------------------------------------------------

/// What the analytic metrics are evaluated on.
struct MetricContext {
  CMatrix rho;                      // ideal two-qubit state
  CVector target;                   // fidelity reference
  detection::ScanKind scan = detection::ScanKind::oam;
  detection::Projector fixed;       // fixed analyzer of the fringe scan
  analysis::ChshAngles angles;
};

double analytic_metric(const std::string& metric, const CMatrix& noisy, const MetricContext& ctx);
/// Fringe visibility from exact probabilities on a 64-point grid.
double analytic_visibility(const CMatrix& rho, const MetricContext& ctx);

struct CalibrationRecord {
  CalibrationStep step;
  double solved = 0.0;
  double achieved = 0.0;
  int iterations = 0;
};

/// Bisection on each step's parameter in order, until the metric is within
/// 1e-4 of its target. Unreachable targets raise ConfigError.
detection::NoiseModel calibrate_noise(const std::vector<CalibrationStep>& steps,
                                      detection::NoiseModel base, const MetricContext& ctx,
                                      std::vector<CalibrationRecord>* records = nullptr);

nlohmann::json to_json(const CalibrationRecord& r);

// ---- running --------------------------------------------------------------

struct OutputFile {
  std::string name;
  std::string contents;
};

struct RunReport {
  nlohmann::json report;
  std::map<std::string, double> metrics;
  std::vector<OutputFile> files;
  std::vector<std::string> failed_checks;
  double wall_seconds = 0.0;
};

RunReport run(const ScenarioConfig& cfg);

/// Calibration only: the calibrated noise model(s) for the scenario.
nlohmann::json calibrate(const ScenarioConfig& cfg);

/// Writes every file plus report.json atomically; timing.json holds the
/// wall-clock so that the rest stays byte-identical across runs.
void write_outputs(const RunReport& report, const std::filesystem::path& dir);

}  // namespace qet::scenario
