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
// Measurement side: rank-1 qubit projectors (SLM hologram plus single-mode
// fiber for OAM, unbalanced MZI plus arrival window for time bins), noise
// applied to the two-qubit density matrix, and Poisson coincidence counting.
//
// All states here are two-qubit density matrices in the logical basis
// (upper, lower) of each photon, signal-major: |uu>, |ud>, |du>, |dd>.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qetsim/hilbert.hpp"

namespace qet::detection {

enum class ProjectorKind { oam_superposition, oam_basis, time_basis, franson_phase, custom };

std::string to_string(ProjectorKind kind);

struct Projector {
  Side side = Side::signal;
  ProjectorKind kind = ProjectorKind::custom;
  double parameter = 0.0;  // theta, phi, or the level index for basis kinds
  /// Amplitudes on (upper, lower); unit norm.
  std::array<Complex, 2> state{Complex(1.0), Complex(0.0)};

  /// Short label for CSV rows, e.g. "oam(0.785398)".
  std::string label() const;
  /// Same projector on the other photon.
  Projector on(Side s) const;
};

/// Checks |state| = 1 within kNormTolerance.
void validate(const Projector& p);

/// (e^{i theta}|l_up> + e^{-i theta}|l_down>)/sqrt2, obtained from the
/// azimuthal hologram transmission followed by the l = 0 fiber filter.
Projector slm_projector(double theta, Side side = Side::idler, int l_up = 1, int l_down = -1);

/// |upper> (level 0) or |lower> (level 1).
Projector basis_projector(int level, Side side, ProjectorKind kind = ProjectorKind::oam_basis);

/// (|t1> + e^{i phi}|t2>)/sqrt2: MZI with phase phi, central arrival window.
Projector franson_projector(double phi, Side side = Side::idler);

/// Arbitrary normalized qubit state.
Projector custom_projector(std::array<Complex, 2> state, Side side, std::string name = "custom");

// ---------------------------------------------------------------------------

struct NoiseModel {
  double white_noise_weight = 0.0;   // isotropic admixture w
  double dephasing_weight = 0.0;     // p, kills coherence between logical levels
  double phase_jitter_sigma = 0.0;   // rad, Gaussian jitter on the signal level phase
  double phase_offset = 0.0;         // rad, static phase error on the signal lower level
  double detector_efficiency = 0.10; // per detector
  double dark_rate = 0.0;            // coincidences/s from dark counts
  double accidental_rate = 0.0;      // coincidences/s
  double spp_efficiency = 0.98;

  void validate() const;
  bool is_ideal() const {
    return white_noise_weight == 0.0 && dephasing_weight == 0.0 && phase_jitter_sigma == 0.0 &&
           phase_offset == 0.0;
  }
};

nlohmann::json to_json(const NoiseModel& noise);

/// Two-qubit density matrix of a pure 4-vector.
CMatrix density(const CVector& psi);

/// offset -> jitter -> dephasing -> white noise. Result is a valid state.
CMatrix apply_noise(const CMatrix& rho, const NoiseModel& noise);

/// Visibility reduction of a maximally coherent fringe: (1-w)(1-p)e^{-sigma^2/2}.
double coherence_factor(const NoiseModel& noise);

/// Tr(rho P_s (x) P_i). Projector sides must differ.
double coincidence_probability(const CMatrix& rho, const Projector& signal,
                               const Projector& idler);

// ---------------------------------------------------------------------------

struct CountModel {
  double pair_rate = 1e4;  // pairs/s at the source
  double throughput = 1.0; // optical throughput, e.g. conversion efficiency
};

/// Stream derivation: seed_seq{seed, stream}. Same inputs, same draw.
std::int64_t simulate_counts(double p, const CountModel& model, double integration_s,
                             const NoiseModel& noise, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// Poisson mean used by simulate_counts.
double expected_counts(double p, const CountModel& model, double integration_s,
                       const NoiseModel& noise);

struct CountRecord {
  std::string setting;
  double signal_param = 0.0;
  double idler_param = 0.0;
  double integration_s = 0.0;
  double probability = 0.0;
  double expected = 0.0;
  std::int64_t counts = 0;
};

struct CoincidenceDataset {
  std::vector<CountRecord> records;
  std::uint64_t rng_seed = 0;
  nlohmann::json provenance = nlohmann::json::object();

  void validate() const;
  std::string to_csv() const;
  nlohmann::json sidecar() const;
};

struct MeasurementSetting {
  Projector signal;
  Projector idler;
};

/// Applies `noise` to rho, then one record per setting; record k draws
/// from stream k.
CoincidenceDataset measure(const CMatrix& rho, const std::vector<MeasurementSetting>& settings,
                           const CountModel& model, double integration_s,
                           const NoiseModel& noise, std::uint64_t seed);

enum class ScanKind { franson, oam };

/// Scans the idler over `grid` with the signal held at `fixed`.
CoincidenceDataset fringe_scan(const CMatrix& rho, ScanKind kind, const std::vector<double>& grid,
                               const Projector& fixed, const CountModel& model,
                               double integration_s, const NoiseModel& noise, std::uint64_t seed);

/// n evenly spaced points on [0, period).
std::vector<double> uniform_grid(int n, double period);

}  // namespace qet::detection
