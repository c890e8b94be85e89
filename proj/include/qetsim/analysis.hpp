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
// Two-qubit state estimation and fringe analysis: linear-inversion and
// maximum-likelihood tomography, state metrics, CHSH from counts or from a
// density matrix, Poisson-weighted visibility fits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "qetsim/detection.hpp"
#include "qetsim/hilbert.hpp"

namespace qet::analysis {

using detection::CoincidenceDataset;
using detection::MeasurementSetting;
using detection::Projector;

// ---- tomography -----------------------------------------------------------

/// {upper, lower, D = (u + d)/sqrt2, L = (u + i d)/sqrt2} for one photon.
std::vector<Projector> tomography_projectors(Side side);

/// The 16 product settings, signal-major.
std::vector<MeasurementSetting> tomography_settings();

/// Rows: conj(vec(P_k)) so that p = M vec(rho).
CMatrix measurement_map(const std::vector<MeasurementSetting>& settings);

/// Numerical rank of the measurement map.
int measurement_rank(const std::vector<MeasurementSetting>& settings);

struct LinearEstimate {
  CMatrix rho;  // Hermitian, unit trace, possibly not positive
  double min_eigenvalue = 0.0;
  bool negative = false;
};

/// Least-squares inversion of the counts, then trace normalization (the
/// unknown flux drops out).
LinearEstimate linear_inversion(const std::vector<MeasurementSetting>& settings,
                                const std::vector<double>& counts);

struct MleOptions {
  int max_iterations = 20000;
  double ll_tolerance = 1e-10;   // per-count log-likelihood improvement
  double grad_tolerance = 1e-6;  // per-count gradient norm
};

struct TomographyResult {
  CMatrix rho;
  double fidelity = 0.0;             // against the target, if given
  double fidelity_phase_opt = 0.0;   // maximized over local phases
  double purity = 0.0;
  double log_likelihood = 0.0;       // per count, profile over the flux
  int iterations = 0;
  bool converged = false;
};

/// rho = T^dag T / Tr with T lower triangular: 4 real diagonal entries and
/// 6 complex entries below, 16 reals total. Ordering: diagonal first, then
/// (re, im) pairs row by row.
CMatrix t_from_params(const Eigen::VectorXd& x);
Eigen::VectorXd params_from_t(const CMatrix& t);
CMatrix rho_from_params(const Eigen::VectorXd& x);

/// Per-count profile Poisson log-likelihood and its gradient in x.
double log_likelihood(const Eigen::VectorXd& x, const std::vector<CMatrix>& projectors,
                      const std::vector<double>& counts);
Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& x,
                                        const std::vector<CMatrix>& projectors,
                                        const std::vector<double>& counts);

std::vector<CMatrix> setting_projectors(const std::vector<MeasurementSetting>& settings);

TomographyResult mle_reconstruct(const std::vector<MeasurementSetting>& settings,
                                 const std::vector<double>& counts,
                                 const std::optional<CVector>& target = std::nullopt,
                                 const MleOptions& options = {});

std::vector<double> counts_of(const CoincidenceDataset& data);

struct BootstrapResult {
  int replicas = 0;
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  double purity_mean = 0.0;
  double purity_std = 0.0;
};

/// Parametric bootstrap: Poisson resampling around the observed counts.
BootstrapResult bootstrap(const std::vector<MeasurementSetting>& settings,
                          const std::vector<double>& counts, const CVector& target, int replicas,
                          std::uint64_t seed, const MleOptions& options = {});

nlohmann::json to_json(const TomographyResult& r);
nlohmann::json matrix_json(const CMatrix& m);
/// One row per element: row,col,re,im.
std::string density_csv(const CMatrix& rho);

// ---- metrics --------------------------------------------------------------

double fidelity(const CMatrix& rho, const CVector& target);
/// max over diag(1, e^{ia}) (x) diag(1, e^{ib}) applied to rho.
double fidelity_phase_optimized(const CMatrix& rho, const CVector& target);
double purity(const CMatrix& rho);
double trace_distance(const CMatrix& a, const CMatrix& b);
/// Wootters concurrence of a two-qubit state.
double concurrence(const CMatrix& rho);

// ---- CHSH -----------------------------------------------------------------

struct ChshAngles {
  double a = 0.0;
  double a2 = 0.7853981633974483;   // pi/4
  double b = 0.39269908169744814;   // pi/8
  double b2 = 1.1780972450961724;   // 3pi/8
};

struct ChshResult {
  double S = 0.0;
  double sigma_S = 0.0;
  double violation_sigmas = 0.0;
  ChshAngles angles;
  std::array<double, 4> correlators{};  // E(a,b), E(a,b'), E(a',b), E(a',b')
};

/// Signal analyzer |theta_a>, idler analyzer conjugate |-theta_b>, so that
/// E(a, b) = cos 2(a - b) on phi+.
std::vector<MeasurementSetting> chsh_settings(const ChshAngles& angles = {});

double correlator(const CMatrix& rho, double a, double b);
ChshResult chsh(const CMatrix& rho, const ChshAngles& angles = {});
/// From the 16 records produced by measuring chsh_settings(angles), in order.
/// Uses `probability` instead of counts when `exact` is set.
ChshResult chsh(const CoincidenceDataset& data, const ChshAngles& angles = {}, bool exact = false);

nlohmann::json to_json(const ChshResult& r);

// ---- fringes --------------------------------------------------------------

struct VisibilityFit {
  double visibility = 0.0;
  double phase = 0.0;   // delta in A[1 + V cos(2 pi x / period + delta)]
  double offset = 0.0;  // A
  double sigma_visibility = 0.0;
  double sigma_phase = 0.0;
  double sigma_offset = 0.0;
  bool degenerate = false;  // flat data, V reported as 0
  bool clipped = false;     // estimate exceeded 1
};

VisibilityFit fit_visibility(const std::vector<double>& x, const std::vector<double>& y,
                             double period);
/// Fits counts against idler_param.
VisibilityFit fit_visibility(const CoincidenceDataset& data, double period);

nlohmann::json to_json(const VisibilityFit& f);

struct LocalBoundVerdict {
  bool exceeds = false;
  double margin = 0.0;  // V - 1/sqrt2
};

LocalBoundVerdict local_bound_check(double visibility);

}  // namespace qet::analysis
