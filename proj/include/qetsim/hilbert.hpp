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

// Discrete single- and two-photon mode spaces.
//
// A single photon lives on ModeLabel = (time_bin, oam, pol, path). The flat
// index is time-major, then oam, then pol, then path:
//
//   index = ((t * n_oam + (oam + l_max)) * 2 + pol) * n_paths + path
//
// Two-photon states are signal (x) idler with signal-major ordering, so the
// amplitude of (s, i) lives at s * dim + i.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace qet {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-9;

enum class Polarization : std::uint8_t { H = 0, V = 1 };

enum class Side : std::uint8_t { signal = 0, idler = 1 };

struct ModeLabel {
  int time_bin = 0;
  int oam = 0;
  Polarization pol = Polarization::H;
  int path = 0;
  // ITU channel the photon was routed into; metadata only, not part of the
  // basis enumeration.
  std::optional<int> channel;

  /// Equality over the enumerated coordinates (channel ignored).
  bool same_mode(const ModeLabel& other) const {
    return time_bin == other.time_bin && oam == other.oam && pol == other.pol &&
           path == other.path;
  }
};

std::string to_string(const ModeLabel& label);

class BasisSpec {
 public:
  /// Defaults hold every state in the QET pipeline plus one guard slot.
  BasisSpec() : BasisSpec(2, 4, 4) {}
  BasisSpec(int l_max, int t_max, int n_paths);

  int l_max() const { return l_max_; }
  int t_max() const { return t_max_; }
  int n_paths() const { return n_paths_; }
  int n_oam() const { return 2 * l_max_ + 1; }
  std::size_t dim() const;

  bool contains(const ModeLabel& label) const;
  std::size_t index(const ModeLabel& label) const;
  ModeLabel label(std::size_t index) const;

  bool operator==(const BasisSpec& other) const = default;

 private:
  int l_max_;
  int t_max_;
  int n_paths_;
};

/// Normalized amplitude vector over a single-photon basis or over the
/// two-photon product basis built from it.
class PureState {
 public:
  /// Validates the norm; does not renormalize.
  PureState(BasisSpec basis, int photons, CVector amplitudes,
            double norm_tolerance = kNormTolerance);

  static PureState basis_state(const BasisSpec& basis, const ModeLabel& label);
  static PureState basis_state(const BasisSpec& basis, const ModeLabel& signal,
                               const ModeLabel& idler);

  /// Builds sum_k c_k |label_k> and normalizes it. Throws on a zero vector.
  static PureState superposition(
      const BasisSpec& basis,
      const std::vector<std::pair<ModeLabel, Complex>>& terms);
  static PureState superposition(
      const BasisSpec& basis,
      const std::vector<std::tuple<ModeLabel, ModeLabel, Complex>>& terms);

  /// Renormalizes an arbitrary nonzero vector.
  static PureState normalized(const BasisSpec& basis, int photons, CVector amplitudes);

  const BasisSpec& basis() const { return basis_; }
  int photons() const { return photons_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  double norm_tolerance() const { return norm_tolerance_; }

  Complex amplitude(const ModeLabel& label) const;
  Complex amplitude(const ModeLabel& signal, const ModeLabel& idler) const;

  /// Amplitudes reshaped as a (signal x idler) matrix; two-photon states only.
  CMatrix as_matrix() const;
  static PureState from_matrix(const BasisSpec& basis, const CMatrix& m,
                               double norm_tolerance = kNormTolerance);

  /// Global phase fixed so the first amplitude above 1e-12 is real-positive.
  PureState canonical_phase() const;

  Complex inner(const PureState& other) const;

  /// Calls f(signal_label, idler_label, amplitude) for every |amp| > cutoff.
  void for_each_two_photon(
      const std::function<void(const ModeLabel&, const ModeLabel&, Complex)>& f,
      double cutoff = 1e-12) const;
  void for_each_single(const std::function<void(const ModeLabel&, Complex)>& f,
                       double cutoff = 1e-12) const;

 private:
  BasisSpec basis_;
  int photons_;
  CVector amps_;
  double norm_tolerance_;
};

/// Density matrix over a product of small factors (dims[k] each).
class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity at 1e-9.
  DensityMatrix(std::vector<int> dims, CMatrix matrix);

  static DensityMatrix from_pure(const CVector& psi, std::vector<int> dims);
  static DensityMatrix maximally_mixed(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  const CMatrix& matrix() const { return matrix_; }

 private:
  std::vector<int> dims_;
  CMatrix matrix_;
};

/// Checks Hermiticity/trace/positivity; returns an empty string when valid.
std::string density_violation(const CMatrix& m, double tol = 1e-9);

/// Cap used by tensor() to catch runaway truncation settings.
inline constexpr std::size_t kMaxTwoPhotonDim = std::size_t{1} << 22;

PureState tensor(const PureState& a, const PureState& b,
                 std::size_t dim_cap = kMaxTwoPhotonDim);

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Traces out every factor except `keep` (0 = signal, 1 = idler for pairs).
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);

struct Projection {
  PureState state;
  double success_prob;
};

/// Rank-1 projection onto `onto`; returns the normalized projector state.
Projection project(const PureState& state, const PureState& onto);

/// Projection onto the span of basis vectors selected by `keep`.
Projection project(const PureState& state, const std::function<bool(std::size_t)>& keep);

/// Projection onto the span of two-photon basis vectors selected by `keep`.
Projection project_pairs(
    const PureState& state,
    const std::function<bool(const ModeLabel&, const ModeLabel&)>& keep);

/// Projection by an explicit idempotent matrix.
Projection project(const PureState& state, const CMatrix& projector);

/// Two logical levels of one photon, e.g. OAM {+1, -1} or time bins {0, 1}.
struct QubitEncoding {
  ModeLabel upper;
  ModeLabel lower;
};

/// Restricts a two-photon pure state to the 2x2 logical subspace; throws if
/// population outside exceeds `leak_tol`.
CVector to_two_qubit(const PureState& state, const QubitEncoding& signal,
                     const QubitEncoding& idler, double leak_tol = 1e-9);

nlohmann::json to_json(const BasisSpec& basis);
BasisSpec basis_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModeLabel& label);
ModeLabel label_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PureState& state);
PureState state_from_json(const nlohmann::json& j);

}  // namespace qet
