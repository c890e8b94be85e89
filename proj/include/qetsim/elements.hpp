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

// Linear-optical element operators on one photon's mode space.
//
// Every operator is stored as a unitary matrix on the full single-photon
// basis. Elements that shift a bounded coordinate (SPP on oam, delay on
// time_bin) are implemented as cyclic shifts; the modes that would wrap are
// recorded in a guard mask and applying the element to a state with
// population on a guarded mode raises TruncationError.
//
// Beam-splitter convention: a -> (a + i b)/sqrt2, b -> (i a + b)/sqrt2.

#include <functional>
#include <string>
#include <vector>

#include "qetsim/hilbert.hpp"

namespace qet {

enum class Subsystem : std::uint8_t { signal, idler, both };

class ElementOp {
 public:
  ElementOp(std::string name, BasisSpec basis, CMatrix matrix, double throughput = 1.0,
            std::vector<bool> guard = {}, Subsystem subsystem = Subsystem::both);

  const std::string& name() const { return name_; }
  const BasisSpec& basis() const { return basis_; }
  const CMatrix& matrix() const { return matrix_; }
  double throughput() const { return throughput_; }
  Subsystem subsystem() const { return subsystem_; }
  const std::vector<bool>& guard() const { return guard_; }

  ElementOp on(Subsystem subsystem) const;

  /// Throws TruncationError if the amplitude vector populates a guarded mode.
  void check_guard(const CVector& single_photon_amps, double cutoff = 1e-12) const;

  /// Max abs deviation of U^dagger U from identity.
  double unitarity_error() const;

 private:
  std::string name_;
  BasisSpec basis_;
  CMatrix matrix_;
  double throughput_;
  std::vector<bool> guard_;
  Subsystem subsystem_;
};

inline constexpr double kDefaultSppEfficiency = 0.98;

ElementOp identity(const BasisSpec& basis);
ElementOp beam_splitter(const BasisSpec& basis, int path_a, int path_b);
ElementOp pbs(const BasisSpec& basis, int path_a, int path_b);
ElementOp half_wave_plate(const BasisSpec& basis, double angle);
ElementOp spiral_phase_plate(const BasisSpec& basis, int charge,
                             double efficiency = kDefaultSppEfficiency);
ElementOp dove_prism(const BasisSpec& basis, double alpha);
ElementOp delay_line(const BasisSpec& basis, int bins, double phase);
/// Phase e^{i phase} on V only (a variable retarder).
ElementOp polarization_phase(const BasisSpec& basis, double phase);

/// Acts as `op` on modes with keep(label) true and as identity elsewhere.
/// The kept subspace must be invariant under `op`.
ElementOp restrict_to(const ElementOp& op, const std::function<bool(const ModeLabel&)>& keep,
                      const std::string& tag);
ElementOp on_path(const ElementOp& op, int path);
ElementOp on_polarization(const ElementOp& op, Polarization pol);

/// outer after inner.
ElementOp compose(const ElementOp& outer, const ElementOp& inner);
ElementOp compose(const std::vector<ElementOp>& in_order);

PureState apply(const ElementOp& op, const PureState& single_photon);

/// Applies `op` to one side of a two-photon state without forming op (x) I.
PureState apply(const ElementOp& op, const PureState& pair, Side side);

/// op (x) I or I (x) op.
class TwoPhotonOp {
 public:
  TwoPhotonOp(std::optional<ElementOp> signal, std::optional<ElementOp> idler);

  /// Operator product: this after `inner`.
  TwoPhotonOp after(const TwoPhotonOp& inner) const;

  const std::optional<ElementOp>& signal() const { return signal_; }
  const std::optional<ElementOp>& idler() const { return idler_; }
  double throughput() const;

  PureState operator()(const PureState& pair) const;

  /// Explicit kron product; only meant for small test bases.
  CMatrix dense() const;

 private:
  std::optional<ElementOp> signal_;
  std::optional<ElementOp> idler_;
};

TwoPhotonOp lift(const ElementOp& op, Side side);

}  // namespace qet
