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

// Composite gadgets built from `elements`: unbalanced MZI pairs, the forward
// entanglement-transfer gate (time-energy -> OAM), the Dove-prism Sagnac OAM
// sorter and the reverse gate (OAM -> time-energy).
//
// State conventions. Inside an unbalanced MZI the arm is carried in two
// coordinates: path (0 = short arm, 1 = long arm) and time_bin, which counts
// accumulated arm delay relative to the unobserved cw emission time. After
// arrival-time postselection the path tag is dropped, so the postselected
// pair is (|t1 t1> + e^{i Phi} |t2 t2>)/sqrt2 with t1 = bin 0, t2 = bin 1.
//
// Phase bookkeeping. MziConfig::phase is referenced to the beam-splitter
// convention so that the long-arm amplitude leaving the first splitter is
// e^{i phase}/sqrt2 (the i of the reflection is compensated). Hence the
// central-peak state from the emission pair carries Phi = phase_s + phase_i,
// and the forward gate produces Phi = phi_in + phase_s + phase_i.

#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "qetsim/elements.hpp"
#include "qetsim/hilbert.hpp"

namespace qet::interferometer {

struct MziConfig {
  int delay_bins = 1;
  double phase = 0.0;
  std::optional<ElementOp> long_arm_insert;
  std::optional<ElementOp> short_arm_insert;

  /// MZI with SPPs of the given charges in the arms (nullopt = no plate).
  static MziConfig with_spp(const BasisSpec& basis, std::optional<int> long_charge,
                            std::optional<int> short_charge, double phase = 0.0,
                            double spp_efficiency = kDefaultSppEfficiency);

  double long_throughput() const { return long_arm_insert ? long_arm_insert->throughput() : 1.0; }
  double short_throughput() const {
    return short_arm_insert ? short_arm_insert->throughput() : 1.0;
  }
};

/// Single-photon operator of one unbalanced MZI up to (not including) the
/// arm recombination.
ElementOp mzi_split(const BasisSpec& basis, const MziConfig& cfg);

/// Both photons through their MZIs. Output still carries arm path tags.
PureState franson_apply(const PureState& pair, const MziConfig& signal, const MziConfig& idler);
PureState franson_apply(const PureState& pair, double phi_s, double phi_i);

/// Projects onto equal signal/idler arrival bins and drops the arm path tag.
Projection postselect_central_peak(const PureState& pair);

/// Folds the (t, t) arrival register to bin 0. Arms must be distinguishable
/// in the remaining coordinates.
PureState erase_time_register(const PureState& pair);

/// Weight of each (t_s, t_i) arrival pair, summed over everything else.
std::map<std::pair<int, int>, double> arrival_pairs(const PureState& pair);
/// Weight of each arrival-time difference t_s - t_i.
std::map<int, double> arrival_histogram(const PureState& pair);

// ---------------------------------------------------------------------------

enum class BellTarget { phi_plus, phi_minus, psi_plus, psi_minus, phi_plus_0 };

std::string to_string(BellTarget target);
BellTarget bell_target_from_string(const std::string& name);

/// Ideal target on bin 0, path 0, H.
PureState bell_state(const BasisSpec& basis, BellTarget target);
/// Logical levels (upper, lower): {+1, -1} or, for phi_plus_0, {0, +1}.
QubitEncoding bell_encoding(BellTarget target);

struct QetForwardConfig {
  MziConfig signal;
  MziConfig idler;

  /// SPP arrangement and phase for `target`, compensating the input phase.
  static QetForwardConfig for_target(const BasisSpec& basis, BellTarget target,
                                     double phi_in = 0.0,
                                     double spp_efficiency = kDefaultSppEfficiency);
};

struct QetResult {
  PureState state;
  /// Postselection (forward) or erasure (reverse) success probability.
  double success_prob;
  /// Postselected-branch-weighted product of insert throughputs.
  double conversion_efficiency;
  /// Hyperentangled intermediate (forward gate only).
  std::optional<PureState> hyperentangled;
  double total_phase = 0.0;
};

/// Reads phi_in from a time-bin entangled input, drives the SPP-loaded MZIs from
/// the emission pair, postselects the central peak and erases the time
/// register.
QetResult qet_forward(const PureState& eq1_input, const QetForwardConfig& cfg);

/// Relative phase of a time-bin entangled input; throws ConfigError otherwise.
double eq1_phase(const PureState& state);

// ---------------------------------------------------------------------------

struct SorterConfig {
  double alpha;  // relative Dove-prism orientation, radians
  int h_charge;  // exits H (path 0)
  int v_charge;  // exits V (path 1)

  /// alpha = 90 deg / (v - h).
  static SorterConfig for_charges(int h_charge, int v_charge);
};

/// The sorter as a single-photon operator (Sagnac, V-phase compensator,
/// HWP at pi/8, PBS onto paths 0/1).
ElementOp sorter_op(const BasisSpec& basis, const SorterConfig& cfg);

/// Population of |l, D> that leaves through the port not assigned to l.
double sorter_leakage(const BasisSpec& basis, const SorterConfig& cfg, int charge);

inline constexpr double kExtinctionThreshold = 1e-6;

/// Applies the sorter to both photons. Input must be diagonally polarized.
/// Throws ExtinctionError if a populated charge leaks above threshold.
PureState sagnac_sorter(const PureState& pair, const SorterConfig& cfg);

struct ReverseConfig {
  int delay_bins = 1;
  bool erase = true;
  /// Charge routed to the long path; defaults to the higher populated charge.
  std::optional<int> long_charge;
  /// Overrides the derived alpha (for misconfiguration studies).
  std::optional<double> alpha;
  double spp_efficiency = kDefaultSppEfficiency;
};

QetResult qet_reverse(const PureState& oam_input, const ReverseConfig& cfg = {});

nlohmann::json to_json(const MziConfig& cfg);
nlohmann::json to_json(const QetForwardConfig& cfg);
nlohmann::json to_json(const SorterConfig& cfg);

}  // namespace qet::interferometer
