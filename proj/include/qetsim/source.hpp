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

// SPDC pair-source model: cw-pumped joint spectral amplitude, marginal
// spectrum, the 100 GHz ITU channel plan, and the postselected time-bin
// state used as input to the gates.

#include <string>
#include <vector>

#include "json.hpp"
#include "qetsim/hilbert.hpp"

namespace qet::source {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kCenterWavelengthNm = 1555.75;

enum class Envelope { sinc, gaussian };

struct FrequencyAxis {
  double min_hz;
  double max_hz;
  int points;

  double step() const { return (max_hz - min_hz) / (points - 1); }
  double at(int k) const { return min_hz + k * step(); }
};

class JsaModel {
 public:
  /// envelope_width_hz scales the phase-matching envelope in (fs - fi).
  JsaModel(double center_wavelength_nm = kCenterWavelengthNm, double pump_linewidth_hz = 1e6,
           Envelope envelope = Envelope::sinc, double envelope_width_hz = 10e12,
           FrequencyAxis grid = {});

  double center_frequency_hz() const { return center_hz_; }
  double pump_frequency_hz() const { return 2.0 * center_hz_; }
  double pump_linewidth_hz() const { return linewidth_hz_; }
  Envelope envelope() const { return envelope_; }
  double envelope_width_hz() const { return width_hz_; }
  const FrequencyAxis& grid() const { return grid_; }

  JsaModel with_width(double envelope_width_hz) const;

  /// pump(fs + fi) * phase_matching(fs - fi); peak value 1 at degeneracy.
  /// Throws ConfigError for frequencies outside the sampled axis.
  Complex amplitude(double fs_hz, double fi_hz) const;

  /// Signal (or idler) marginal intensity on the grid, peak-normalized.
  std::vector<double> marginal(Side side = Side::signal) const;

  /// FWHM of the marginal spectrum, measured in wavelength.
  double marginal_fwhm_nm() const;

 private:
  double center_hz_;
  double linewidth_hz_;
  Envelope envelope_;
  double width_hz_;
  FrequencyAxis grid_;
};

/// Bisection on the envelope width until the marginal FWHM hits `target_nm`
/// within `tol_nm`.
JsaModel calibrate_width(const JsaModel& model, double target_nm = 80.0, double tol_nm = 1e-3);

std::string marginal_csv(const JsaModel& model);
/// Cut along the energy-conservation line fi = fp - fs.
std::string jsa_antidiagonal_csv(const JsaModel& model);

// ---------------------------------------------------------------------------

inline constexpr int kCenterChannel = 27;

/// ITU 100 GHz grid: channel n at 190.0 THz + n * 100 GHz.
double itu_frequency_hz(int channel);
double itu_wavelength_nm(int channel);

struct ChannelPair {
  int signal;
  int idler;
};

struct ChannelPlan {
  std::vector<ChannelPair> pairs;

  /// (22,32), (23,31), (24,30), (25,29), optionally (26,28).
  static ChannelPlan standard(bool include_26_28 = false);
};

/// Returns the plan's pairs after checking f_s + f_i = 2 f(CH27) exactly on
/// the grid; throws ConfigError naming the first violating pair.
std::vector<ChannelPair> pair_channels(const ChannelPlan& plan);

nlohmann::json to_json(const ChannelPlan& plan);

// ---------------------------------------------------------------------------

/// Both photons Gaussian, path 0, H, in arm register bin 0.
PureState emission_state(const BasisSpec& basis);

/// (|t1 t1> + e^{i phi} |t2 t2>)/sqrt2 (x) |0>|0>, with t1 = bin 0 (short
/// arm) and t2 = bin 1 (long arm).
PureState franson_input_state(const BasisSpec& basis, double phi);

struct TimescaleMargins {
  double pump_over_delay = 100.0;
  double delay_over_coherence = 10.0;
};

struct TimescaleReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks tau >> delta_t >> sigma_cor with the given margins.
TimescaleReport validate_timescales(double tau_pump_s, double delta_t_s, double sigma_cor_s,
                                    TimescaleMargins margins = {});

}  // namespace qet::source
