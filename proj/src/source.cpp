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

#include "qetsim/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qetsim/error.hpp"
#include "qetsim/io.hpp"

namespace qet::source {

namespace {

double phase_matching(Envelope env, double detuning_hz, double width_hz) {
  const double x = detuning_hz / width_hz;
  if (env == Envelope::gaussian) return std::exp(-0.5 * x * x);
  return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
}

double wavelength_nm(double f_hz) { return kSpeedOfLight / f_hz * 1e9; }

// Linear interpolation of the half-maximum crossing between samples k and k+1.
double crossing(const std::vector<double>& y, const FrequencyAxis& axis, int k, double level) {
  const double t = (level - y[static_cast<std::size_t>(k)]) /
                   (y[static_cast<std::size_t>(k + 1)] - y[static_cast<std::size_t>(k)]);
  return axis.at(k) + t * axis.step();
}

}  // namespace

JsaModel::JsaModel(double center_wavelength_nm, double pump_linewidth_hz, Envelope envelope,
                   double envelope_width_hz, FrequencyAxis grid)
    : center_hz_(kSpeedOfLight / (center_wavelength_nm * 1e-9)),
      linewidth_hz_(pump_linewidth_hz), envelope_(envelope), width_hz_(envelope_width_hz),
      grid_(grid) {
  if (!(pump_linewidth_hz > 0.0) || !(envelope_width_hz > 0.0)) {
    throw ConfigError("JsaModel: linewidth and envelope width must be positive");
  }
  if (grid_.points == 0) grid_ = {center_hz_ - 25e12, center_hz_ + 25e12, 2001};
  if (grid_.points < 3 || !(grid_.max_hz > grid_.min_hz)) {
    throw ConfigError("JsaModel: frequency grid needs >= 3 points and max > min");
  }
}

JsaModel JsaModel::with_width(double envelope_width_hz) const {
  return JsaModel(wavelength_nm(center_hz_), linewidth_hz_, envelope_, envelope_width_hz, grid_);
}

Complex JsaModel::amplitude(double fs_hz, double fi_hz) const {
  const double slack = 1e-9 * grid_.step();
  for (double f : {fs_hz, fi_hz}) {
    if (f < grid_.min_hz - slack || f > grid_.max_hz + slack) {
      throw ConfigError("jsa_amplitude: frequency outside the sampled grid");
    }
  }
  const double sum_detune = (fs_hz + fi_hz - pump_frequency_hz()) / linewidth_hz_;
  const double pump = std::exp(-0.5 * sum_detune * sum_detune);
  return pump * phase_matching(envelope_, fs_hz - fi_hz, width_hz_);
}

std::vector<double> JsaModel::marginal(Side side) const {
  // Integrate |JSA|^2 over the partner frequency across +-8 pump widths
  // around the energy-conserving point; the pump is far narrower than the grid.
  constexpr int kSamples = 161;
  const double half = 8.0 * linewidth_hz_;
  const double h = 2.0 * half / (kSamples - 1);
  std::vector<double> out(static_cast<std::size_t>(grid_.points));
  for (int k = 0; k < grid_.points; ++k) {
    const double f = grid_.at(k);
    const double partner0 = pump_frequency_hz() - f;
    double acc = 0.0;
    for (int j = 0; j < kSamples; ++j) {
      const double g = partner0 - half + j * h;
      const double sum_detune = (f + g - pump_frequency_hz()) / linewidth_hz_;
      const double detune = side == Side::signal ? f - g : g - f;
      const double a = std::exp(-0.5 * sum_detune * sum_detune) *
                       phase_matching(envelope_, detune, width_hz_);
      const double w = (j == 0 || j == kSamples - 1) ? 0.5 : 1.0;
      acc += w * a * a * h;
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  const double peak = *std::max_element(out.begin(), out.end());
  for (double& v : out) v /= peak;
  return out;
}

double JsaModel::marginal_fwhm_nm() const {
  const auto y = marginal();
  const auto peak_it = std::max_element(y.begin(), y.end());
  const int peak = static_cast<int>(peak_it - y.begin());
  int lo = peak;
  while (lo > 0 && y[static_cast<std::size_t>(lo)] >= 0.5) --lo;
  int hi = peak;
  while (hi < grid_.points - 1 && y[static_cast<std::size_t>(hi)] >= 0.5) ++hi;
  if (y[static_cast<std::size_t>(lo)] >= 0.5 || y[static_cast<std::size_t>(hi)] >= 0.5) {
    throw Error("marginal_fwhm_nm: spectrum wider than the frequency grid");
  }
  const double f_lo = crossing(y, grid_, lo, 0.5);
  const double f_hi = crossing(y, grid_, hi - 1, 0.5);
  return wavelength_nm(f_lo) - wavelength_nm(f_hi);
}

JsaModel calibrate_width(const JsaModel& model, double target_nm, double tol_nm) {
  double lo = 1e11;
  double hi = 1e11;
  while (model.with_width(hi).marginal_fwhm_nm() < target_nm) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw Error("calibrate_width: target FWHM unreachable on this grid");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fwhm = model.with_width(mid).marginal_fwhm_nm();
    if (std::abs(fwhm - target_nm) < tol_nm) return model.with_width(mid);
    (fwhm < target_nm ? lo : hi) = mid;
  }
  return model.with_width(0.5 * (lo + hi));
}

std::string marginal_csv(const JsaModel& model) {
  const auto y = model.marginal();
  std::ostringstream os;
  os << "frequency_THz,wavelength_nm,amplitude,intensity\n";
  for (int k = 0; k < model.grid().points; ++k) {
    const double f = model.grid().at(k);
    const double v = y[static_cast<std::size_t>(k)];
    os << io::fmt_double(f * 1e-12) << ',' << io::fmt_double(wavelength_nm(f)) << ','
       << io::fmt_double(std::sqrt(v)) << ',' << io::fmt_double(v) << '\n';
  }
  return os.str();
}

std::string jsa_antidiagonal_csv(const JsaModel& model) {
  std::ostringstream os;
  os << "frequency_THz,wavelength_nm,amplitude,intensity\n";
  for (int k = 0; k < model.grid().points; ++k) {
    const double fs = model.grid().at(k);
    const double fi = model.pump_frequency_hz() - fs;
    if (fi < model.grid().min_hz || fi > model.grid().max_hz) continue;
    const double a = std::abs(model.amplitude(fs, fi));
    os << io::fmt_double(fs * 1e-12) << ',' << io::fmt_double(wavelength_nm(fs)) << ','
       << io::fmt_double(a) << ',' << io::fmt_double(a * a) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

double itu_frequency_hz(int channel) { return 190.0e12 + channel * 100.0e9; }

double itu_wavelength_nm(int channel) { return wavelength_nm(itu_frequency_hz(channel)); }

ChannelPlan ChannelPlan::standard(bool include_26_28) {
  ChannelPlan plan;
  for (int s = 22; s <= (include_26_28 ? 26 : 25); ++s) {
    plan.pairs.push_back({s, 2 * kCenterChannel - s});
  }
  return plan;
}

std::vector<ChannelPair> pair_channels(const ChannelPlan& plan) {
  for (const auto& p : plan.pairs) {
    // Integer channel arithmetic: f_s + f_i = 2 f(CH27) <=> n_s + n_i = 54.
    if (p.signal + p.idler != 2 * kCenterChannel) {
      throw ConfigError("channel pair (" + std::to_string(p.signal) + "," +
                        std::to_string(p.idler) + ") violates energy matching about CH27");
    }
  }
  return plan.pairs;
}

nlohmann::json to_json(const ChannelPlan& plan) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : plan.pairs) {
    pairs.push_back({{"signal_channel", p.signal},
                     {"idler_channel", p.idler},
                     {"signal_THz", itu_frequency_hz(p.signal) * 1e-12},
                     {"idler_THz", itu_frequency_hz(p.idler) * 1e-12},
                     {"signal_nm", itu_wavelength_nm(p.signal)},
                     {"idler_nm", itu_wavelength_nm(p.idler)}});
  }
  return {{"grid", "190.0 THz + n * 100 GHz"}, {"center_channel", kCenterChannel},
          {"pairs", pairs}};
}

// ---------------------------------------------------------------------------

PureState emission_state(const BasisSpec& basis) {
  return PureState::basis_state(basis, ModeLabel{}, ModeLabel{});
}

PureState franson_input_state(const BasisSpec& basis, double phi) {
  if (basis.t_max() < 2) throw ConfigError("franson_input_state: needs t_max >= 2");
  ModeLabel t1;
  ModeLabel t2;
  t2.time_bin = 1;
  const double r = 1.0 / std::numbers::sqrt2;
  const auto d = basis.dim();
  CVector v = CVector::Zero(static_cast<Eigen::Index>(d * d));
  v(static_cast<Eigen::Index>(basis.index(t1) * d + basis.index(t1))) = r;
  v(static_cast<Eigen::Index>(basis.index(t2) * d + basis.index(t2))) = std::polar(r, phi);
  return PureState(basis, 2, std::move(v));
}

TimescaleReport validate_timescales(double tau_pump_s, double delta_t_s, double sigma_cor_s,
                                    TimescaleMargins margins) {
  if (!(tau_pump_s > 0.0 && delta_t_s > 0.0 && sigma_cor_s > 0.0)) {
    throw ConfigError("validate_timescales: durations must be positive");
  }
  TimescaleReport report;
  if (tau_pump_s < margins.pump_over_delay * delta_t_s) {
    report.ok = false;
    report.violations.push_back("tau >> delta_t fails (pump coherence too short)");
  }
  if (delta_t_s < margins.delay_over_coherence * sigma_cor_s) {
    report.ok = false;
    report.violations.push_back("delta_t >> sigma_cor fails (delay below photon coherence)");
  }
  return report;
}

}  // namespace qet::source
