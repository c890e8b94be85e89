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

#include "qetsim/detection.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qetsim/error.hpp"
#include "qetsim/io.hpp"

namespace qet::detection {

namespace {

using std::numbers::pi;

// Azimuthal samples for the hologram overlap; exact for |l| < kAzimuth / 2.
constexpr int kAzimuth = 64;

Projector make(ProjectorKind kind, double parameter, Side side, std::array<Complex, 2> state) {
  Projector p;
  p.kind = kind;
  p.parameter = parameter;
  p.side = side;
  p.state = state;
  validate(p);
  return p;
}

void check_range(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw ConfigError(std::string("noise: ") + name + " = " + io::fmt_double(v) +
                      " out of range [" + io::fmt_double(lo) + ", " + io::fmt_double(hi) + "]");
  }
}

}  // namespace

std::string to_string(ProjectorKind kind) {
  switch (kind) {
    case ProjectorKind::oam_superposition: return "oam";
    case ProjectorKind::oam_basis: return "oam_basis";
    case ProjectorKind::time_basis: return "time_basis";
    case ProjectorKind::franson_phase: return "franson";
    case ProjectorKind::custom: return "custom";
  }
  return "?";
}

std::string Projector::label() const {
  return to_string(kind) + "(" + io::fmt_double(parameter) + ")";
}

Projector Projector::on(Side s) const {
  Projector p = *this;
  p.side = s;
  return p;
}

void validate(const Projector& p) {
  const double n = std::norm(p.state[0]) + std::norm(p.state[1]);
  if (std::abs(n - 1.0) > kNormTolerance) {
    throw DimensionError("projector state not normalized: |psi|^2 = " + io::fmt_double(n));
  }
}

Projector slm_projector(double theta, Side side, int l_up, int l_down) {
  // Hologram transmission t(phi) = <theta|phi>; the fiber keeps the l = 0
  // component of t(phi) e^{i l phi}. The detected amplitude for input |l> is
  // therefore the azimuthal average below.
  auto detected = [&](int l) {
    Complex acc = 0.0;
    for (int k = 0; k < kAzimuth; ++k) {
      const double phi = 2.0 * pi * k / kAzimuth;
      const Complex t = (std::polar(1.0, -theta - l_up * phi) + std::polar(1.0, theta - l_down * phi)) /
                        std::sqrt(2.0);
      acc += t * std::polar(1.0, l * phi);
    }
    return acc / static_cast<double>(kAzimuth);
  };
  // The projector state is the conjugate of the detection amplitudes.
  return make(ProjectorKind::oam_superposition, theta, side,
              {std::conj(detected(l_up)), std::conj(detected(l_down))});
}

Projector basis_projector(int level, Side side, ProjectorKind kind) {
  if (level != 0 && level != 1) throw ConfigError("basis_projector: level must be 0 or 1");
  return make(kind, level, side,
              level == 0 ? std::array<Complex, 2>{1.0, 0.0} : std::array<Complex, 2>{0.0, 1.0});
}

Projector franson_projector(double phi, Side side) {
  const double r = 1.0 / std::sqrt(2.0);
  return make(ProjectorKind::franson_phase, phi, side, {Complex(r), std::polar(r, phi)});
}

Projector custom_projector(std::array<Complex, 2> state, Side side, std::string) {
  return make(ProjectorKind::custom, 0.0, side, state);
}

// ---------------------------------------------------------------------------

void NoiseModel::validate() const {
  check_range(white_noise_weight, 0.0, 1.0, "white_noise_weight");
  check_range(dephasing_weight, 0.0, 1.0, "dephasing_weight");
  check_range(phase_jitter_sigma, 0.0, 1e3, "phase_jitter_sigma");
  check_range(phase_offset, -2.0 * pi, 2.0 * pi, "phase_offset");
  check_range(detector_efficiency, 1e-12, 1.0, "detector_efficiency");
  check_range(spp_efficiency, 1e-12, 1.0, "spp_efficiency");
  check_range(dark_rate, 0.0, 1e12, "dark_rate");
  check_range(accidental_rate, 0.0, 1e12, "accidental_rate");
}

nlohmann::json to_json(const NoiseModel& n) {
  return {{"white_noise_weight", n.white_noise_weight},
          {"dephasing_weight", n.dephasing_weight},
          {"phase_jitter_sigma", n.phase_jitter_sigma},
          {"phase_offset", n.phase_offset},
          {"detector_efficiency", n.detector_efficiency},
          {"dark_rate", n.dark_rate},
          {"accidental_rate", n.accidental_rate},
          {"spp_efficiency", n.spp_efficiency}};
}

CMatrix density(const CVector& psi) {
  if (psi.size() != 4) throw DimensionError("density: expected a two-qubit vector");
  return psi * psi.adjoint();
}

CMatrix apply_noise(const CMatrix& rho, const NoiseModel& noise) {
  noise.validate();
  if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("apply_noise: expected 4x4");
  if (const auto why = density_violation(rho); !why.empty()) throw DimensionError("apply_noise: " + why);
  CMatrix out = rho;
  auto signal_bit = [](Eigen::Index k) { return static_cast<int>(k / 2); };
  if (noise.phase_offset != 0.0) {
    CVector u(4);
    for (Eigen::Index k = 0; k < 4; ++k) u(k) = std::polar(1.0, noise.phase_offset * signal_bit(k));
    out = u.asDiagonal() * out * u.conjugate().asDiagonal();
  }
  if (noise.phase_jitter_sigma > 0.0) {
    const double f = std::exp(-0.5 * noise.phase_jitter_sigma * noise.phase_jitter_sigma);
    for (Eigen::Index j = 0; j < 4; ++j) {
      for (Eigen::Index k = 0; k < 4; ++k) {
        if (signal_bit(j) != signal_bit(k)) out(j, k) *= f;
      }
    }
  }
  if (noise.dephasing_weight > 0.0) {
    const CMatrix diag = out.diagonal().asDiagonal();
    out = (1.0 - noise.dephasing_weight) * out + noise.dephasing_weight * diag;
  }
  if (noise.white_noise_weight > 0.0) {
    out = (1.0 - noise.white_noise_weight) * out +
          noise.white_noise_weight * CMatrix::Identity(4, 4) / 4.0;
  }
  return out;
}

double coherence_factor(const NoiseModel& noise) {
  return (1.0 - noise.white_noise_weight) * (1.0 - noise.dephasing_weight) *
         std::exp(-0.5 * noise.phase_jitter_sigma * noise.phase_jitter_sigma);
}

double coincidence_probability(const CMatrix& rho, const Projector& signal,
                               const Projector& idler) {
  if (signal.side == idler.side) throw ConfigError("coincidence_probability: projectors on the same photon");
  const Projector& s = signal.side == Side::signal ? signal : idler;
  const Projector& i = signal.side == Side::signal ? idler : signal;
  CVector v(4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) v(2 * a + b) = s.state[a] * i.state[b];
  }
  const double p = (v.adjoint() * rho * v)(0, 0).real();
  return std::clamp(p, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

double expected_counts(double p, const CountModel& model, double integration_s,
                       const NoiseModel& noise) {
  noise.validate();
  if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) throw ConfigError("simulate_counts: p out of [0,1]");
  if (model.pair_rate < 0.0) throw ConfigError("simulate_counts: negative pair rate");
  if (!(integration_s > 0.0)) throw ConfigError("simulate_counts: integration time must be > 0");
  if (!(model.throughput >= 0.0 && model.throughput <= 1.0)) {
    throw ConfigError("simulate_counts: throughput out of [0,1]");
  }
  const double eta = noise.detector_efficiency;
  return std::max(p, 0.0) * model.pair_rate * integration_s * eta * eta * model.throughput +
         (noise.dark_rate + noise.accidental_rate) * integration_s;
}

std::int64_t simulate_counts(double p, const CountModel& model, double integration_s,
                             const NoiseModel& noise, std::uint64_t seed, std::uint64_t stream) {
  const double mean = expected_counts(p, model, integration_s, noise);
  if (mean <= 0.0) return 0;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::poisson_distribution<std::int64_t> draw(mean);
  return draw(rng);
}

void CoincidenceDataset::validate() const {
  for (const auto& r : records) {
    if (r.counts < 0) throw Error("dataset: negative counts in " + r.setting);
    if (!(r.integration_s > 0.0)) throw Error("dataset: non-positive integration time in " + r.setting);
  }
}

std::string CoincidenceDataset::to_csv() const {
  std::ostringstream out;
  out << "setting,signal_param,idler_param,integration_time_s,probability,expected_counts,counts\n";
  for (const auto& r : records) {
    out << r.setting << ',' << io::fmt_double(r.signal_param) << ','
        << io::fmt_double(r.idler_param) << ',' << io::fmt_double(r.integration_s) << ','
        << io::fmt_double(r.probability) << ',' << io::fmt_double(r.expected) << ',' << r.counts
        << '\n';
  }
  return out.str();
}

nlohmann::json CoincidenceDataset::sidecar() const {
  nlohmann::json j = provenance;
  j["rng"] = {{"engine", "mt19937_64"},
              {"seed", rng_seed},
              {"stream_derivation", "seed_seq{seed_lo, seed_hi, record_lo, record_hi}"}};
  j["records"] = records.size();
  return j;
}

CoincidenceDataset measure(const CMatrix& rho, const std::vector<MeasurementSetting>& settings,
                           const CountModel& model, double integration_s,
                           const NoiseModel& noise, std::uint64_t seed) {
  const CMatrix noisy = apply_noise(rho, noise);
  CoincidenceDataset data;
  data.rng_seed = seed;
  data.records.reserve(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto& st = settings[k];
    CountRecord r;
    r.setting = st.signal.label() + "|" + st.idler.label();
    r.signal_param = st.signal.parameter;
    r.idler_param = st.idler.parameter;
    r.integration_s = integration_s;
    r.probability = coincidence_probability(noisy, st.signal, st.idler);
    r.expected = expected_counts(r.probability, model, integration_s, noise);
    r.counts = simulate_counts(r.probability, model, integration_s, noise, seed, k);
    data.records.push_back(std::move(r));
  }
  data.provenance = {{"noise", to_json(noise)},
                     {"pair_rate_hz", model.pair_rate},
                     {"throughput", model.throughput},
                     {"integration_time_s", integration_s},
                     {"defaults_note",
                      "pair rate, dark and accidental rates are simulation defaults, not measured"}};
  data.validate();
  return data;
}

CoincidenceDataset fringe_scan(const CMatrix& rho, ScanKind kind, const std::vector<double>& grid,
                               const Projector& fixed, const CountModel& model,
                               double integration_s, const NoiseModel& noise, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("fringe_scan: empty grid");
  const Side scan_side = fixed.side == Side::signal ? Side::idler : Side::signal;
  std::vector<MeasurementSetting> settings;
  settings.reserve(grid.size());
  for (double x : grid) {
    Projector p = kind == ScanKind::oam ? slm_projector(x, scan_side) : franson_projector(x, scan_side);
    if (fixed.side == Side::signal) {
      settings.push_back({fixed, p});
    } else {
      settings.push_back({p, fixed});
    }
  }
  auto data = measure(rho, settings, model, integration_s, noise, seed);
  data.provenance["scan"] = kind == ScanKind::oam ? "oam_theta" : "franson_phase";
  data.provenance["fixed_setting"] = fixed.label();
  return data;
}

std::vector<double> uniform_grid(int n, double period) {
  if (n < 1) throw ConfigError("uniform_grid: n must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = period * k / n;
  return g;
}

}  // namespace qet::detection
