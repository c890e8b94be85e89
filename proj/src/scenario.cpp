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

#include "qetsim/scenario.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "qetsim/config.hpp"
#include "qetsim/error.hpp"
#include "qetsim/interferometer.hpp"
#include "qetsim/io.hpp"

namespace qet::scenario {

namespace {

using std::numbers::pi;
using config::Reader;
using detection::NoiseModel;
using interferometer::BellTarget;
using nlohmann::json;

constexpr double kCalibrationTolerance = 1e-6;

QubitEncoding time_encoding() {
  ModeLabel t1;
  ModeLabel t2;
  t2.time_bin = 1;
  return {t1, t2};
}

// ---- parsing --------------------------------------------------------------

const std::vector<std::string> kParameters{"white_noise_weight", "dephasing_weight",
                                           "phase_jitter_sigma", "phase_offset"};
const std::vector<std::string> kMetrics{"visibility", "fidelity", "purity", "chsh"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

NoiseModel parse_noise(Reader r) {
  NoiseModel n;
  n.white_noise_weight = r.get_or("white_noise_weight", n.white_noise_weight);
  n.dephasing_weight = r.get_or("dephasing_weight", n.dephasing_weight);
  n.phase_jitter_sigma = r.get_or("phase_jitter_sigma", n.phase_jitter_sigma);
  n.phase_offset = r.get_or("phase_offset", n.phase_offset);
  n.detector_efficiency = r.get_or("detector_efficiency", n.detector_efficiency);
  n.dark_rate = r.get_or("dark_rate", n.dark_rate);
  n.accidental_rate = r.get_or("accidental_rate", n.accidental_rate);
  n.spp_efficiency = r.get_or("spp_efficiency", n.spp_efficiency);
  r.finish();
  try {
    n.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.path_of("") + " " + e.what());
  }
  return n;
}

std::vector<CalibrationStep> parse_steps(Reader& parent, const std::string& key) {
  std::vector<CalibrationStep> out;
  for (Reader r : parent.array(key)) {
    CalibrationStep s;
    s.parameter = r.get<std::string>("parameter");
    s.metric = r.get<std::string>("metric");
    s.target = r.get<double>("target");
    r.finish();
    if (!contains(kParameters, s.parameter)) {
      throw ConfigError(r.path_of("parameter") + ": unknown noise parameter '" + s.parameter + "'");
    }
    if (!contains(kMetrics, s.metric)) {
      throw ConfigError(r.path_of("metric") + ": unknown metric '" + s.metric + "'");
    }
    const double hi = s.metric == "chsh" ? 2.0 * std::sqrt(2.0) : 1.0;
    if (!(s.target > 0.0 && s.target <= hi)) {
      throw ConfigError(r.path_of("target") + ": must lie in (0, " + io::fmt_double(hi) + "]");
    }
    out.push_back(s);
  }
  return out;
}

template <class T>
void require(bool ok, const Reader& r, const std::string& key, const T& what) {
  if (!ok) throw ConfigError(r.path_of(key) + ": " + what);
}

// ---- calibration helpers --------------------------------------------------

double& parameter_ref(NoiseModel& n, const std::string& name) {
  if (name == "white_noise_weight") return n.white_noise_weight;
  if (name == "dephasing_weight") return n.dephasing_weight;
  if (name == "phase_jitter_sigma") return n.phase_jitter_sigma;
  if (name == "phase_offset") return n.phase_offset;
  throw ConfigError("unknown noise parameter '" + name + "'");
}

std::pair<double, double> parameter_range(const std::string& name) {
  if (name == "phase_jitter_sigma") return {0.0, 10.0};
  if (name == "phase_offset") return {0.0, pi};
  return {0.0, 1.0};
}

// ---- scenario plumbing ----------------------------------------------------

struct Prepared {
  MetricContext ctx;
  double throughput = 1.0;
  json meta = json::object();
  std::map<std::string, double> metrics;
};

CMatrix two_qubit_density(const PureState& s, const QubitEncoding& a, const QubitEncoding& b) {
  return detection::density(to_two_qubit(s, a, b));
}

Prepared prepare_franson_before(const ScenarioConfig& cfg) {
  Prepared p;
  const auto arms = interferometer::franson_apply(source::emission_state(cfg.basis), 0.0, 0.0);
  const auto hist = interferometer::arrival_histogram(arms);
  const auto central = interferometer::postselect_central_peak(arms);
  const auto enc = time_encoding();
  const CVector psi = to_two_qubit(central.state, enc, enc);
  p.ctx.rho = detection::density(psi);
  p.ctx.target = psi;
  p.ctx.scan = detection::ScanKind::franson;
  p.ctx.fixed = detection::franson_projector(0.0, Side::signal);
  p.throughput = central.success_prob;
  json h = json::object();
  for (const auto& [dt, w] : hist) h[std::to_string(dt)] = w;
  p.meta["arrival_histogram"] = h;
  p.metrics["central_peak_fraction"] = central.success_prob;
  return p;
}

struct ForwardOutcome {
  interferometer::QetResult result;
  CVector psi;
  CVector target;
  double target_fidelity;
};

ForwardOutcome forward(const ScenarioConfig& cfg, BellTarget target) {
  const auto input = source::franson_input_state(cfg.basis, cfg.input_phase);
  const auto fcfg = interferometer::QetForwardConfig::for_target(cfg.basis, target, cfg.input_phase,
                                                                 cfg.noise.spp_efficiency);
  auto result = interferometer::qet_forward(input, fcfg);
  const auto enc = interferometer::bell_encoding(target);
  const auto bell = interferometer::bell_state(cfg.basis, target);
  const CVector psi = to_two_qubit(result.state, enc, enc);
  const CVector ref = to_two_qubit(bell, enc, enc);
  const double f = std::norm(result.state.inner(bell));
  return {std::move(result), psi, ref, f};
}

Prepared prepare_oam(const ScenarioConfig& cfg) {
  const BellTarget target = interferometer::bell_target_from_string(cfg.target);
  const ForwardOutcome fwd = forward(cfg, target);
  Prepared p;
  p.ctx.rho = detection::density(fwd.psi);
  p.ctx.target = fwd.target;
  p.ctx.scan = detection::ScanKind::oam;
  p.ctx.fixed = detection::slm_projector(0.0, Side::signal);
  p.ctx.angles = cfg.chsh_angles;
  p.throughput = fwd.result.success_prob * fwd.result.conversion_efficiency;
  p.metrics["success_prob"] = fwd.result.success_prob;
  p.metrics["conversion_efficiency"] = fwd.result.conversion_efficiency;
  p.metrics["fidelity_ideal"] = fwd.target_fidelity;
  p.meta["target"] = cfg.target;
  p.meta["total_phase"] = fwd.result.total_phase;
  p.meta["forward_config"] = interferometer::to_json(interferometer::QetForwardConfig::for_target(
      cfg.basis, target, cfg.input_phase, cfg.noise.spp_efficiency));
  return p;
}

Prepared prepare_reverse(const ScenarioConfig& cfg) {
  const BellTarget target = interferometer::bell_target_from_string(cfg.target);
  const auto input = interferometer::bell_state(cfg.basis, target);
  interferometer::ReverseConfig rc;
  rc.spp_efficiency = cfg.noise.spp_efficiency;
  const auto rev = interferometer::qet_reverse(input, rc);
  const auto ref = source::franson_input_state(cfg.basis, 0.0);
  const auto enc = time_encoding();
  Prepared p;
  const CVector psi = to_two_qubit(rev.state, enc, enc);
  p.ctx.rho = detection::density(psi);
  p.ctx.target = to_two_qubit(ref, enc, enc);
  p.ctx.scan = detection::ScanKind::franson;
  p.ctx.fixed = detection::franson_projector(0.0, Side::signal);
  // reverse erasure, plate losses, then the central-peak window of the analyzer
  p.throughput = rev.success_prob * rev.conversion_efficiency * 0.5;
  p.metrics["reverse_success_prob"] = rev.success_prob;
  p.metrics["conversion_efficiency"] = rev.conversion_efficiency;
  p.metrics["fidelity_ideal"] = std::norm(rev.state.inner(ref));
  p.meta["input_target"] = cfg.target;
  return p;
}

Prepared prepare(const ScenarioConfig& cfg) {
  if (cfg.kind == "franson_before") return prepare_franson_before(cfg);
  if (cfg.kind == "qet_forward_tomo" || cfg.kind == "oam_fringe_chsh") return prepare_oam(cfg);
  if (cfg.kind == "qet_reverse_franson") return prepare_reverse(cfg);
  throw ConfigError("scenario '" + cfg.kind + "' has no noise calibration");
}

NoiseModel ideal_like(const NoiseModel& n) {
  NoiseModel out = n;
  out.white_noise_weight = 0.0;
  out.dephasing_weight = 0.0;
  out.phase_jitter_sigma = 0.0;
  out.phase_offset = 0.0;
  return out;
}

analysis::VisibilityFit fit_expected(const detection::CoincidenceDataset& data, double period) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : data.records) {
    x.push_back(r.idler_param);
    y.push_back(r.expected);
  }
  return analysis::fit_visibility(x, y, period);
}

class Builder {
 public:
  explicit Builder(const ScenarioConfig& cfg) : cfg_(cfg) {
    out_.report["scenario"] = cfg.kind;
    out_.report["version"] = kVersion;
    out_.report["config"] = to_json(cfg);
    out_.report["datasets"] = json::array();
  }

  void metric(const std::string& name, double value) { out_.metrics[name] = value; }
  void merge(const std::map<std::string, double>& m) {
    for (const auto& [k, v] : m) out_.metrics[k] = v;
  }
  json& section(const std::string& name) { return out_.report[name]; }

  void dataset(const std::string& stem, const detection::CoincidenceDataset& data) {
    file(stem + ".csv", data.to_csv());
    json side = data.sidecar();
    side["scenario"] = cfg_.kind;
    side["version"] = kVersion;
    file(stem + ".json", side.dump(2) + "\n");
    out_.report["datasets"].push_back(stem + ".csv");
  }

  void file(const std::string& name, std::string contents) {
    out_.files.push_back({name, std::move(contents)});
  }

  void calibration(const std::string& key, const NoiseModel& noise,
                   const std::vector<CalibrationRecord>& recs) {
    json steps = json::array();
    for (const auto& r : recs) steps.push_back(to_json(r));
    out_.report["calibration"][key] = {{"steps", steps}, {"noise", detection::to_json(noise)}};
  }

  RunReport finish() {
    json checks = json::object();
    for (const auto& [name, bound] : cfg_.checks) {
      const auto it = out_.metrics.find(name);
      if (it == out_.metrics.end()) {
        throw ConfigError("check." + name + ": scenario '" + cfg_.kind + "' reports no such metric");
      }
      const double v = it->second;
      const bool ok = (!bound.min || v >= *bound.min) && (!bound.max || v <= *bound.max);
      json c = {{"value", v}, {"pass", ok}};
      if (bound.min) c["min"] = *bound.min;
      if (bound.max) c["max"] = *bound.max;
      checks[name] = c;
      if (!ok) out_.failed_checks.push_back(name);
    }
    out_.report["checks"] = checks;
    out_.report["metrics"] = out_.metrics;
    return std::move(out_);
  }

 private:
  const ScenarioConfig& cfg_;
  RunReport out_;
};

// ---- scenarios ------------------------------------------------------------

void run_jsa(const ScenarioConfig& cfg, Builder& b) {
  const source::JsaModel base(source::kCenterWavelengthNm, cfg.pump_linewidth_hz, cfg.envelope);
  const auto model = source::calibrate_width(base, cfg.fwhm_target_nm);
  b.metric("fwhm_nm", model.marginal_fwhm_nm());
  b.metric("envelope_width_thz", model.envelope_width_hz() * 1e-12);
  const auto plan = source::ChannelPlan::standard(cfg.include_26_28);
  const auto pairs = source::pair_channels(plan);
  b.metric("channel_pairs_matched", static_cast<double>(pairs.size()));
  b.metric("ch27_wavelength_nm", source::itu_wavelength_nm(source::kCenterChannel));
  b.section("channels") = source::to_json(plan);
  const auto ts = source::validate_timescales(cfg.pump_coherence_s, cfg.mzi_delay_s,
                                              cfg.correlation_time_s);
  b.metric("timescales_ok", ts.ok ? 1.0 : 0.0);
  b.section("timescale_violations") = ts.violations;
  b.file("marginal.csv", source::marginal_csv(model));
  b.file("jsa_antidiagonal.csv", source::jsa_antidiagonal_csv(model));
  b.section("datasets") = {"marginal.csv", "jsa_antidiagonal.csv"};
}

void franson_scan(const ScenarioConfig& cfg, Builder& b, const Prepared& p,
                  const std::string& stem) {
  std::vector<CalibrationRecord> recs;
  const NoiseModel noise = calibrate_noise(cfg.calibration, cfg.noise, p.ctx, &recs);
  b.calibration("fringe", noise, recs);
  const auto grid = detection::uniform_grid(cfg.grid_points, 2 * pi);
  detection::CountModel model = cfg.counts;
  model.throughput = p.throughput;

  const auto ideal = detection::fringe_scan(p.ctx.rho, detection::ScanKind::franson, grid, p.ctx.fixed,
                                            model, cfg.integration_s, ideal_like(noise), cfg.seed);
  b.metric("visibility_ideal", fit_expected(ideal, 2 * pi).visibility);
  const auto data = detection::fringe_scan(p.ctx.rho, detection::ScanKind::franson, grid, p.ctx.fixed,
                                           model, cfg.integration_s, noise, cfg.seed);
  const auto fit = analysis::fit_visibility(data, 2 * pi);
  b.metric("visibility", fit.visibility);
  b.metric("visibility_sigma", fit.sigma_visibility);
  b.metric("visibility_model", analytic_visibility(detection::apply_noise(p.ctx.rho, noise), p.ctx));
  b.metric("local_bound_margin", analysis::local_bound_check(fit.visibility).margin);
  b.section("fit") = analysis::to_json(fit);
  b.dataset(stem, data);
}

void run_franson_before(const ScenarioConfig& cfg, Builder& b) {
  const Prepared p = prepare_franson_before(cfg);
  b.merge(p.metrics);
  b.section("model") = p.meta;
  const auto ts = source::validate_timescales(cfg.pump_coherence_s, cfg.mzi_delay_s,
                                              cfg.correlation_time_s);
  b.metric("timescales_ok", ts.ok ? 1.0 : 0.0);
  franson_scan(cfg, b, p, "franson_scan");
}

void run_forward_tomo(const ScenarioConfig& cfg, Builder& b) {
  const Prepared p = prepare_oam(cfg);
  b.merge(p.metrics);
  b.section("model") = p.meta;
  std::vector<CalibrationRecord> recs;
  const NoiseModel noise = calibrate_noise(cfg.calibration, cfg.noise, p.ctx, &recs);
  b.calibration("tomography", noise, recs);
  const CMatrix noisy = detection::apply_noise(p.ctx.rho, noise);
  b.metric("fidelity_model", analysis::fidelity(noisy, p.ctx.target));
  b.metric("purity_model", analysis::purity(noisy));

  detection::CountModel model = cfg.counts;
  model.throughput = p.throughput;
  const auto settings = analysis::tomography_settings();
  if (analysis::measurement_rank(settings) != 16) throw Error("tomography settings incomplete");
  const auto data = detection::measure(p.ctx.rho, settings, model, cfg.integration_s, noise, cfg.seed);
  const auto counts = analysis::counts_of(data);
  const auto linear = analysis::linear_inversion(settings, counts);
  const auto mle = analysis::mle_reconstruct(settings, counts, p.ctx.target);
  b.metric("fidelity", mle.fidelity);
  b.metric("fidelity_phase_opt", mle.fidelity_phase_opt);
  b.metric("purity", mle.purity);
  b.metric("concurrence", analysis::concurrence(mle.rho));
  b.metric("mle_converged", mle.converged ? 1.0 : 0.0);
  b.metric("linear_min_eigenvalue", linear.min_eigenvalue);
  b.section("tomography") = analysis::to_json(mle);
  b.section("tomography")["linear_inversion_negative"] = linear.negative;
  if (cfg.bootstrap_replicas > 0) {
    const auto boot = analysis::bootstrap(settings, counts, p.ctx.target, cfg.bootstrap_replicas,
                                          cfg.seed + 1);
    b.metric("fidelity_sigma", boot.fidelity_std);
    b.metric("purity_sigma", boot.purity_std);
    b.section("bootstrap") = {{"replicas", boot.replicas},
                              {"fidelity_mean", boot.fidelity_mean},
                              {"fidelity_std", boot.fidelity_std},
                              {"purity_mean", boot.purity_mean},
                              {"purity_std", boot.purity_std}};
  }
  b.dataset("tomography_counts", data);
  b.file("rho_mle.csv", analysis::density_csv(mle.rho));
  b.file("rho_ideal.csv", analysis::density_csv(p.ctx.rho));
}

void run_oam_chsh(const ScenarioConfig& cfg, Builder& b) {
  Prepared p = prepare_oam(cfg);
  b.merge(p.metrics);
  b.section("model") = p.meta;
  detection::CountModel model = cfg.counts;
  model.throughput = p.throughput;

  std::vector<CalibrationRecord> recs;
  const NoiseModel noise = calibrate_noise(cfg.calibration, cfg.noise, p.ctx, &recs);
  b.calibration("fringe", noise, recs);
  const auto grid = detection::uniform_grid(cfg.grid_points, 2 * pi);
  const auto ideal = detection::fringe_scan(p.ctx.rho, detection::ScanKind::oam, grid, p.ctx.fixed,
                                            model, cfg.integration_s, ideal_like(noise), cfg.seed);
  b.metric("visibility_ideal", fit_expected(ideal, pi).visibility);
  b.metric("S_ideal", analysis::chsh(p.ctx.rho, cfg.chsh_angles).S);
  const auto data = detection::fringe_scan(p.ctx.rho, detection::ScanKind::oam, grid, p.ctx.fixed,
                                           model, cfg.integration_s, noise, cfg.seed);
  const auto fit = analysis::fit_visibility(data, pi);
  b.metric("visibility", fit.visibility);
  b.metric("visibility_sigma", fit.sigma_visibility);
  b.metric("visibility_model", analytic_visibility(detection::apply_noise(p.ctx.rho, noise), p.ctx));
  b.metric("local_bound_margin", analysis::local_bound_check(fit.visibility).margin);
  b.section("fit") = analysis::to_json(fit);
  b.dataset("oam_fringe", data);

  std::vector<CalibrationRecord> chsh_recs;
  const NoiseModel chsh_noise = calibrate_noise(cfg.chsh_calibration, cfg.noise, p.ctx, &chsh_recs);
  b.calibration("chsh", chsh_noise, chsh_recs);
  const auto counts = detection::measure(p.ctx.rho, analysis::chsh_settings(cfg.chsh_angles), model,
                                         cfg.chsh_integration_s, chsh_noise, cfg.seed + 1);
  const auto bell = analysis::chsh(counts, cfg.chsh_angles);
  b.metric("S", bell.S);
  b.metric("sigma_S", bell.sigma_S);
  b.metric("violation_sigmas", bell.violation_sigmas);
  b.metric("S_model", analysis::chsh(detection::apply_noise(p.ctx.rho, chsh_noise), cfg.chsh_angles).S);
  b.section("chsh") = analysis::to_json(bell);
  b.dataset("chsh_counts", counts);
}

void run_reverse(const ScenarioConfig& cfg, Builder& b) {
  const Prepared p = prepare_reverse(cfg);
  b.merge(p.metrics);
  b.section("model") = p.meta;
  franson_scan(cfg, b, p, "reverse_franson_scan");
}

void run_roundtrip(const ScenarioConfig& cfg, Builder& b) {
  const BellTarget target = interferometer::bell_target_from_string(cfg.target);
  if (target == BellTarget::psi_plus || target == BellTarget::psi_minus) {
    throw ConfigError("target: roundtrip supports phi_plus, phi_minus and phi_plus_0");
  }
  const auto input = source::franson_input_state(cfg.basis, cfg.input_phase);
  auto fcfg = interferometer::QetForwardConfig::for_target(cfg.basis, target, cfg.input_phase,
                                                           cfg.noise.spp_efficiency);
  fcfg.signal.phase = 0.0;  // carry the input phase through unchanged
  const auto fwd = interferometer::qet_forward(input, fcfg);
  interferometer::ReverseConfig rc;
  rc.spp_efficiency = cfg.noise.spp_efficiency;
  rc.long_charge = target == BellTarget::phi_plus_0 ? 0 : 1;
  const auto rev = interferometer::qet_reverse(fwd.state, rc);
  ModeLabel t1;
  ModeLabel t2;
  t2.time_bin = 1;
  const double phase_out = std::arg(rev.state.amplitude(t2, t2) / rev.state.amplitude(t1, t1));
  b.metric("roundtrip_fidelity", std::norm(rev.state.inner(input)));
  b.metric("roundtrip_phase_error", std::abs(std::remainder(phase_out - cfg.input_phase, 2 * pi)));
  b.metric("forward_success_prob", fwd.success_prob);
  b.metric("reverse_success_prob", rev.success_prob);
  b.metric("forward_conversion_efficiency", fwd.conversion_efficiency);
  b.metric("reverse_conversion_efficiency", rev.conversion_efficiency);
  b.section("forward_config") = interferometer::to_json(fcfg);
  b.file("roundtrip_state.json", to_json(rev.state).dump(2) + "\n");
  b.section("datasets") = {"roundtrip_state.json"};
}

json bound_json(const Bound& b) {
  json j = json::object();
  if (b.min) j["min"] = *b.min;
  if (b.max) j["max"] = *b.max;
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds{"jsa",          "franson_before",
                                              "qet_forward_tomo", "oam_fringe_chsh",
                                              "qet_reverse_franson", "roundtrip"};
  return kinds;
}

std::string describe(const std::string& kind) {
  if (kind == "jsa") return "joint spectrum, 80 nm marginal calibration, ITU channel pairing";
  if (kind == "franson_before") return "Franson fringe of the time-bin source state";
  if (kind == "qet_forward_tomo") return "forward gate to an OAM Bell state, MLE tomography";
  if (kind == "oam_fringe_chsh") return "OAM fringe after the forward gate and a CHSH test";
  if (kind == "qet_reverse_franson") return "reverse gate back to time bins, Franson fringe";
  if (kind == "roundtrip") return "forward then reverse gate, fidelity to the input";
  throw ConfigError("unknown scenario '" + kind + "'");
}

ScenarioConfig parse_config(const json& j) {
  Reader r(j, "");
  ScenarioConfig c;
  c.kind = r.get<std::string>("scenario");
  require(contains(scenario_kinds(), c.kind), r, "scenario", "unknown scenario '" + c.kind + "'");
  if (auto b = r.optional_child("basis")) {
    const int l_max = b->get_or("l_max", c.basis.l_max());
    const int t_max = b->get_or("t_max", c.basis.t_max());
    const int n_paths = b->get_or("n_paths", c.basis.n_paths());
    b->finish();
    require(l_max >= 1, *b, "l_max", "must be >= 1 (charges +-1 are used)");
    require(t_max >= 2, *b, "t_max", "must be >= 2 (one-bin MZI delay)");
    require(n_paths >= 2, *b, "n_paths", "must be >= 2 (MZI arms)");
    c.basis = BasisSpec(l_max, t_max, n_paths);
  }
  c.seed = r.get_or<std::uint64_t>("seed", c.seed);
  if (auto n = r.optional_child("noise")) c.noise = parse_noise(*n);
  c.calibration = parse_steps(r, "calibration");
  if (auto k = r.optional_child("counts")) {
    c.counts.pair_rate = k->get_or("pair_rate_hz", c.counts.pair_rate);
    c.integration_s = k->get_or("integration_s", c.integration_s);
    k->finish();
    require(c.counts.pair_rate >= 0.0, *k, "pair_rate_hz", "must be >= 0");
    require(c.integration_s > 0.0, *k, "integration_s", "must be > 0");
  }
  if (auto g = r.optional_child("grid")) {
    c.grid_points = g->get_or("points", c.grid_points);
    g->finish();
    require(c.grid_points >= 6, *g, "points", "need at least 6 points for a fringe fit");
  }
  const std::string default_target = c.kind == "qet_reverse_franson" || c.kind == "qet_forward_tomo"
                                         ? "phi_plus_0"
                                         : "phi_plus";
  c.target = r.get_or<std::string>("target", default_target);
  try {
    interferometer::bell_target_from_string(c.target);
  } catch (const ConfigError& e) {
    throw ConfigError(r.path_of("target") + ": " + e.what());
  }
  c.input_phase = r.get_or("input_phase", c.input_phase);
  c.bootstrap_replicas = r.get_or("bootstrap_replicas", c.bootstrap_replicas);
  require(c.bootstrap_replicas >= 0, r, "bootstrap_replicas", "must be >= 0");
  if (auto ch = r.optional_child("chsh")) {
    c.chsh_integration_s = ch->get_or("integration_s", c.chsh_integration_s);
    require(c.chsh_integration_s > 0.0, *ch, "integration_s", "must be > 0");
    c.chsh_calibration = parse_steps(*ch, "calibration");
    if (auto a = ch->optional_child("angles")) {
      c.chsh_angles.a = a->get_or("a", c.chsh_angles.a);
      c.chsh_angles.a2 = a->get_or("a_prime", c.chsh_angles.a2);
      c.chsh_angles.b = a->get_or("b", c.chsh_angles.b);
      c.chsh_angles.b2 = a->get_or("b_prime", c.chsh_angles.b2);
      a->finish();
    }
    ch->finish();
  }
  if (auto s = r.optional_child("jsa")) {
    c.fwhm_target_nm = s->get_or("fwhm_target_nm", c.fwhm_target_nm);
    require(c.fwhm_target_nm > 0.0, *s, "fwhm_target_nm", "must be > 0");
    const std::string env = s->get_or<std::string>("envelope", "sinc");
    require(env == "sinc" || env == "gaussian", *s, "envelope", "must be 'sinc' or 'gaussian'");
    c.envelope = env == "sinc" ? source::Envelope::sinc : source::Envelope::gaussian;
    c.pump_linewidth_hz = s->get_or("pump_linewidth_hz", c.pump_linewidth_hz);
    require(c.pump_linewidth_hz > 0.0, *s, "pump_linewidth_hz", "must be > 0");
    c.include_26_28 = s->get_or("include_26_28", c.include_26_28);
    s->finish();
  }
  if (auto t = r.optional_child("timescales")) {
    c.pump_coherence_s = t->get_or("pump_coherence_s", c.pump_coherence_s);
    c.mzi_delay_s = t->get_or("mzi_delay_s", c.mzi_delay_s);
    c.correlation_time_s = t->get_or("correlation_time_s", c.correlation_time_s);
    t->finish();
  }
  if (auto ck = r.optional_child("check")) {
    for (const auto& item : ck->node().items()) {
      Reader br = ck->child(item.key());
      Bound bound;
      if (br.has("min")) bound.min = br.get<double>("min");
      if (br.has("max")) bound.max = br.get<double>("max");
      br.finish();
      if (bound.min && bound.max && *bound.min > *bound.max) {
        throw ConfigError(br.path_of("min") + ": exceeds max");
      }
      c.checks[item.key()] = bound;
    }
    ck->finish();
  }
  r.finish();
  return c;
}

ScenarioConfig load_config(const std::string& path) { return parse_config(config::load_json(path)); }

json to_json(const ScenarioConfig& c) {
  json steps = json::array();
  for (const auto& s : c.calibration) {
    steps.push_back({{"parameter", s.parameter}, {"metric", s.metric}, {"target", s.target}});
  }
  json chsh_steps = json::array();
  for (const auto& s : c.chsh_calibration) {
    chsh_steps.push_back({{"parameter", s.parameter}, {"metric", s.metric}, {"target", s.target}});
  }
  json checks = json::object();
  for (const auto& [k, b] : c.checks) checks[k] = bound_json(b);
  return {{"scenario", c.kind},
          {"basis", qet::to_json(c.basis)},
          {"seed", c.seed},
          {"noise", detection::to_json(c.noise)},
          {"calibration", steps},
          {"counts", {{"pair_rate_hz", c.counts.pair_rate}, {"integration_s", c.integration_s}}},
          {"grid", {{"points", c.grid_points}}},
          {"target", c.target},
          {"input_phase", c.input_phase},
          {"bootstrap_replicas", c.bootstrap_replicas},
          {"chsh",
           {{"integration_s", c.chsh_integration_s},
            {"calibration", chsh_steps},
            {"angles",
             {{"a", c.chsh_angles.a},
              {"a_prime", c.chsh_angles.a2},
              {"b", c.chsh_angles.b},
              {"b_prime", c.chsh_angles.b2}}}}},
          {"jsa",
           {{"fwhm_target_nm", c.fwhm_target_nm},
            {"envelope", c.envelope == source::Envelope::sinc ? "sinc" : "gaussian"},
            {"pump_linewidth_hz", c.pump_linewidth_hz},
            {"include_26_28", c.include_26_28}}},
          {"timescales",
           {{"pump_coherence_s", c.pump_coherence_s},
            {"mzi_delay_s", c.mzi_delay_s},
            {"correlation_time_s", c.correlation_time_s}}},
          {"check", checks}};
}

// ---- calibration ----------------------------------------------------------

double analytic_visibility(const CMatrix& rho, const MetricContext& ctx) {
  const double period = ctx.scan == detection::ScanKind::oam ? pi : 2 * pi;
  const auto grid = detection::uniform_grid(64, period);
  const Side scan_side = ctx.fixed.side == Side::signal ? Side::idler : Side::signal;
  std::vector<double> y;
  for (double x : grid) {
    const auto p = ctx.scan == detection::ScanKind::oam ? detection::slm_projector(x, scan_side)
                                                        : detection::franson_projector(x, scan_side);
    y.push_back(detection::coincidence_probability(rho, ctx.fixed, p));
  }
  return analysis::fit_visibility(grid, y, period).visibility;
}

double analytic_metric(const std::string& metric, const CMatrix& noisy, const MetricContext& ctx) {
  if (metric == "visibility") return analytic_visibility(noisy, ctx);
  if (metric == "fidelity") return analysis::fidelity(noisy, ctx.target);
  if (metric == "purity") return analysis::purity(noisy);
  if (metric == "chsh") return analysis::chsh(noisy, ctx.angles).S;
  throw ConfigError("unknown metric '" + metric + "'");
}

NoiseModel calibrate_noise(const std::vector<CalibrationStep>& steps, NoiseModel base,
                           const MetricContext& ctx, std::vector<CalibrationRecord>* records) {
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& step = steps[k];
    auto eval = [&](double x) {
      NoiseModel n = base;
      parameter_ref(n, step.parameter) = x;
      return analytic_metric(step.metric, detection::apply_noise(ctx.rho, n), ctx);
    };
    auto [lo, hi] = parameter_range(step.parameter);
    double flo = eval(lo);
    double fhi = eval(hi);
    double x = lo;
    double fx = flo;
    int it = 0;
    if (std::abs(flo - step.target) <= kCalibrationTolerance) {
      x = lo;
      fx = flo;
    } else if (std::abs(fhi - step.target) <= kCalibrationTolerance) {
      x = hi;
      fx = fhi;
    } else if ((flo - step.target) * (fhi - step.target) > 0.0) {
      throw ConfigError("calibration[" + std::to_string(k) + "]: " + step.metric + " = " +
                        io::fmt_double(step.target) + " is unreachable with " + step.parameter +
                        " (metric spans " + io::fmt_double(std::min(flo, fhi)) + " .. " +
                        io::fmt_double(std::max(flo, fhi)) + ")");
    } else {
      for (; it < 200; ++it) {
        x = 0.5 * (lo + hi);
        fx = eval(x);
        if (std::abs(fx - step.target) <= kCalibrationTolerance || hi - lo < 1e-15) break;
        if ((fx - step.target) * (flo - step.target) > 0.0) {
          lo = x;
          flo = fx;
        } else {
          hi = x;
        }
      }
    }
    if (std::abs(fx - step.target) > 1e-4) {
      throw Error("calibration[" + std::to_string(k) + "]: bisection did not reach the target");
    }
    parameter_ref(base, step.parameter) = x;
    if (records) records->push_back({step, x, fx, it});
  }
  return base;
}

json to_json(const CalibrationRecord& r) {
  return {{"parameter", r.step.parameter}, {"metric", r.step.metric}, {"target", r.step.target},
          {"solved", r.solved},            {"achieved", r.achieved},  {"iterations", r.iterations}};
}

// ---- running --------------------------------------------------------------

RunReport run(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Builder b(cfg);
  if (cfg.kind == "jsa") {
    run_jsa(cfg, b);
  } else if (cfg.kind == "franson_before") {
    run_franson_before(cfg, b);
  } else if (cfg.kind == "qet_forward_tomo") {
    run_forward_tomo(cfg, b);
  } else if (cfg.kind == "oam_fringe_chsh") {
    run_oam_chsh(cfg, b);
  } else if (cfg.kind == "qet_reverse_franson") {
    run_reverse(cfg, b);
  } else if (cfg.kind == "roundtrip") {
    run_roundtrip(cfg, b);
  } else {
    throw ConfigError("scenario: unknown '" + cfg.kind + "'");
  }
  RunReport out = b.finish();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

json calibrate(const ScenarioConfig& cfg) {
  const Prepared p = prepare(cfg);
  json out = {{"scenario", cfg.kind}, {"version", kVersion}};
  auto solve = [&](const std::string& key, const std::vector<CalibrationStep>& steps) {
    std::vector<CalibrationRecord> recs;
    const NoiseModel n = calibrate_noise(steps, cfg.noise, p.ctx, &recs);
    json s = json::array();
    for (const auto& r : recs) s.push_back(to_json(r));
    out[key] = {{"steps", s}, {"noise", detection::to_json(n)}};
  };
  solve(cfg.kind == "qet_forward_tomo" ? "tomography" : "fringe", cfg.calibration);
  if (cfg.kind == "oam_fringe_chsh") solve("chsh", cfg.chsh_calibration);
  return out;
}

void write_outputs(const RunReport& report, const std::filesystem::path& dir) {
  for (const auto& f : report.files) io::write_atomic(dir / f.name, f.contents);
  io::write_atomic(dir / "report.json", report.report.dump(2) + "\n");
  const json timing = {{"wall_seconds", report.wall_seconds}};
  io::write_atomic(dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace qet::scenario
