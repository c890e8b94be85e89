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

#include "qetsim/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "qetsim/error.hpp"
#include "qetsim/source.hpp"

namespace qet::interferometer {

namespace {

using std::numbers::pi;
using Index = Eigen::Index;

Index pair_index(const BasisSpec& basis, const ModeLabel& s, const ModeLabel& i) {
  return static_cast<Index>(basis.index(s) * basis.dim() + basis.index(i));
}

/// Rebuilds a pair state after relabeling every component; relabeling must
/// be injective on the populated support.
PureState relabel(const PureState& pair,
                  const std::function<std::pair<ModeLabel, ModeLabel>(const ModeLabel&,
                                                                      const ModeLabel&)>& f,
                  const std::string& what) {
  const BasisSpec& basis = pair.basis();
  CVector out = CVector::Zero(static_cast<Index>(pair.dim()));
  std::vector<bool> used(pair.dim(), false);
  pair.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex a) {
    const auto [ns, ni] = f(s, i);
    const Index k = pair_index(basis, ns, ni);
    if (used[static_cast<std::size_t>(k)]) {
      throw Error(what + ": distinct components collide, arms are not distinguishable");
    }
    used[static_cast<std::size_t>(k)] = true;
    out(k) = a;
  });
  return PureState::normalized(basis, 2, std::move(out));
}

Polarization other(Polarization p) {
  return p == Polarization::H ? Polarization::V : Polarization::H;
}

}  // namespace

MziConfig MziConfig::with_spp(const BasisSpec& basis, std::optional<int> long_charge,
                              std::optional<int> short_charge, double phase,
                              double spp_efficiency) {
  MziConfig cfg;
  cfg.phase = phase;
  if (long_charge) cfg.long_arm_insert = spiral_phase_plate(basis, *long_charge, spp_efficiency);
  if (short_charge) {
    cfg.short_arm_insert = spiral_phase_plate(basis, *short_charge, spp_efficiency);
  }
  return cfg;
}

ElementOp mzi_split(const BasisSpec& basis, const MziConfig& cfg) {
  if (cfg.delay_bins < 1) throw ConfigError("MziConfig: delay_bins must be >= 1");
  // -pi/2 cancels the i picked up on reflection into the long arm.
  ElementOp long_arm = delay_line(basis, cfg.delay_bins, cfg.phase - pi / 2);
  if (cfg.long_arm_insert) long_arm = compose(*cfg.long_arm_insert, long_arm);
  std::vector<ElementOp> chain{beam_splitter(basis, 0, 1), on_path(long_arm, 1)};
  if (cfg.short_arm_insert) chain.push_back(on_path(*cfg.short_arm_insert, 0));
  return compose(chain);
}

PureState franson_apply(const PureState& pair, const MziConfig& signal, const MziConfig& idler) {
  if (pair.photons() != 2) throw Error("franson_apply: two-photon state required");
  pair.for_each_two_photon([](const ModeLabel& s, const ModeLabel& i, Complex) {
    if (s.path != 0 || i.path != 0) {
      throw ConfigError("franson_apply: photons must enter on path 0");
    }
  });
  const BasisSpec& basis = pair.basis();
  PureState out = apply(mzi_split(basis, signal), pair, Side::signal);
  return apply(mzi_split(basis, idler), out, Side::idler);
}

PureState franson_apply(const PureState& pair, double phi_s, double phi_i) {
  MziConfig s;
  s.phase = phi_s;
  MziConfig i;
  i.phase = phi_i;
  return franson_apply(pair, s, i);
}

Projection postselect_central_peak(const PureState& pair) {
  auto central = project_pairs(pair, [](const ModeLabel& s, const ModeLabel& i) {
    return s.time_bin == i.time_bin;
  });
  auto merged = relabel(
      central.state,
      [](const ModeLabel& s, const ModeLabel& i) {
        ModeLabel a = s;
        ModeLabel b = i;
        a.path = 0;
        b.path = 0;
        return std::pair{a, b};
      },
      "postselect_central_peak");
  return {std::move(merged), central.success_prob};
}

PureState erase_time_register(const PureState& pair) {
  return relabel(
      pair,
      [](const ModeLabel& s, const ModeLabel& i) {
        if (s.time_bin != i.time_bin) {
          throw Error("erase_time_register: signal and idler arrival bins differ");
        }
        ModeLabel a = s;
        ModeLabel b = i;
        a.time_bin = 0;
        b.time_bin = 0;
        return std::pair{a, b};
      },
      "erase_time_register");
}

std::map<std::pair<int, int>, double> arrival_pairs(const PureState& pair) {
  std::map<std::pair<int, int>, double> out;
  pair.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex a) {
    out[{s.time_bin, i.time_bin}] += std::norm(a);
  });
  return out;
}

std::map<int, double> arrival_histogram(const PureState& pair) {
  std::map<int, double> out;
  for (const auto& [key, w] : arrival_pairs(pair)) out[key.first - key.second] += w;
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(BellTarget target) {
  switch (target) {
    case BellTarget::phi_plus: return "phi_plus";
    case BellTarget::phi_minus: return "phi_minus";
    case BellTarget::psi_plus: return "psi_plus";
    case BellTarget::psi_minus: return "psi_minus";
    case BellTarget::phi_plus_0: return "phi_plus_0";
  }
  return "?";
}

BellTarget bell_target_from_string(const std::string& name) {
  for (auto t : {BellTarget::phi_plus, BellTarget::phi_minus, BellTarget::psi_plus,
                 BellTarget::psi_minus, BellTarget::phi_plus_0}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown Bell target '" + name + "'");
}

QubitEncoding bell_encoding(BellTarget target) {
  ModeLabel up;
  ModeLabel down;
  if (target == BellTarget::phi_plus_0) {
    up.oam = 0;
    down.oam = 1;
  } else {
    up.oam = 1;
    down.oam = -1;
  }
  return {up, down};
}

PureState bell_state(const BasisSpec& basis, BellTarget target) {
  const auto enc = bell_encoding(target);
  const auto& u = enc.upper;
  const auto& d = enc.lower;
  switch (target) {
    case BellTarget::phi_plus:
    case BellTarget::phi_plus_0:
      return PureState::superposition(basis, {{u, u, 1.0}, {d, d, 1.0}});
    case BellTarget::phi_minus:
      return PureState::superposition(basis, {{u, u, 1.0}, {d, d, -1.0}});
    case BellTarget::psi_plus:
      return PureState::superposition(basis, {{u, d, 1.0}, {d, u, 1.0}});
    case BellTarget::psi_minus:
      return PureState::superposition(basis, {{u, d, 1.0}, {d, u, -1.0}});
  }
  throw ConfigError("bell_state: unknown target");
}

QetForwardConfig QetForwardConfig::for_target(const BasisSpec& basis, BellTarget target,
                                              double phi_in, double zeta) {
  // Output is (|l_short l_short> + e^{i Phi} |l_long l_long>)/sqrt2.
  QetForwardConfig cfg;
  double total = 0.0;
  switch (target) {
    case BellTarget::phi_plus:
    case BellTarget::phi_minus:
      cfg.signal = MziConfig::with_spp(basis, +1, -1, 0.0, zeta);
      cfg.idler = MziConfig::with_spp(basis, +1, -1, 0.0, zeta);
      total = target == BellTarget::phi_plus ? 0.0 : pi;
      break;
    case BellTarget::psi_plus:
    case BellTarget::psi_minus:
      cfg.signal = MziConfig::with_spp(basis, +1, -1, 0.0, zeta);
      cfg.idler = MziConfig::with_spp(basis, -1, +1, 0.0, zeta);
      total = target == BellTarget::psi_plus ? 0.0 : pi;
      break;
    case BellTarget::phi_plus_0:
      cfg.signal = MziConfig::with_spp(basis, std::nullopt, +1, 0.0, zeta);
      cfg.idler = MziConfig::with_spp(basis, std::nullopt, +1, 0.0, zeta);
      break;
  }
  cfg.signal.phase = total - phi_in;
  return cfg;
}

double eq1_phase(const PureState& state) {
  if (state.photons() != 2) throw ConfigError("time-bin input must be a two-photon state");
  Complex a00 = 0.0;
  Complex a11 = 0.0;
  state.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex a) {
    const bool gaussian = s.oam == 0 && i.oam == 0 && s.path == 0 && i.path == 0 &&
                          s.pol == Polarization::H && i.pol == Polarization::H;
    if (gaussian && s.time_bin == 0 && i.time_bin == 0) {
      a00 = a;
    } else if (gaussian && s.time_bin == 1 && i.time_bin == 1) {
      a11 = a;
    } else {
      throw ConfigError("input is not a time-bin Bell state: stray component " + to_string(s) + " " +
                        to_string(i));
    }
  });
  const double r2 = 0.5;
  if (std::abs(std::norm(a00) - r2) > 1e-9 || std::abs(std::norm(a11) - r2) > 1e-9) {
    throw ConfigError("input is not a time-bin Bell state: branch weights differ from 1/2");
  }
  return std::arg(a11 / a00);
}

QetResult qet_forward(const PureState& eq1_input, const QetForwardConfig& cfg) {
  if (cfg.signal.delay_bins != cfg.idler.delay_bins) {
    throw ConfigError("QetForwardConfig: signal and idler MZIs must share delay_bins");
  }
  const double phi_in = eq1_phase(eq1_input);
  const BasisSpec& basis = eq1_input.basis();
  MziConfig sig = cfg.signal;
  sig.phase += phi_in;
  const PureState out = franson_apply(source::emission_state(basis), sig, cfg.idler);
  Projection central = postselect_central_peak(out);

  double efficiency = 0.0;
  const int long_bin = cfg.signal.delay_bins;
  central.state.for_each_two_photon([&](const ModeLabel& s, const ModeLabel&, Complex a) {
    const bool is_long = s.time_bin == long_bin;
    const double thr = is_long ? sig.long_throughput() * cfg.idler.long_throughput()
                               : sig.short_throughput() * cfg.idler.short_throughput();
    efficiency += std::norm(a) * thr;
  });

  QetResult result{erase_time_register(central.state), central.success_prob, efficiency,
                   central.state, phi_in + cfg.signal.phase + cfg.idler.phase};
  return result;
}

// ---------------------------------------------------------------------------

SorterConfig SorterConfig::for_charges(int h_charge, int v_charge) {
  if (h_charge == v_charge) throw ConfigError("sorter: charges must differ");
  return {(pi / 2) / (v_charge - h_charge), h_charge, v_charge};
}

ElementOp sorter_op(const BasisSpec& basis, const SorterConfig& cfg) {
  // Double-path Sagnac: H path holds DP(0), V path DP(alpha); a common DP(0)
  // afterwards undoes the image inversion. Charge l gains e^{i 2 l alpha} on V.
  const ElementOp loop = compose(on_polarization(dove_prism(basis, 0.0), Polarization::H),
                                 on_polarization(dove_prism(basis, cfg.alpha), Polarization::V));
  return compose({loop, dove_prism(basis, 0.0),
                  polarization_phase(basis, -2.0 * cfg.h_charge * cfg.alpha),
                  half_wave_plate(basis, pi / 8), pbs(basis, 0, 1)});
}

double sorter_leakage(const BasisSpec& basis, const SorterConfig& cfg, int charge) {
  if (charge != cfg.h_charge && charge != cfg.v_charge) return 1.0;
  ModeLabel h;
  h.oam = charge;
  ModeLabel v = h;
  v.pol = Polarization::V;
  const auto diag = PureState::superposition(basis, {{h, 1.0}, {v, 1.0}});
  const auto out = apply(sorter_op(basis, cfg), diag);
  const int wrong = charge == cfg.h_charge ? 1 : 0;
  double leak = 0.0;
  out.for_each_single([&](const ModeLabel& l, Complex a) {
    if (l.path == wrong) leak += std::norm(a);
  }, 0.0);
  return leak;
}

PureState sagnac_sorter(const PureState& pair, const SorterConfig& cfg) {
  const BasisSpec& basis = pair.basis();
  std::set<int> charges;
  pair.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex a) {
    charges.insert(s.oam);
    charges.insert(i.oam);
    // Diagonal polarization: flipping either photon's pol leaves the amplitude.
    ModeLabel fs = s;
    fs.pol = other(s.pol);
    ModeLabel fi = i;
    fi.pol = other(i.pol);
    if (std::abs(pair.amplitude(fs, i) - a) > 1e-9 || std::abs(pair.amplitude(s, fi) - a) > 1e-9) {
      throw ConfigError("sagnac_sorter: input photons must be diagonally polarized");
    }
  });
  for (int l : charges) {
    const double leak = sorter_leakage(basis, cfg, l);
    if (leak > kExtinctionThreshold) {
      throw ExtinctionError("sagnac_sorter: charge " + std::to_string(l) + " leaks " +
                            std::to_string(leak) + " into the wrong port at alpha=" +
                            std::to_string(cfg.alpha));
    }
  }
  const ElementOp op = sorter_op(basis, cfg);
  return apply(op, apply(op, pair, Side::signal), Side::idler);
}

QetResult qet_reverse(const PureState& oam_input, const ReverseConfig& cfg) {
  const BasisSpec& basis = oam_input.basis();
  std::set<int> charges;
  oam_input.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex) {
    if (s.pol != Polarization::H || i.pol != Polarization::H || s.path != 0 || i.path != 0) {
      throw ConfigError("qet_reverse: input must be H-polarized on path 0");
    }
    charges.insert(s.oam);
    charges.insert(i.oam);
  });
  if (charges.size() > 2) throw ExtinctionError("qet_reverse: more than two charges populated");
  if (charges.size() == 1) charges.insert(*charges.begin() == 0 ? 1 : 0);
  const int low = *charges.begin();
  const int high = *charges.rbegin();
  const int long_charge = cfg.long_charge.value_or(high);
  if (long_charge != low && long_charge != high) {
    throw ConfigError("qet_reverse: long_charge is not one of the populated charges");
  }
  const int short_charge = long_charge == high ? low : high;
  SorterConfig sorter = SorterConfig::for_charges(short_charge, long_charge);
  if (cfg.alpha) sorter.alpha = *cfg.alpha;

  const ElementOp to_diag = half_wave_plate(basis, pi / 8);
  PureState state = apply(to_diag, apply(to_diag, oam_input, Side::signal), Side::idler);
  state = sagnac_sorter(state, sorter);

  // Long path: delay + SPP(-l) + 4f relay (identity); short path: SPP(-l) if needed.
  ElementOp long_arm = delay_line(basis, cfg.delay_bins, 0.0);
  double long_thr = 1.0;
  double short_thr = 1.0;
  if (long_charge != 0) {
    long_arm = compose(spiral_phase_plate(basis, -long_charge, cfg.spp_efficiency), long_arm);
    long_thr = cfg.spp_efficiency;
  }
  std::vector<ElementOp> chain{on_path(long_arm, 1)};
  if (short_charge != 0) {
    chain.push_back(on_path(spiral_phase_plate(basis, -short_charge, cfg.spp_efficiency), 0));
    short_thr = cfg.spp_efficiency;
  }
  chain.push_back(pbs(basis, 0, 1));
  const ElementOp arms = compose(chain);

  double efficiency = 0.0;
  state.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex a) {
    efficiency += std::norm(a) * (s.path == 1 ? long_thr : short_thr) *
                  (i.path == 1 ? long_thr : short_thr);
  });
  state = apply(arms, apply(arms, state, Side::signal), Side::idler);

  if (!cfg.erase) return {state, 1.0, efficiency, std::nullopt, 0.0};

  // Erase polarization: project each photon onto D, then rotate D -> H.
  state = apply(to_diag, apply(to_diag, state, Side::signal), Side::idler);
  auto erased = project_pairs(state, [](const ModeLabel& s, const ModeLabel& i) {
    return s.pol == Polarization::H && i.pol == Polarization::H;
  });
  return {erased.state, erased.success_prob, efficiency, std::nullopt, 0.0};
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const MziConfig& cfg) {
  nlohmann::json j{{"delay_bins", cfg.delay_bins}, {"phase", cfg.phase}};
  j["long_arm_insert"] = cfg.long_arm_insert ? nlohmann::json(cfg.long_arm_insert->name())
                                             : nlohmann::json(nullptr);
  j["short_arm_insert"] = cfg.short_arm_insert ? nlohmann::json(cfg.short_arm_insert->name())
                                               : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const QetForwardConfig& cfg) {
  return {{"signal_mzi", to_json(cfg.signal)}, {"idler_mzi", to_json(cfg.idler)}};
}

nlohmann::json to_json(const SorterConfig& cfg) {
  return {{"alpha", cfg.alpha}, {"h_charge", cfg.h_charge}, {"v_charge", cfg.v_charge}};
}

}  // namespace qet::interferometer
