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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qetsim/error.hpp"
#include "qetsim/interferometer.hpp"
#include "qetsim/source.hpp"
#include "test_util.hpp"

using namespace qet;
using namespace qet::interferometer;
using namespace qet::testing;
using std::numbers::pi;

namespace {

const BasisSpec kBasis;

double overlap2(const PureState& a, const PureState& b) { return std::norm(a.inner(b)); }

double concurrence(const CVector& v) {
  return 2.0 * std::abs(v(0) * v(3) - v(1) * v(2));
}

QubitEncoding time_encoding() { return {bin(0), bin(1)}; }

}  // namespace

TEST_CASE("each photon takes either arm with probability 1/2") {
  const auto out = franson_apply(source::emission_state(kBasis), 0.3, -1.1);
  const auto pairs = arrival_pairs(out);
  REQUIRE(pairs.size() == 4);
  for (const auto& [key, w] : pairs) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
  const auto hist = arrival_histogram(out);
  REQUIRE(hist.size() == 3);
  CHECK(hist.at(-1) == doctest::Approx(0.25));
  CHECK(hist.at(0) == doctest::Approx(0.5));
  CHECK(hist.at(1) == doctest::Approx(0.25));
}

TEST_CASE("central-peak postselection yields the time-bin Bell state") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int k = 0; k < 10; ++k) {
    const double ps = u(rng);
    const double pi_ = u(rng);
    const auto central = postselect_central_peak(franson_apply(source::emission_state(kBasis), ps, pi_));
    CHECK(central.success_prob == doctest::Approx(0.5).epsilon(1e-12));
    const auto ref = source::franson_input_state(kBasis, ps + pi_);
    CHECK(overlap2(central.state, ref) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eq1_phase(central.state) == doctest::Approx(std::remainder(ps + pi_, 2 * pi)));
  }
}

TEST_CASE("input on the wrong path or an empty central peak is rejected") {
  const auto side = PureState::basis_state(kBasis, mode(0, 0, Polarization::H, 1), bin(0));
  CHECK_THROWS_AS(franson_apply(side, 0.0, 0.0), ConfigError);
  const auto off = PureState::basis_state(kBasis, bin(0), bin(1));
  CHECK_THROWS_AS(postselect_central_peak(off), NullPostselection);
}

TEST_CASE("forward gate reaches each Bell target with unit fidelity") {
  for (double phi_in : {0.0, 0.7, -2.4}) {
    const auto input = source::franson_input_state(kBasis, phi_in);
    for (auto t : {BellTarget::phi_plus, BellTarget::phi_minus, BellTarget::psi_plus,
                   BellTarget::psi_minus, BellTarget::phi_plus_0}) {
      CAPTURE(to_string(t));
      CAPTURE(phi_in);
      const auto r = qet_forward(input, QetForwardConfig::for_target(kBasis, t, phi_in));
      CHECK(r.success_prob == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(overlap2(r.state, bell_state(kBasis, t)) == doctest::Approx(1.0).epsilon(1e-12));
      REQUIRE(r.hyperentangled.has_value());
      CHECK(r.hyperentangled->amplitudes().norm() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("forward gate adds the configured phases to the input phase") {
  const double phi_in = 0.4;
  auto cfg = QetForwardConfig::for_target(kBasis, BellTarget::phi_plus);
  cfg.signal.phase = 0.3;
  cfg.idler.phase = -0.9;
  const auto r = qet_forward(source::franson_input_state(kBasis, phi_in), cfg);
  CHECK(r.total_phase == doctest::Approx(phi_in + 0.3 - 0.9));
  // short arm -> l=-1, long arm -> l=+1
  const auto a_short = r.state.amplitude(oam(-1), oam(-1));
  const auto a_long = r.state.amplitude(oam(1), oam(1));
  CHECK(std::arg(a_long / a_short) == doctest::Approx(phi_in + 0.3 - 0.9).epsilon(1e-12));
}

TEST_CASE("forward gate preserves concurrence") {
  const auto enc = bell_encoding(BellTarget::phi_plus);
  for (double phi : {0.0, 1.0, 2.5}) {
    const auto input = source::franson_input_state(kBasis, phi);
    const auto r = qet_forward(input, QetForwardConfig::for_target(kBasis, BellTarget::phi_plus, 0.0));
    const double c_in = concurrence(to_two_qubit(input, time_encoding(), time_encoding()));
    const double c_out = concurrence(to_two_qubit(r.state, enc, enc));
    CHECK(c_in == doctest::Approx(1.0));
    CHECK(c_out == doctest::Approx(c_in).epsilon(1e-12));
  }
}

TEST_CASE("conversion efficiency counts the plates on the postselected branches") {
  const auto input = source::franson_input_state(kBasis, 0.0);
  const auto both = qet_forward(input, QetForwardConfig::for_target(kBasis, BellTarget::phi_plus));
  CHECK(both.conversion_efficiency == doctest::Approx(0.98 * 0.98).epsilon(1e-12));
  const auto one = qet_forward(input, QetForwardConfig::for_target(kBasis, BellTarget::phi_plus_0));
  CHECK(one.conversion_efficiency == doctest::Approx(0.5 * 0.98 * 0.98 + 0.5).epsilon(1e-12));
}

TEST_CASE("forward gate rejects inputs that are not time-bin Bell states") {
  const auto cfg = QetForwardConfig::for_target(kBasis, BellTarget::phi_plus);
  CHECK_THROWS_AS(qet_forward(PureState::basis_state(kBasis, bin(0), bin(0)), cfg), ConfigError);
  auto bad = cfg;
  bad.idler.delay_bins = 2;
  CHECK_THROWS_AS(qet_forward(source::franson_input_state(kBasis, 0.0), bad), ConfigError);
  // Without plates the arms are indistinguishable once the time register is erased.
  QetForwardConfig plain;
  CHECK_THROWS_AS(qet_forward(source::franson_input_state(kBasis, 0.0), plain), Error);
}

TEST_CASE("sorter routes charges to the assigned ports") {
  struct Case {
    int h, v;
    double alpha;
  };
  for (const Case c : {Case{0, 1, pi / 2}, Case{-1, 1, pi / 4}, Case{1, 2, pi / 2}}) {
    const auto cfg = SorterConfig::for_charges(c.h, c.v);
    CHECK(cfg.alpha == doctest::Approx(c.alpha));
    CHECK(sorter_leakage(kBasis, cfg, c.h) < 1e-12);
    CHECK(sorter_leakage(kBasis, cfg, c.v) < 1e-12);
    CHECK(sorter_op(kBasis, cfg).unitarity_error() < 1e-9);
  }
}

TEST_CASE("sorter at the wrong angle fails the extinction check") {
  const SorterConfig wrong{pi / 2, -1, 1};
  CHECK(sorter_leakage(kBasis, wrong, 1) > 0.1);
  ModeLabel d1 = oam(1);
  ModeLabel v1 = mode(0, 1, Polarization::V);
  ModeLabel dm = oam(-1);
  ModeLabel vm = mode(0, -1, Polarization::V);
  const auto sig = PureState::superposition(kBasis, {{d1, 1.0}, {v1, 1.0}});
  const auto idl = PureState::superposition(kBasis, {{dm, 1.0}, {vm, 1.0}});
  const auto pair = tensor(sig, idl);
  CHECK_THROWS_AS(sagnac_sorter(pair, wrong), ExtinctionError);
  CHECK_NOTHROW(sagnac_sorter(pair, SorterConfig::for_charges(-1, 1)));
  CHECK_THROWS_AS(sagnac_sorter(PureState::basis_state(kBasis, oam(1), oam(-1)),
                                SorterConfig::for_charges(-1, 1)),
                  ConfigError);
}

TEST_CASE("reverse gate maps OAM Bell states back to time bins") {
  for (double phi : {0.0, 0.8, -2.0}) {
    const auto input = PureState::superposition(
        kBasis, {{oam(0), oam(0), 1.0}, {oam(1), oam(1), std::polar(1.0, phi)}});
    const auto r = qet_reverse(input);
    CHECK(r.success_prob == doctest::Approx(0.25).epsilon(1e-12));
    const auto ref = source::franson_input_state(kBasis, phi);
    CHECK(overlap2(r.state, ref) == doctest::Approx(1.0).epsilon(1e-12));
    // only the l=1 branch passes a plate
    CHECK(r.conversion_efficiency == doctest::Approx(0.5 * 0.98 * 0.98 + 0.5).epsilon(1e-12));
  }
  // Product OAM input gives a product time-bin output.
  const auto r = qet_reverse(PureState::basis_state(kBasis, oam(1), oam(1)));
  CHECK(overlap2(r.state, PureState::basis_state(kBasis, bin(1), bin(1))) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const auto r0 = qet_reverse(PureState::basis_state(kBasis, oam(0), oam(0)));
  CHECK(overlap2(r0.state, PureState::basis_state(kBasis, bin(0), bin(0))) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward then reverse returns the input state") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (auto t : {BellTarget::phi_plus_0, BellTarget::phi_plus, BellTarget::phi_minus}) {
    for (int k = 0; k < 4; ++k) {
      CAPTURE(to_string(t));
      const double phi = u(rng);
      const auto input = source::franson_input_state(kBasis, phi);
      auto cfg = QetForwardConfig::for_target(kBasis, t, phi);
      cfg.signal.phase = 0.0;  // keep the input phase
      const auto fwd = qet_forward(input, cfg);
      ReverseConfig rc;
      rc.long_charge = t == BellTarget::phi_plus_0 ? 0 : 1;
      const auto back = qet_reverse(fwd.state, rc);
      CHECK(std::abs(back.state.inner(input)) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::arg(back.state.amplitude(bin(1), bin(1)) / back.state.amplitude(bin(0), bin(0))) ==
            doctest::Approx(std::remainder(phi, 2 * pi)).epsilon(1e-9));
    }
  }
}

TEST_CASE("reverse gate without erasure keeps polarization which-path information") {
  ReverseConfig rc;
  rc.erase = false;
  const auto input = PureState::superposition(kBasis, {{oam(0), oam(0), 1.0}, {oam(1), oam(1), 1.0}});
  const auto r = qet_reverse(input, rc);
  CHECK(r.success_prob == 1.0);
  const auto ph = r.state.amplitude(mode(0, 0, Polarization::H), mode(0, 0, Polarization::H));
  const auto pv = r.state.amplitude(mode(1, 0, Polarization::V), mode(1, 0, Polarization::V));
  CHECK(std::norm(ph) == doctest::Approx(0.5));
  CHECK(std::norm(pv) == doctest::Approx(0.5));
}

TEST_CASE("reverse gate rejects more than two charges") {
  const auto input = PureState::superposition(
      kBasis, {{oam(0), oam(0), 1.0}, {oam(1), oam(1), 1.0}, {oam(2), oam(2), 1.0}});
  CHECK_THROWS_AS(qet_reverse(input), ExtinctionError);
}
