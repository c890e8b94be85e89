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

#include "doctest.h"
#include "qetsim/elements.hpp"
#include "qetsim/error.hpp"
#include "test_util.hpp"

using namespace qet;
using namespace qet::testing;
using std::numbers::pi;

namespace {

const double kR = 1.0 / std::numbers::sqrt2;
const Complex kI(0.0, 1.0);

std::vector<ElementOp> all_elements(const BasisSpec& b) {
  return {identity(b),
          beam_splitter(b, 0, 1),
          pbs(b, 0, 1),
          half_wave_plate(b, pi / 8),
          half_wave_plate(b, 0.37),
          spiral_phase_plate(b, 1),
          spiral_phase_plate(b, -2),
          dove_prism(b, 0.3),
          delay_line(b, 1, 0.9),
          polarization_phase(b, 1.1),
          on_path(spiral_phase_plate(b, 1), 1),
          on_polarization(dove_prism(b, pi / 2), Polarization::V)};
}

}  // namespace

TEST_CASE("every element is unitary and norm preserving") {
  const BasisSpec b(1, 3, 2);
  std::mt19937_64 rng(17);
  for (const auto& op : all_elements(b)) {
    CAPTURE(op.name());
    CHECK(op.unitarity_error() < 1e-9);
    for (int trial = 0; trial < 100; ++trial) {
      const CVector psi = random_vector(rng, static_cast<Eigen::Index>(b.dim()));
      CHECK(std::abs((op.matrix() * psi).norm() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("beam splitter symmetric i-reflection convention") {
  const BasisSpec b(0, 1, 2);
  const auto bs = beam_splitter(b, 0, 1);
  const auto out = apply(bs, PureState::basis_state(b, mode(0, 0, Polarization::H, 0)));
  CHECK(std::abs(out.amplitude(mode(0, 0, Polarization::H, 0)) - kR) < 1e-15);
  CHECK(std::abs(out.amplitude(mode(0, 0, Polarization::H, 1)) - kI * kR) < 1e-15);
  const CMatrix twice = bs.matrix() * bs.matrix();
  CHECK((twice - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() > 0.5);
  CHECK(bs.unitarity_error() < 1e-12);

  // (|a> + |b>)/sqrt2 -> (1+i)/2 (|a> + |b>): equal output probabilities.
  const auto in = PureState::superposition(
      b, {{mode(0, 0, Polarization::H, 0), 1.0}, {mode(0, 0, Polarization::H, 1), 1.0}});
  const auto o = apply(bs, in);
  CHECK(std::norm(o.amplitude(mode(0, 0, Polarization::H, 0))) == doctest::Approx(0.5));
  CHECK(std::norm(o.amplitude(mode(0, 0, Polarization::H, 1))) == doctest::Approx(0.5));
  CHECK_THROWS_AS(beam_splitter(b, 0, 2), ConfigError);
  CHECK_THROWS_AS(beam_splitter(b, 1, 1), ConfigError);
}

TEST_CASE("polarizing beam splitter") {
  const BasisSpec b(0, 1, 2);
  const auto p = pbs(b, 0, 1);
  const auto h = apply(p, PureState::basis_state(b, mode(0, 0, Polarization::H, 0)));
  CHECK(std::abs(h.amplitude(mode(0, 0, Polarization::H, 0)) - 1.0) < 1e-15);
  const auto v = apply(p, PureState::basis_state(b, mode(0, 0, Polarization::V, 0)));
  CHECK(std::abs(v.amplitude(mode(0, 0, Polarization::V, 1)) - 1.0) < 1e-15);
  const auto diag = PureState::superposition(
      b, {{mode(0, 0, Polarization::H, 0), 1.0}, {mode(0, 0, Polarization::V, 0), 1.0}});
  const auto d = apply(p, diag);
  CHECK(std::norm(d.amplitude(mode(0, 0, Polarization::H, 0))) == doctest::Approx(0.5));
  CHECK(std::norm(d.amplitude(mode(0, 0, Polarization::V, 1))) == doctest::Approx(0.5));
  CHECK_THROWS_AS(pbs(b, 0, 5), ConfigError);
}

TEST_CASE("half-wave plate Jones action") {
  const BasisSpec b(0, 1, 1);
  const auto h = PureState::basis_state(b, mode(0, 0, Polarization::H));
  const auto v = PureState::basis_state(b, mode(0, 0, Polarization::V));
  const auto d = apply(half_wave_plate(b, pi / 8), h);
  CHECK(std::abs(d.amplitude(mode(0, 0, Polarization::H)) - kR) < 1e-15);
  CHECK(std::abs(d.amplitude(mode(0, 0, Polarization::V)) - kR) < 1e-15);
  CHECK(std::abs(apply(half_wave_plate(b, 0), v).amplitude(mode(0, 0, Polarization::V)) + 1.0) <
        1e-15);
  CHECK(std::abs(apply(half_wave_plate(b, pi / 4), h).amplitude(mode(0, 0, Polarization::V)) -
                 1.0) < 1e-15);
}

TEST_CASE("spiral phase plate shifts charge and guards truncation") {
  const BasisSpec b(2, 1, 1);
  const auto g = PureState::basis_state(b, oam(0));
  const auto spp = spiral_phase_plate(b, 1);
  CHECK(std::abs(apply(spp, g).amplitude(oam(1)) - 1.0) < 1e-15);
  CHECK(spp.throughput() == doctest::Approx(0.98));

  const CMatrix pair = spiral_phase_plate(b, 1).matrix() * spiral_phase_plate(b, -1).matrix();
  CHECK((pair - CMatrix::Identity(pair.rows(), pair.cols())).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(3);
  // States away from the boundary are restored by SPP(-q) after SPP(q).
  const auto inner = PureState::superposition(b, {{oam(-1), Complex(0.3, 0.1)}, {oam(0), 0.5}});
  const auto back = apply(spiral_phase_plate(b, -1), apply(spiral_phase_plate(b, 1), inner));
  CHECK((back.amplitudes() - inner.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(apply(spiral_phase_plate(b, 2), PureState::basis_state(b, oam(2))),
                  TruncationError);
}

TEST_CASE("dove prism inversion and pair phase law") {
  const BasisSpec b(2, 1, 1);
  const auto g = apply(dove_prism(b, 0.77), PureState::basis_state(b, oam(0)));
  CHECK(std::abs(g.amplitude(oam(0)) - 1.0) < 1e-15);
  const auto one = apply(dove_prism(b, pi / 2), PureState::basis_state(b, oam(1)));
  CHECK(std::abs(one.amplitude(oam(-1)) + 1.0) < 1e-15);

  // DP(a2) o DP(a1) = diag(e^{i 2 l (a1 - a2)}), no charge change.
  for (double a1 : {0.0, 0.4, 1.3}) {
    for (double a2 : {0.0, -0.2, 2.1}) {
      const CMatrix m = dove_prism(b, a2).matrix() * dove_prism(b, a1).matrix();
      CMatrix expect = CMatrix::Zero(m.rows(), m.cols());
      for (std::size_t k = 0; k < b.dim(); ++k) {
        const int l = b.label(k).oam;
        expect(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) =
            std::polar(1.0, 2.0 * l * (a1 - a2));
      }
      CHECK((m - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  // Relative phase between l and 0 for relative angle alpha is 2 l alpha, so
  // two charges separate by pi when alpha = 90 deg / (l1 - l2).
  for (int dl : {1, 2}) {
    const double alpha = (pi / 2) / dl;
    const CMatrix m = dove_prism(b, 0.0).matrix() * dove_prism(b, alpha).matrix();
    const Complex rel = m(static_cast<Eigen::Index>(b.index(oam(dl))),
                          static_cast<Eigen::Index>(b.index(oam(dl)))) /
                        m(static_cast<Eigen::Index>(b.index(oam(0))),
                          static_cast<Eigen::Index>(b.index(oam(0))));
    CHECK(std::abs(rel + 1.0) < 1e-12);
  }
}

TEST_CASE("delay line") {
  const BasisSpec b(0, 3, 1);
  const auto t0 = PureState::basis_state(b, bin(0));
  CHECK(std::abs(apply(delay_line(b, 1, 0.0), t0).amplitude(bin(1)) - 1.0) < 1e-15);
  CHECK(std::abs(apply(delay_line(b, 0, pi), t0).amplitude(bin(0)) + 1.0) < 1e-15);
  CHECK_THROWS_AS(apply(delay_line(b, 3, 0.0), t0), TruncationError);
  CHECK_THROWS_AS(apply(delay_line(b, 1, 0.0), PureState::basis_state(b, bin(2))),
                  TruncationError);
}

TEST_CASE("restriction requires an invariant subspace") {
  const BasisSpec b(1, 1, 2);
  CHECK_THROWS_AS(on_path(beam_splitter(b, 0, 1), 0), ConfigError);
  const auto arm = on_path(spiral_phase_plate(b, 1), 1);
  const auto untouched = apply(arm, PureState::basis_state(b, mode(0, 0, Polarization::H, 0)));
  CHECK(std::abs(untouched.amplitude(mode(0, 0, Polarization::H, 0)) - 1.0) < 1e-15);
  const auto shifted = apply(arm, PureState::basis_state(b, mode(0, 0, Polarization::H, 1)));
  CHECK(std::abs(shifted.amplitude(mode(0, 1, Polarization::H, 1)) - 1.0) < 1e-15);
}

TEST_CASE("lift onto either side of a pair") {
  const BasisSpec b(1, 2, 1);
  const auto vac = PureState::basis_state(b, oam(0), oam(0));
  const auto id = lift(identity(b), Side::signal);
  CHECK((id(vac).amplitudes() - vac.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
  const auto s = lift(spiral_phase_plate(b, 1), Side::signal)(vac);
  CHECK(std::abs(s.amplitude(oam(1), oam(0)) - 1.0) < 1e-15);

  const auto a = lift(half_wave_plate(b, 0.3), Side::signal);
  const auto c = lift(dove_prism(b, 0.8), Side::idler);
  const CMatrix ac = a.dense() * c.dense();
  const CMatrix ca = c.dense() * a.dense();
  CHECK((ac - ca).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.after(c).dense() - ac).cwiseAbs().maxCoeff() < 1e-12);

  // Reshaped application agrees with the explicit kron product.
  std::mt19937_64 rng(23);
  const auto psi = random_pair(rng, b);
  const auto full = a.after(c);
  CHECK((full(psi).amplitudes() - full.dense() * psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  const CMatrix u = full.dense();
  CHECK((u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-9);
}
