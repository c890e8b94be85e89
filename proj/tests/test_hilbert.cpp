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
#include "qetsim/error.hpp"
#include "qetsim/hilbert.hpp"
#include "test_util.hpp"

using namespace qet;
using namespace qet::testing;

namespace {

// Independent trace-out oracle for a two-factor split (da x db).
CMatrix brute_trace(const CMatrix& m, int da, int db, int keep) {
  const int dk = keep == 0 ? da : db;
  CMatrix out = CMatrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i) {
    for (int j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      const int other = keep == 0 ? db : da;
      for (int k = 0; k < other; ++k) {
        const int r = keep == 0 ? i * db + k : k * db + i;
        const int c = keep == 0 ? j * db + k : k * db + j;
        acc += m(r, c);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("basis enumeration is a documented bijection") {
  const BasisSpec basis;  // defaults 2, 4, 4
  CHECK(basis.dim() == 4u * 5u * 2u * 4u);
  for (std::size_t k = 0; k < basis.dim(); ++k) CHECK(basis.index(basis.label(k)) == k);
  // time-major, then oam, then pol, then path
  CHECK(basis.index(mode(0, -2, Polarization::H, 1)) == 1u);
  CHECK(basis.index(mode(0, -2, Polarization::V, 0)) == 4u);
  CHECK(basis.index(mode(0, -1, Polarization::H, 0)) == 8u);
  CHECK(basis.index(mode(1, -2, Polarization::H, 0)) == 40u);
  CHECK_THROWS_AS(basis.index(mode(0, 3)), TruncationError);
  CHECK_THROWS_AS(basis.index(mode(4, 0)), TruncationError);
}

TEST_CASE("tensor products") {
  const BasisSpec basis(0, 2, 1);  // two time bins, dim 4 with polarization
  const auto t1 = PureState::basis_state(basis, bin(0));
  const auto pair = tensor(t1, t1);
  CHECK(pair.dim() == 16u);
  CHECK(std::abs(pair.amplitude(bin(0), bin(0)) - 1.0) < 1e-15);

  const auto t2 = PureState::basis_state(basis, bin(1));
  const double phi = 0.7;
  CVector v = (tensor(t1, t1).amplitudes() +
               std::polar(1.0, phi) * tensor(t2, t2).amplitudes()) / std::numbers::sqrt2;
  const PureState eq1(basis, 2, v);
  CHECK(std::abs(eq1.amplitudes().norm() - 1.0) < 1e-12);
  CHECK(std::abs(eq1.amplitude(bin(1), bin(1)) - std::polar(1.0, phi) / std::numbers::sqrt2) <
        1e-12);

  CHECK_THROWS_AS(tensor(t1, t1, 8), DimensionError);
  CHECK_THROWS_AS(tensor(pair, t1), DimensionError);
}

TEST_CASE("norm violations raise instead of renormalizing") {
  const BasisSpec basis(0, 1, 1);
  CVector v = CVector::Zero(2);
  v(0) = 1.1;
  CHECK_THROWS_AS(PureState(basis, 1, v), Error);
  v(0) = 1.0 + 1e-10;
  CHECK_NOTHROW(PureState(basis, 1, v));
}

TEST_CASE("partial trace of Bell and product states") {
  const double r = 1.0 / std::numbers::sqrt2;
  CVector phi_plus(4);
  phi_plus << r, 0, 0, r;
  const auto rho = DensityMatrix::from_pure(phi_plus, {2, 2});
  for (int keep : {0, 1}) {
    const auto red = partial_trace(rho, keep);
    CHECK((red.matrix() - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(partial_trace(rho, 2), DimensionError);

  std::mt19937_64 rng(11);
  const DensityMatrix a({2}, random_density(rng, 2, 2));
  const DensityMatrix b({3}, random_density(rng, 3, 2));
  const auto ab = tensor(a, b);
  CHECK((partial_trace(ab, 0).matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((partial_trace(ab, 1).matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace matches brute-force summation for all splits up to 16") {
  std::mt19937_64 rng(2024);
  for (int da = 1; da <= 16; ++da) {
    for (int db = 1; da * db <= 16; ++db) {
      const CMatrix m = random_density(rng, da * db, std::min(3, da * db));
      const DensityMatrix rho({da, db}, m);
      for (int keep : {0, 1}) {
        const auto red = partial_trace(rho, keep);
        CHECK((red.matrix() - brute_trace(m, da, db, keep)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(red.matrix().trace() - Complex(1.0)) < 1e-12);
      }
    }
  }
  // Middle factor of a three-factor space.
  const CMatrix m = random_density(rng, 16, 4);
  const DensityMatrix rho({2, 4, 2}, m);
  const CMatrix brute_outer = brute_trace(m, 8, 2, 0);  // trace out last factor
  CHECK((partial_trace(rho, 1).matrix() - brute_trace(brute_outer, 2, 4, 1)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("projection and postselection") {
  const BasisSpec basis(1, 2, 1);
  const auto pair = PureState::superposition(
      basis, {{bin(0), bin(0), 1.0}, {bin(1), bin(1), 1.0}});
  const auto early = project_pairs(pair, [](const ModeLabel& s, const ModeLabel& i) {
    return s.time_bin == 0 && i.time_bin == 0;
  });
  CHECK(early.success_prob == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(early.state.amplitude(bin(0), bin(0)) - 1.0) < 1e-14);

  // <D,D|phi+> over {+1,-1}: enumerate the four logical amplitudes by hand.
  const auto phi_plus =
      PureState::superposition(basis, {{oam(1), oam(1), 1.0}, {oam(-1), oam(-1), 1.0}});
  const auto d = PureState::superposition(basis, {{oam(1), 1.0}, {oam(-1), 1.0}});
  const auto dd = tensor(d, d);
  const double r = 1.0 / std::numbers::sqrt2;
  // amplitudes: phi+ = (r, 0, 0, r), DD = (1/2, 1/2, 1/2, 1/2)
  const double oracle = std::norm(r * 0.5 + r * 0.5);
  const auto res = project(phi_plus, dd);
  CHECK(res.success_prob == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(0.5));

  const auto orth = PureState::superposition(basis, {{oam(1), oam(-1), 1.0}});
  CHECK_THROWS_AS(project(phi_plus, orth), NullPostselection);
}

TEST_CASE("project agrees with <psi|P|psi> on random states") {
  std::mt19937_64 rng(5);
  const BasisSpec basis(1, 2, 1);  // dim 12
  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = random_single(rng, basis);
    const auto phi = random_single(rng, basis);
    const auto res = project(psi, phi);
    const CMatrix p = phi.amplitudes() * phi.amplitudes().adjoint();
    const double expect = (psi.amplitudes().adjoint() * p * psi.amplitudes())(0).real();
    CHECK(std::abs(res.success_prob - expect) < 1e-12);
    const auto via_matrix = project(psi, p);
    CHECK(std::abs(via_matrix.success_prob - expect) < 1e-12);
  }
  CHECK_THROWS(project(random_single(rng, basis), CMatrix(2.0 * CMatrix::Identity(12, 12))));
}

TEST_CASE("canonical phase and logical restriction") {
  const BasisSpec basis(1, 2, 1);
  CVector v = CVector::Zero(static_cast<Eigen::Index>(basis.dim() * basis.dim()));
  const auto pair = PureState::superposition(
      basis, {{oam(1), oam(1), Complex(0.0, 1.0)}, {oam(-1), oam(-1), Complex(0.0, 1.0)}});
  const auto c = pair.canonical_phase();
  c.for_each_two_photon([](const ModeLabel&, const ModeLabel&, Complex a) {
    CHECK(std::abs(a.imag()) < 1e-15);
    CHECK(a.real() > 0.0);
  });
  const QubitEncoding enc{oam(1), oam(-1)};
  const CVector q = to_two_qubit(c, enc, enc);
  CHECK(std::abs(q(0) - 1.0 / std::numbers::sqrt2) < 1e-14);
  CHECK(std::abs(q(3) - 1.0 / std::numbers::sqrt2) < 1e-14);
  const QubitEncoding wrong{oam(0), oam(-1)};
  CHECK_THROWS(to_two_qubit(c, wrong, wrong));
}

TEST_CASE("JSON round trip preserves states") {
  std::mt19937_64 rng(9);
  const BasisSpec basis(1, 2, 2);
  for (int trial = 0; trial < 3; ++trial) {
    const auto psi = random_pair(rng, basis);
    const auto back = state_from_json(to_json(psi));
    CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
  }
  const auto sparse = PureState::basis_state(basis, oam(1), oam(-1));
  CHECK(to_json(sparse)["terms"].size() == 1u);
}
