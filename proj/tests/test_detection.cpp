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
#include "qetsim/detection.hpp"
#include "qetsim/error.hpp"
#include "test_util.hpp"

using namespace qet;
using namespace qet::detection;
using namespace qet::testing;
using std::numbers::pi;

namespace {

CVector bell(int which) {
  const double r = 1.0 / std::sqrt(2.0);
  CVector v = CVector::Zero(4);
  switch (which) {
    case 0: v(0) = r; v(3) = r; break;   // phi+
    case 1: v(0) = r; v(3) = -r; break;  // phi-
    case 2: v(1) = r; v(2) = r; break;   // psi+
    default: v(1) = r; v(2) = -r; break; // psi-
  }
  return v;
}

Complex dot(const Projector& a, const Projector& b) {
  return std::conj(a.state[0]) * b.state[0] + std::conj(a.state[1]) * b.state[1];
}

}  // namespace

TEST_CASE("SLM projector states") {
  const double r = 1.0 / std::sqrt(2.0);
  const auto d = slm_projector(0.0);
  CHECK(std::abs(d.state[0] - r) < 1e-12);
  CHECK(std::abs(d.state[1] - r) < 1e-12);
  const auto a = slm_projector(pi / 2);
  CHECK(std::abs(a.state[0] - Complex(0, r)) < 1e-12);
  CHECK(std::abs(a.state[1] - Complex(0, -r)) < 1e-12);
  for (int k = 0; k < 24; ++k) {
    const double t = -pi + 2 * pi * k / 24;
    CHECK(std::abs(dot(slm_projector(t), slm_projector(t + pi / 2))) < 1e-12);
    const auto p01 = slm_projector(t, Side::idler, 0, 1);
    CHECK(std::abs(p01.state[0] - std::polar(r, t)) < 1e-12);
    CHECK(std::abs(p01.state[1] - std::polar(r, -t)) < 1e-12);
  }
  CHECK(slm_projector(0.3, Side::signal).side == Side::signal);
}

TEST_CASE("noise limits") {
  std::mt19937_64 rng(3);
  const CMatrix rho = random_density(rng, 4, 2);
  CHECK((apply_noise(rho, NoiseModel{}) - rho).norm() < 1e-15);
  NoiseModel full;
  full.white_noise_weight = 1.0;
  const CMatrix mixed = apply_noise(rho, full);
  CHECK((mixed - CMatrix::Identity(4, 4) / 4.0).norm() < 1e-15);
  CHECK((mixed * mixed).trace().real() == doctest::Approx(0.25));
}

TEST_CASE("noise keeps states valid over a parameter grid") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const CMatrix rho = random_density(rng, 4, 1 + k % 4);
    for (double w : {0.0, 0.3, 1.0}) {
      for (double p : {0.0, 0.5, 1.0}) {
        for (double s : {0.0, 0.4, 2.0}) {
          for (double off : {0.0, 1.3}) {
            NoiseModel n;
            n.white_noise_weight = w;
            n.dephasing_weight = p;
            n.phase_jitter_sigma = s;
            n.phase_offset = off;
            const CMatrix out = apply_noise(rho, n);
            CHECK(density_violation(out).empty());
            CHECK(std::abs(out.trace() - 1.0) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("noise coherence factor matches the off-diagonal of phi+") {
  NoiseModel n;
  n.white_noise_weight = 0.1;
  n.dephasing_weight = 0.05;
  n.phase_jitter_sigma = 0.3;
  const CMatrix out = apply_noise(density(bell(0)), n);
  CHECK(2.0 * std::abs(out(0, 3)) == doctest::Approx(coherence_factor(n)).epsilon(1e-12));
  n = NoiseModel{};
  n.phase_offset = 0.7;
  const CMatrix rot = apply_noise(density(bell(0)), n);
  CHECK(std::arg(rot(3, 0)) == doctest::Approx(0.7));
  CHECK_THROWS_AS(
      [] {
        NoiseModel bad;
        bad.white_noise_weight = 1.5;
        bad.validate();
      }(),
      ConfigError);
}

TEST_CASE("coincidence probabilities by overlap enumeration") {
  const CMatrix phi = density(bell(0));
  const auto d = slm_projector(0.0, Side::signal);
  for (int k = 0; k < 16; ++k) {
    const double t = pi * k / 16;
    // <D,theta|phi+> = (e^{-i t} + e^{i t})/(2 sqrt2) = cos t / sqrt2
    CHECK(coincidence_probability(phi, d, slm_projector(t)) ==
          doctest::Approx(std::cos(t) * std::cos(t) / 2).epsilon(1e-12));
  }
  CHECK(coincidence_probability(density(bell(2)), d, slm_projector(0.0)) == doctest::Approx(0.5));
  const CMatrix mixed = CMatrix::Identity(4, 4) / 4.0;
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    const CVector a = random_vector(rng, 2);
    const CVector b = random_vector(rng, 2);
    CHECK(coincidence_probability(mixed, custom_projector({a(0), a(1)}, Side::signal),
                                  custom_projector({b(0), b(1)}, Side::idler)) ==
          doctest::Approx(0.25));
  }
  CHECK_THROWS_AS(coincidence_probability(phi, d, d), ConfigError);
}

TEST_CASE("complete projector sets sum to one and probabilities are linear") {
  std::mt19937_64 rng(13);
  const CMatrix r1 = random_density(rng, 4, 2);
  const CMatrix r2 = random_density(rng, 4, 3);
  for (int k = 0; k < 8; ++k) {
    const double ts = 0.37 * k;
    const double ti = -0.21 * k;
    double total = 0.0;
    for (double a : {ts, ts + pi / 2}) {
      for (double b : {ti, ti + pi / 2}) {
        total += coincidence_probability(r1, slm_projector(a, Side::signal), slm_projector(b));
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    const auto ps = franson_projector(ts, Side::signal);
    const auto pi_ = franson_projector(ti);
    const double mix = coincidence_probability(0.3 * r1 + 0.7 * r2, ps, pi_);
    CHECK(mix == doctest::Approx(0.3 * coincidence_probability(r1, ps, pi_) +
                                 0.7 * coincidence_probability(r2, ps, pi_)));
  }
}

TEST_CASE("Poisson counting") {
  NoiseModel n;
  CountModel m;
  CHECK(simulate_counts(0.0, m, 10.0, n, 1) == 0);
  // mean 100 = p * 1e4 * 10 * 0.01
  const double p = 0.1;
  CHECK(expected_counts(p, m, 10.0, n) == doctest::Approx(100.0));
  double sum = 0.0;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) sum += static_cast<double>(simulate_counts(p, m, 10.0, n, 42, k));
  CHECK(std::abs(sum / draws - 100.0) < 3.0 * std::sqrt(100.0 / draws));
  CHECK(simulate_counts(p, m, 10.0, n, 7, 3) == simulate_counts(p, m, 10.0, n, 7, 3));
  n.dark_rate = 2.0;
  CHECK(expected_counts(0.0, m, 10.0, n) == doctest::Approx(20.0));
  CountModel bad;
  bad.pair_rate = -1.0;
  CHECK_THROWS_AS(simulate_counts(0.1, bad, 1.0, NoiseModel{}, 0), ConfigError);
  CHECK_THROWS_AS(simulate_counts(0.1, m, 0.0, NoiseModel{}, 0), ConfigError);
}

TEST_CASE("fringe scans") {
  const CMatrix phi = density(bell(0));
  const auto grid = uniform_grid(16, 2 * pi);
  const auto oam = fringe_scan(phi, ScanKind::oam, grid, slm_projector(0.0, Side::signal),
                               CountModel{}, 10.0, NoiseModel{}, 5);
  REQUIRE(oam.records.size() == 16);
  // period pi in theta
  for (int k = 0; k < 8; ++k) {
    CHECK(oam.records[k].probability == doctest::Approx(oam.records[k + 8].probability));
  }
  const CMatrix tb = density(bell(0));
  const auto fr = fringe_scan(tb, ScanKind::franson, grid, franson_projector(0.0, Side::signal),
                              CountModel{}, 10.0, NoiseModel{}, 5);
  CHECK(fr.records[0].probability == doctest::Approx(0.5));
  CHECK(fr.records[8].probability == doctest::Approx(0.0));
  CHECK(fr.records[4].probability == doctest::Approx(0.25));
  // Reordering the grid does not change the draw for a given index.
  const auto again = fringe_scan(phi, ScanKind::oam, grid, slm_projector(0.0, Side::signal),
                                 CountModel{}, 10.0, NoiseModel{}, 5);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(again.records[k].counts == oam.records[k].counts);
  const auto csv = oam.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
  CHECK(oam.sidecar()["rng"]["seed"] == 5);
  CHECK_THROWS_AS(fringe_scan(phi, ScanKind::oam, {}, slm_projector(0.0, Side::signal), CountModel{},
                              10.0, NoiseModel{}, 5),
                  ConfigError);
}
