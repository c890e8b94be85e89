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

#include "qetsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qetsim/error.hpp"
#include "qetsim/io.hpp"

namespace qet::analysis {

namespace {

using std::numbers::pi;
using Eigen::VectorXd;

constexpr int kD = 4;
constexpr int kParams = 16;

CMatrix product_projector(const MeasurementSetting& st) {
  const Projector& s = st.signal.side == Side::signal ? st.signal : st.idler;
  const Projector& i = st.signal.side == Side::signal ? st.idler : st.signal;
  CVector v(kD);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) v(2 * a + b) = s.state[a] * i.state[b];
  }
  return v * v.adjoint();
}

void check_counts(const std::vector<MeasurementSetting>& settings, const std::vector<double>& counts) {
  if (settings.size() != counts.size()) {
    throw ConfigError("tomography: " + std::to_string(counts.size()) + " counts for " +
                      std::to_string(settings.size()) + " settings");
  }
  double total = 0.0;
  for (double n : counts) {
    if (n < 0.0) throw ConfigError("tomography: negative counts");
    total += n;
  }
  if (!(total > 0.0)) throw ConfigError("tomography: no counts");
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

CMatrix psd_clip(const CMatrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m));
  VectorXd ev = es.eigenvalues().cwiseMax(floor);
  CMatrix out = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return out / out.trace().real();
}

/// Lower-triangular T with T^dag T = rho, via Cholesky of the index-reversed rho.
CMatrix lower_factor(const CMatrix& rho) {
  CMatrix rev(kD, kD);
  for (int i = 0; i < kD; ++i) {
    for (int j = 0; j < kD; ++j) rev(i, j) = rho(kD - 1 - i, kD - 1 - j);
  }
  const CMatrix l = Eigen::LLT<CMatrix>(rev).matrixL();
  CMatrix u(kD, kD);  // J L J, upper triangular, rho = U U^dag
  for (int i = 0; i < kD; ++i) {
    for (int j = 0; j < kD; ++j) u(i, j) = l(kD - 1 - i, kD - 1 - j);
  }
  return u.adjoint();
}

double phase_fidelity(const CMatrix& rho, const CVector& psi, double a, double b) {
  CVector u(kD);
  for (int k = 0; k < kD; ++k) u(k) = std::polar(1.0, a * (k / 2) + b * (k % 2));
  const CVector v = u.conjugate().cwiseProduct(psi);
  return (v.adjoint() * rho * v)(0, 0).real();
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int k = 0; k < 60; ++k) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---- tomography -----------------------------------------------------------

std::vector<Projector> tomography_projectors(Side side) {
  using detection::basis_projector;
  using detection::custom_projector;
  const double r = 1.0 / std::sqrt(2.0);
  auto up = basis_projector(0, side);
  auto down = basis_projector(1, side);
  auto d = custom_projector({Complex(r), Complex(r)}, side);
  auto l = custom_projector({Complex(r), Complex(0.0, r)}, side);
  d.parameter = 2;
  l.parameter = 3;
  return {up, down, d, l};
}

std::vector<MeasurementSetting> tomography_settings() {
  std::vector<MeasurementSetting> out;
  for (const auto& s : tomography_projectors(Side::signal)) {
    for (const auto& i : tomography_projectors(Side::idler)) out.push_back({s, i});
  }
  return out;
}

CMatrix measurement_map(const std::vector<MeasurementSetting>& settings) {
  CMatrix m(static_cast<Eigen::Index>(settings.size()), kD * kD);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const CMatrix p = product_projector(settings[k]);
    for (int j = 0; j < kD; ++j) {
      for (int i = 0; i < kD; ++i) m(static_cast<Eigen::Index>(k), i + kD * j) = std::conj(p(i, j));
    }
  }
  return m;
}

int measurement_rank(const std::vector<MeasurementSetting>& settings) {
  Eigen::JacobiSVD<CMatrix> svd(measurement_map(settings));
  svd.setThreshold(1e-10);
  return static_cast<int>(svd.rank());
}

LinearEstimate linear_inversion(const std::vector<MeasurementSetting>& settings,
                                const std::vector<double>& counts) {
  check_counts(settings, counts);
  if (measurement_rank(settings) < kD * kD) {
    throw ConfigError("linear_inversion: measurement settings are not tomographically complete");
  }
  CVector n(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) n(static_cast<Eigen::Index>(k)) = counts[k];
  const CVector v = measurement_map(settings).jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(n);
  CMatrix rho = hermitize(Eigen::Map<const CMatrix>(v.data(), kD, kD));
  rho /= rho.trace().real();
  LinearEstimate out;
  out.rho = rho;
  out.min_eigenvalue = Eigen::SelfAdjointEigenSolver<CMatrix>(rho).eigenvalues().minCoeff();
  out.negative = out.min_eigenvalue < -1e-12;
  return out;
}

CMatrix t_from_params(const VectorXd& x) {
  if (x.size() != kParams) throw DimensionError("t_from_params: expected 16 parameters");
  CMatrix t = CMatrix::Zero(kD, kD);
  for (int i = 0; i < kD; ++i) t(i, i) = x(i);
  int k = kD;
  for (int i = 1; i < kD; ++i) {
    for (int j = 0; j < i; ++j) {
      t(i, j) = Complex(x(k), x(k + 1));
      k += 2;
    }
  }
  return t;
}

VectorXd params_from_t(const CMatrix& t) {
  VectorXd x(kParams);
  for (int i = 0; i < kD; ++i) x(i) = t(i, i).real();
  int k = kD;
  for (int i = 1; i < kD; ++i) {
    for (int j = 0; j < i; ++j) {
      x(k) = t(i, j).real();
      x(k + 1) = t(i, j).imag();
      k += 2;
    }
  }
  return x;
}

CMatrix rho_from_params(const VectorXd& x) {
  const CMatrix t = t_from_params(x);
  const CMatrix g = t.adjoint() * t;
  return g / g.trace().real();
}

std::vector<CMatrix> setting_projectors(const std::vector<MeasurementSetting>& settings) {
  std::vector<CMatrix> out;
  out.reserve(settings.size());
  for (const auto& s : settings) out.push_back(product_projector(s));
  return out;
}

double log_likelihood(const VectorXd& x, const std::vector<CMatrix>& projectors,
                      const std::vector<double>& counts) {
  const CMatrix t = t_from_params(x);
  const CMatrix g = t.adjoint() * t;
  double total_n = 0.0;
  double total_q = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    const double q = std::max((g * projectors[k]).trace().real(), 1e-300);
    acc += counts[k] * std::log(q);
    total_n += counts[k];
    total_q += q;
  }
  return (acc - total_n * std::log(total_q)) / total_n;
}

VectorXd log_likelihood_gradient(const VectorXd& x, const std::vector<CMatrix>& projectors,
                                 const std::vector<double>& counts) {
  const CMatrix t = t_from_params(x);
  const CMatrix g = t.adjoint() * t;
  std::vector<double> q(projectors.size());
  double total_n = 0.0;
  double total_q = 0.0;
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    q[k] = std::max((g * projectors[k]).trace().real(), 1e-300);
    total_n += counts[k];
    total_q += q[k];
  }
  CMatrix w = CMatrix::Zero(kD, kD);
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    w += (counts[k] / q[k] - total_n / total_q) * projectors[k];
  }
  // dL = 2 Re Tr(W T^dag dT); d/dRe T_ij = 2 Re (T W)_ij, d/dIm T_ij = 2 Im (T W)_ij
  const CMatrix tw = t * w / total_n;
  VectorXd grad(kParams);
  for (int i = 0; i < kD; ++i) grad(i) = 2.0 * tw(i, i).real();
  int k = kD;
  for (int i = 1; i < kD; ++i) {
    for (int j = 0; j < i; ++j) {
      grad(k) = 2.0 * tw(i, j).real();
      grad(k + 1) = 2.0 * tw(i, j).imag();
      k += 2;
    }
  }
  return grad;
}

TomographyResult mle_reconstruct(const std::vector<MeasurementSetting>& settings,
                                 const std::vector<double>& counts,
                                 const std::optional<CVector>& target, const MleOptions& options) {
  check_counts(settings, counts);
  const auto linear = linear_inversion(settings, counts);
  const auto projectors = setting_projectors(settings);

  VectorXd x = params_from_t(lower_factor(psd_clip(linear.rho, 1e-6)));
  x /= x.norm();
  double ll = log_likelihood(x, projectors, counts);
  VectorXd grad = log_likelihood_gradient(x, projectors, counts);
  double step = 1e-2;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    // Armijo backtracking along the gradient, trial step from Barzilai-Borwein.
    const double g2 = grad.squaredNorm();
    double t = step;
    VectorXd x_new;
    double ll_new = ll;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + t * grad;
      ll_new = log_likelihood(x_new, projectors, counts);
      if (ll_new >= ll + 1e-4 * t * g2) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      converged = std::sqrt(g2) < options.grad_tolerance;
      break;
    }
    // L is invariant under scaling of T; keep |x| = 1.
    x_new /= x_new.norm();
    const VectorXd grad_new = log_likelihood_gradient(x_new, projectors, counts);
    const VectorXd s = x_new - x;
    const VectorXd y = grad_new - grad;
    const double improvement = ll_new - ll;
    x = x_new;
    grad = grad_new;
    ll = ll_new;
    const double sy = s.dot(y);
    step = sy != 0.0 ? std::clamp(std::abs(s.squaredNorm() / sy), 1e-8, 1e4) : 1e-2;
    if (improvement < options.ll_tolerance && grad.norm() < options.grad_tolerance) {
      converged = true;
      ++it;
      break;
    }
  }

  TomographyResult out;
  out.rho = rho_from_params(x);
  out.purity = purity(out.rho);
  out.log_likelihood = ll;
  out.iterations = it;
  out.converged = converged;
  if (target) {
    out.fidelity = fidelity(out.rho, *target);
    out.fidelity_phase_opt = fidelity_phase_optimized(out.rho, *target);
  }
  return out;
}

std::vector<double> counts_of(const CoincidenceDataset& data) {
  std::vector<double> out;
  out.reserve(data.records.size());
  for (const auto& r : data.records) out.push_back(static_cast<double>(r.counts));
  return out;
}

BootstrapResult bootstrap(const std::vector<MeasurementSetting>& settings,
                          const std::vector<double>& counts, const CVector& target, int replicas,
                          std::uint64_t seed, const MleOptions& options) {
  if (replicas < 1) throw ConfigError("bootstrap: replicas must be >= 1");
  std::vector<double> fs;
  std::vector<double> ps;
  for (int r = 0; r < replicas; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), 0x62u};
    std::mt19937_64 rng(seq);
    std::vector<double> resampled(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      resampled[k] = counts[k] > 0.0
                         ? static_cast<double>(std::poisson_distribution<std::int64_t>(counts[k])(rng))
                         : 0.0;
    }
    const auto res = mle_reconstruct(settings, resampled, target, options);
    fs.push_back(res.fidelity);
    ps.push_back(res.purity);
  }
  BootstrapResult out;
  out.replicas = replicas;
  for (double f : fs) out.fidelity_mean += f / replicas;
  for (double p : ps) out.purity_mean += p / replicas;
  out.fidelity_std = sample_std(fs, out.fidelity_mean);
  out.purity_std = sample_std(ps, out.purity_mean);
  return out;
}

nlohmann::json matrix_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ii = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ii.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

nlohmann::json to_json(const TomographyResult& r) {
  return {{"rho", matrix_json(r.rho)},
          {"fidelity", r.fidelity},
          {"fidelity_phase_optimized", r.fidelity_phase_opt},
          {"purity", r.purity},
          {"log_likelihood_per_count", r.log_likelihood},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

std::string density_csv(const CMatrix& rho) {
  std::ostringstream out;
  out << "row,col,re,im\n";
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      out << i << ',' << j << ',' << io::fmt_double(rho(i, j).real()) << ','
          << io::fmt_double(rho(i, j).imag()) << '\n';
    }
  }
  return out.str();
}

// ---- metrics --------------------------------------------------------------

double fidelity(const CMatrix& rho, const CVector& target) {
  if (rho.rows() != target.size() || rho.cols() != target.size()) {
    throw DimensionError("fidelity: dimension mismatch");
  }
  return std::clamp((target.adjoint() * rho * target)(0, 0).real(), 0.0, 1.0);
}

double fidelity_phase_optimized(const CMatrix& rho, const CVector& target) {
  if (rho.rows() != kD || target.size() != kD) {
    throw DimensionError("fidelity_phase_optimized: two-qubit state required");
  }
  double best_a = 0.0;
  double best_b = 0.0;
  double best = -1.0;
  const int n = 48;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = 2 * pi * i / n;
      const double b = 2 * pi * j / n;
      const double f = phase_fidelity(rho, target, a, b);
      if (f > best) {
        best = f;
        best_a = a;
        best_b = b;
      }
    }
  }
  const double h = 2 * pi / n;
  for (int round = 0; round < 4; ++round) {
    best_a = golden_max([&](double a) { return phase_fidelity(rho, target, a, best_b); },
                        best_a - h, best_a + h);
    best_b = golden_max([&](double b) { return phase_fidelity(rho, target, best_a, b); },
                        best_b - h, best_b + h);
  }
  best = std::max(best, phase_fidelity(rho, target, best_a, best_b));
  return std::clamp(best, 0.0, 1.0);
}

double purity(const CMatrix& rho) { return (rho * rho).trace().real(); }

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("trace_distance: dimension mismatch");
  const VectorXd ev = Eigen::SelfAdjointEigenSolver<CMatrix>(hermitize(a - b)).eigenvalues();
  return 0.5 * ev.cwiseAbs().sum();
}

double concurrence(const CMatrix& rho) {
  if (rho.rows() != kD) throw DimensionError("concurrence: two-qubit state required");
  CMatrix yy = CMatrix::Zero(kD, kD);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const CMatrix tilde = yy * rho.conjugate() * yy;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(rho));
  const CMatrix sq = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal() *
                     es.eigenvectors().adjoint();
  VectorXd lam = Eigen::SelfAdjointEigenSolver<CMatrix>(hermitize(sq * tilde * sq)).eigenvalues();
  lam = lam.cwiseMax(0.0).cwiseSqrt();
  std::sort(lam.data(), lam.data() + lam.size(), std::greater<>());
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

// ---- CHSH -----------------------------------------------------------------

std::vector<MeasurementSetting> chsh_settings(const ChshAngles& angles) {
  using detection::slm_projector;
  std::vector<MeasurementSetting> out;
  for (auto [a, b] : {std::pair{angles.a, angles.b}, std::pair{angles.a, angles.b2},
                      std::pair{angles.a2, angles.b}, std::pair{angles.a2, angles.b2}}) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        out.push_back({slm_projector(a + x * pi / 2, Side::signal),
                       slm_projector(-b + y * pi / 2, Side::idler)});
      }
    }
  }
  return out;
}

double correlator(const CMatrix& rho, double a, double b) {
  using detection::slm_projector;
  double e = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double p = detection::coincidence_probability(
          rho, slm_projector(a + x * pi / 2, Side::signal), slm_projector(-b + y * pi / 2, Side::idler));
      e += (x == y ? 1.0 : -1.0) * p;
    }
  }
  return e;
}

namespace {

ChshResult combine(const std::array<double, 4>& e, const std::array<double, 4>& var,
                   const ChshAngles& angles) {
  ChshResult r;
  r.angles = angles;
  r.correlators = e;
  r.S = std::abs(e[0] - e[1] + e[2] + e[3]);
  r.sigma_S = std::sqrt(var[0] + var[1] + var[2] + var[3]);
  r.violation_sigmas = r.sigma_S > 0.0 ? (r.S - 2.0) / r.sigma_S : 0.0;
  return r;
}

}  // namespace

ChshResult chsh(const CMatrix& rho, const ChshAngles& angles) {
  const std::array<double, 4> e{correlator(rho, angles.a, angles.b),
                                correlator(rho, angles.a, angles.b2),
                                correlator(rho, angles.a2, angles.b),
                                correlator(rho, angles.a2, angles.b2)};
  return combine(e, {0.0, 0.0, 0.0, 0.0}, angles);
}

ChshResult chsh(const CoincidenceDataset& data, const ChshAngles& angles, bool exact) {
  if (data.records.size() != 16) {
    throw ConfigError("chsh: expected 16 outcome combinations, got " +
                      std::to_string(data.records.size()));
  }
  std::array<double, 4> e{};
  std::array<double, 4> var{};
  for (int pair = 0; pair < 4; ++pair) {
    double n[4];
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
      const auto& r = data.records[static_cast<std::size_t>(4 * pair + k)];
      n[k] = exact ? r.probability : static_cast<double>(r.counts);
      total += n[k];
    }
    if (!(total > 0.0)) throw ConfigError("chsh: setting pair with no coincidences");
    e[pair] = (n[0] + n[3] - n[1] - n[2]) / total;
    var[pair] = exact ? 0.0 : (1.0 - e[pair] * e[pair]) / total;
  }
  return combine(e, var, angles);
}

nlohmann::json to_json(const ChshResult& r) {
  return {{"S", r.S},
          {"sigma_S", r.sigma_S},
          {"violation_sigmas", r.violation_sigmas},
          {"angles", {{"a", r.angles.a}, {"a_prime", r.angles.a2}, {"b", r.angles.b}, {"b_prime", r.angles.b2}}},
          {"correlators", r.correlators}};
}

// ---- fringes --------------------------------------------------------------

VisibilityFit fit_visibility(const std::vector<double>& x, const std::vector<double>& y,
                             double period) {
  if (x.size() != y.size()) throw ConfigError("fit_visibility: x and y differ in length");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 6) throw ConfigError("fit_visibility: need at least 6 points");
  if (!(period > 0.0)) throw ConfigError("fit_visibility: period must be > 0");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi - *lo < period * (1.0 - 1.0 / static_cast<double>(n)) - 1e-9 * period) {
    throw ConfigError("fit_visibility: points do not span one period");
  }
  const double k = 2 * pi / period;
  Eigen::MatrixXd a(n, 3);
  VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(k * xi);
    a(i, 2) = std::sin(k * xi);
    b(i) = y[static_cast<std::size_t>(i)];
  }
  // Poisson weights from the fitted model, not the data: weighting by the
  // observed counts biases V upward at low counts.
  VectorXd w = VectorXd::Ones(n);
  Eigen::Matrix3d cov;
  Eigen::Vector3d c;
  for (int pass = 0; pass < 6; ++pass) {
    const Eigen::MatrixXd normal = a.transpose() * w.asDiagonal() * a;
    cov = normal.inverse();
    c = cov * (a.transpose() * w.asDiagonal() * b);
    const VectorXd model = a * c;
    for (Eigen::Index i = 0; i < n; ++i) w(i) = 1.0 / std::max(model(i), 1.0);
  }

  // Residual-scaled covariance when the model is not Poisson-limited.
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = b(i) - a.row(i).dot(c);
    chi2 += w(i) * r * r;
  }
  const double scale = std::max(1.0, chi2 / static_cast<double>(n - 3));
  const Eigen::Matrix3d cv = cov * scale;

  VisibilityFit f;
  f.offset = c(0);
  f.sigma_offset = std::sqrt(cv(0, 0));
  const double amp = std::hypot(c(1), c(2));
  if (!(c(0) > 0.0) || amp <= 1e-9 * std::abs(c(0))) {
    f.degenerate = true;
    f.visibility = 0.0;
    f.sigma_visibility = c(0) > 0.0 ? std::sqrt(cv(1, 1) + cv(2, 2)) / c(0) : 1.0;
    f.sigma_phase = pi;
    return f;
  }
  f.visibility = amp / c(0);
  f.phase = std::atan2(-c(2), c(1));
  const Eigen::Vector3d dv(-f.visibility / c(0), c(1) / (c(0) * amp), c(2) / (c(0) * amp));
  f.sigma_visibility = std::sqrt(dv.dot(cv * dv));
  const Eigen::Vector3d dp(0.0, c(2) / (amp * amp), -c(1) / (amp * amp));
  f.sigma_phase = std::sqrt(dp.dot(cv * dp));
  if (f.visibility > 1.0) {
    f.visibility = 1.0;
    f.clipped = true;
  }
  return f;
}

VisibilityFit fit_visibility(const CoincidenceDataset& data, double period) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : data.records) {
    x.push_back(r.idler_param);
    y.push_back(static_cast<double>(r.counts));
  }
  return fit_visibility(x, y, period);
}

nlohmann::json to_json(const VisibilityFit& f) {
  return {{"visibility", f.visibility},         {"sigma_visibility", f.sigma_visibility},
          {"phase", f.phase},                   {"sigma_phase", f.sigma_phase},
          {"offset", f.offset},                 {"sigma_offset", f.sigma_offset},
          {"degenerate", f.degenerate},         {"clipped", f.clipped}};
}

LocalBoundVerdict local_bound_check(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw ConfigError("local_bound_check: visibility out of [0,1]");
  }
  const double bound = 1.0 / std::sqrt(2.0);
  return {visibility > bound, visibility - bound};
}

}  // namespace qet::analysis
