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

#include "qetsim/hilbert.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qetsim/error.hpp"

namespace qet {

std::string to_string(const ModeLabel& label) {
  std::ostringstream os;
  os << "(t=" << label.time_bin << ", l=" << label.oam
     << ", pol=" << (label.pol == Polarization::H ? "H" : "V") << ", path=" << label.path;
  if (label.channel) os << ", ch=" << *label.channel;
  os << ")";
  return os.str();
}

BasisSpec::BasisSpec(int l_max, int t_max, int n_paths)
    : l_max_(l_max), t_max_(t_max), n_paths_(n_paths) {
  if (l_max < 0 || t_max < 1 || n_paths < 1) {
    throw ConfigError("BasisSpec: need l_max >= 0, t_max >= 1, n_paths >= 1");
  }
}

std::size_t BasisSpec::dim() const {
  return static_cast<std::size_t>(t_max_) * static_cast<std::size_t>(n_oam()) * 2u *
         static_cast<std::size_t>(n_paths_);
}

bool BasisSpec::contains(const ModeLabel& label) const {
  return label.time_bin >= 0 && label.time_bin < t_max_ && label.oam >= -l_max_ &&
         label.oam <= l_max_ && label.path >= 0 && label.path < n_paths_;
}

std::size_t BasisSpec::index(const ModeLabel& label) const {
  if (!contains(label)) {
    throw TruncationError("label outside basis: " + to_string(label));
  }
  const auto t = static_cast<std::size_t>(label.time_bin);
  const auto l = static_cast<std::size_t>(label.oam + l_max_);
  const auto p = static_cast<std::size_t>(label.pol);
  const auto path = static_cast<std::size_t>(label.path);
  return ((t * static_cast<std::size_t>(n_oam()) + l) * 2u + p) *
             static_cast<std::size_t>(n_paths_) +
         path;
}

ModeLabel BasisSpec::label(std::size_t index) const {
  if (index >= dim()) throw DimensionError("basis index out of range");
  ModeLabel out;
  const auto n_paths = static_cast<std::size_t>(n_paths_);
  out.path = static_cast<int>(index % n_paths);
  index /= n_paths;
  out.pol = static_cast<Polarization>(index % 2u);
  index /= 2u;
  const auto n_oam_sz = static_cast<std::size_t>(n_oam());
  out.oam = static_cast<int>(index % n_oam_sz) - l_max_;
  out.time_bin = static_cast<int>(index / n_oam_sz);
  return out;
}

// ---------------------------------------------------------------------------

PureState::PureState(BasisSpec basis, int photons, CVector amplitudes, double norm_tolerance)
    : basis_(basis), photons_(photons), amps_(std::move(amplitudes)),
      norm_tolerance_(norm_tolerance) {
  if (photons_ != 1 && photons_ != 2) throw ConfigError("PureState: photons must be 1 or 2");
  const std::size_t d = basis_.dim();
  const std::size_t expect = photons_ == 1 ? d : d * d;
  if (static_cast<std::size_t>(amps_.size()) != expect) {
    throw DimensionError("PureState: amplitude vector has wrong dimension");
  }
  const double n = amps_.norm();
  if (std::abs(n - 1.0) > norm_tolerance_) {
    std::ostringstream os;
    os << "PureState: norm " << n << " deviates from 1 beyond tolerance";
    throw Error(os.str());
  }
}

PureState PureState::basis_state(const BasisSpec& basis, const ModeLabel& label) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(basis.dim()));
  v(static_cast<Eigen::Index>(basis.index(label))) = 1.0;
  return PureState(basis, 1, std::move(v));
}

PureState PureState::basis_state(const BasisSpec& basis, const ModeLabel& signal,
                                 const ModeLabel& idler) {
  const std::size_t d = basis.dim();
  CVector v = CVector::Zero(static_cast<Eigen::Index>(d * d));
  v(static_cast<Eigen::Index>(basis.index(signal) * d + basis.index(idler))) = 1.0;
  return PureState(basis, 2, std::move(v));
}

PureState PureState::normalized(const BasisSpec& basis, int photons, CVector amplitudes) {
  const double n = amplitudes.norm();
  if (n < 1e-300) throw Error("PureState: cannot normalize zero vector");
  amplitudes /= n;
  return PureState(basis, photons, std::move(amplitudes));
}

PureState PureState::superposition(const BasisSpec& basis,
                                   const std::vector<std::pair<ModeLabel, Complex>>& terms) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (const auto& [label, c] : terms) v(static_cast<Eigen::Index>(basis.index(label))) += c;
  return normalized(basis, 1, std::move(v));
}

PureState PureState::superposition(
    const BasisSpec& basis, const std::vector<std::tuple<ModeLabel, ModeLabel, Complex>>& terms) {
  const std::size_t d = basis.dim();
  CVector v = CVector::Zero(static_cast<Eigen::Index>(d * d));
  for (const auto& [s, i, c] : terms) {
    v(static_cast<Eigen::Index>(basis.index(s) * d + basis.index(i))) += c;
  }
  return normalized(basis, 2, std::move(v));
}

Complex PureState::amplitude(const ModeLabel& label) const {
  if (photons_ != 1) throw Error("amplitude(label): single-photon state required");
  return amps_(static_cast<Eigen::Index>(basis_.index(label)));
}

Complex PureState::amplitude(const ModeLabel& signal, const ModeLabel& idler) const {
  if (photons_ != 2) throw Error("amplitude(s, i): two-photon state required");
  const std::size_t d = basis_.dim();
  return amps_(static_cast<Eigen::Index>(basis_.index(signal) * d + basis_.index(idler)));
}

CMatrix PureState::as_matrix() const {
  if (photons_ != 2) throw Error("as_matrix: two-photon state required");
  const auto d = static_cast<Eigen::Index>(basis_.dim());
  // Row-major reshape: row = signal index, column = idler index.
  CMatrix m(d, d);
  for (Eigen::Index s = 0; s < d; ++s) m.row(s) = amps_.segment(s * d, d).transpose();
  return m;
}

PureState PureState::from_matrix(const BasisSpec& basis, const CMatrix& m, double norm_tolerance) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  if (m.rows() != d || m.cols() != d) throw DimensionError("from_matrix: shape mismatch");
  CVector v(d * d);
  for (Eigen::Index s = 0; s < d; ++s) v.segment(s * d, d) = m.row(s).transpose();
  return PureState(basis, 2, std::move(v), norm_tolerance);
}

PureState PureState::canonical_phase() const {
  for (Eigen::Index k = 0; k < amps_.size(); ++k) {
    if (std::abs(amps_(k)) > 1e-12) {
      const Complex phase = std::conj(amps_(k)) / std::abs(amps_(k));
      return PureState(basis_, photons_, amps_ * phase, norm_tolerance_);
    }
  }
  return *this;
}

Complex PureState::inner(const PureState& other) const {
  if (!(basis_ == other.basis_) || photons_ != other.photons_) {
    throw DimensionError("inner: incompatible states");
  }
  return amps_.dot(other.amps_);
}

void PureState::for_each_two_photon(
    const std::function<void(const ModeLabel&, const ModeLabel&, Complex)>& f,
    double cutoff) const {
  if (photons_ != 2) throw Error("for_each_two_photon: two-photon state required");
  const std::size_t d = basis_.dim();
  for (Eigen::Index k = 0; k < amps_.size(); ++k) {
    if (std::abs(amps_(k)) <= cutoff) continue;
    const auto uk = static_cast<std::size_t>(k);
    f(basis_.label(uk / d), basis_.label(uk % d), amps_(k));
  }
}

void PureState::for_each_single(const std::function<void(const ModeLabel&, Complex)>& f,
                                double cutoff) const {
  if (photons_ != 1) throw Error("for_each_single: single-photon state required");
  for (Eigen::Index k = 0; k < amps_.size(); ++k) {
    if (std::abs(amps_(k)) > cutoff) f(basis_.label(static_cast<std::size_t>(k)), amps_(k));
  }
}

// ---------------------------------------------------------------------------

std::string density_violation(const CMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return "matrix not square";
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) return "matrix not Hermitian";
  if (std::abs(m.trace() - Complex(1.0)) > tol) return "trace differs from 1";
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) return "negative eigenvalue";
  return {};
}

namespace {

int product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

}  // namespace

DensityMatrix::DensityMatrix(std::vector<int> dims, CMatrix matrix)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
  if (dims_.empty() || product(dims_) != matrix_.rows()) {
    throw DimensionError("DensityMatrix: factor dims do not match matrix size");
  }
  if (auto why = density_violation(matrix_); !why.empty()) {
    throw Error("DensityMatrix: " + why);
  }
}

DensityMatrix DensityMatrix::from_pure(const CVector& psi, std::vector<int> dims) {
  return DensityMatrix(std::move(dims), psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(std::vector<int> dims) {
  const int d = product(dims);
  return DensityMatrix(std::move(dims), CMatrix::Identity(d, d) / static_cast<double>(d));
}

PureState tensor(const PureState& a, const PureState& b, std::size_t dim_cap) {
  if (a.photons() != 1 || b.photons() != 1) {
    throw DimensionError("tensor: both factors must be single-photon states");
  }
  if (!(a.basis() == b.basis())) throw DimensionError("tensor: basis specs differ");
  const std::size_t d = a.dim() * b.dim();
  if (d > dim_cap) throw DimensionError("tensor: product dimension exceeds cap");
  CVector v(static_cast<Eigen::Index>(d));
  const auto db = static_cast<Eigen::Index>(b.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    v.segment(i * db, db) = a.amplitudes()(i) * b.amplitudes();
  }
  return PureState(a.basis(), 2, std::move(v));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  const CMatrix& ma = a.matrix();
  const CMatrix& mb = b.matrix();
  CMatrix out(ma.rows() * mb.rows(), ma.cols() * mb.cols());
  for (Eigen::Index i = 0; i < ma.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma.cols(); ++j) {
      out.block(i * mb.rows(), j * mb.cols(), mb.rows(), mb.cols()) = ma(i, j) * mb;
    }
  }
  std::vector<int> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return DensityMatrix(std::move(dims), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
  const auto& dims = rho.dims();
  if (keep < 0 || keep >= static_cast<int>(dims.size())) {
    throw DimensionError("partial_trace: invalid subsystem id");
  }
  // Collapse into (before, kept, after) and sum over before/after.
  int before = 1;
  for (int k = 0; k < keep; ++k) before *= dims[static_cast<std::size_t>(k)];
  const int kept = dims[static_cast<std::size_t>(keep)];
  const int after = rho.dim() / (before * kept);
  const CMatrix& m = rho.matrix();
  CMatrix out = CMatrix::Zero(kept, kept);
  for (int b = 0; b < before; ++b) {
    for (int a = 0; a < after; ++a) {
      for (int i = 0; i < kept; ++i) {
        for (int j = 0; j < kept; ++j) {
          out(i, j) += m((b * kept + i) * after + a, (b * kept + j) * after + a);
        }
      }
    }
  }
  return DensityMatrix({kept}, std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kNullPostselection = 1e-12;

Projection finish_projection(const PureState& state, CVector projected) {
  const double p = projected.squaredNorm();
  if (p < kNullPostselection) {
    throw NullPostselection("null postselection: success probability below 1e-12");
  }
  projected /= std::sqrt(p);
  return {PureState(state.basis(), state.photons(), std::move(projected)), std::min(p, 1.0)};
}

}  // namespace

Projection project(const PureState& state, const PureState& onto) {
  const Complex overlap = onto.inner(state);
  const double p = std::norm(overlap);
  if (p < kNullPostselection) {
    throw NullPostselection("null postselection: state orthogonal to projector");
  }
  return {onto, std::min(p, 1.0)};
}

Projection project(const PureState& state, const std::function<bool(std::size_t)>& keep) {
  CVector v = state.amplitudes();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!keep(static_cast<std::size_t>(k))) v(k) = 0.0;
  }
  return finish_projection(state, std::move(v));
}

Projection project_pairs(const PureState& state,
                         const std::function<bool(const ModeLabel&, const ModeLabel&)>& keep) {
  if (state.photons() != 2) throw Error("project_pairs: two-photon state required");
  const std::size_t d = state.basis().dim();
  const BasisSpec& basis = state.basis();
  return project(state, [&](std::size_t k) {
    return keep(basis.label(k / d), basis.label(k % d));
  });
}

Projection project(const PureState& state, const CMatrix& projector) {
  if (projector.rows() != static_cast<Eigen::Index>(state.dim()) ||
      projector.cols() != projector.rows()) {
    throw DimensionError("project: projector shape mismatch");
  }
  if ((projector * projector - projector).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error("project: matrix is not idempotent");
  }
  return finish_projection(state, projector * state.amplitudes());
}

CVector to_two_qubit(const PureState& state, const QubitEncoding& signal,
                     const QubitEncoding& idler, double leak_tol) {
  const std::array<ModeLabel, 2> s{signal.upper, signal.lower};
  const std::array<ModeLabel, 2> i{idler.upper, idler.lower};
  CVector out(4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out(2 * a + b) = state.amplitude(s[a], i[b]);
  }
  const double leak = 1.0 - out.squaredNorm();
  if (leak > leak_tol) {
    std::ostringstream os;
    os << "to_two_qubit: population " << leak << " outside the logical subspace";
    throw Error(os.str());
  }
  return out / out.norm();
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const BasisSpec& basis) {
  return {{"l_max", basis.l_max()}, {"t_max", basis.t_max()}, {"n_paths", basis.n_paths()}};
}

BasisSpec basis_from_json(const nlohmann::json& j) {
  return BasisSpec(j.at("l_max").get<int>(), j.at("t_max").get<int>(),
                   j.at("n_paths").get<int>());
}

nlohmann::json to_json(const ModeLabel& label) {
  nlohmann::json j{{"time_bin", label.time_bin},
                   {"oam", label.oam},
                   {"pol", label.pol == Polarization::H ? "H" : "V"},
                   {"path", label.path}};
  if (label.channel) j["channel"] = *label.channel;
  return j;
}

ModeLabel label_from_json(const nlohmann::json& j) {
  ModeLabel out;
  out.time_bin = j.at("time_bin").get<int>();
  out.oam = j.at("oam").get<int>();
  const auto pol = j.at("pol").get<std::string>();
  if (pol != "H" && pol != "V") throw ConfigError("label pol must be \"H\" or \"V\"");
  out.pol = pol == "H" ? Polarization::H : Polarization::V;
  out.path = j.at("path").get<int>();
  if (j.contains("channel")) out.channel = j.at("channel").get<int>();
  return out;
}

nlohmann::json to_json(const PureState& state) {
  nlohmann::json terms = nlohmann::json::array();
  if (state.photons() == 1) {
    state.for_each_single([&](const ModeLabel& l, Complex c) {
      terms.push_back({{"label", to_json(l)}, {"re", c.real()}, {"im", c.imag()}});
    });
  } else {
    state.for_each_two_photon([&](const ModeLabel& s, const ModeLabel& i, Complex c) {
      terms.push_back({{"signal", to_json(s)}, {"idler", to_json(i)}, {"re", c.real()},
                       {"im", c.imag()}});
    });
  }
  return {{"basis", to_json(state.basis())}, {"photons", state.photons()}, {"terms", terms}};
}

PureState state_from_json(const nlohmann::json& j) {
  const BasisSpec basis = basis_from_json(j.at("basis"));
  const int photons = j.at("photons").get<int>();
  const std::size_t d = basis.dim();
  CVector v = CVector::Zero(static_cast<Eigen::Index>(photons == 1 ? d : d * d));
  for (const auto& t : j.at("terms")) {
    const Complex c(t.at("re").get<double>(), t.at("im").get<double>());
    std::size_t k = 0;
    if (photons == 1) {
      k = basis.index(label_from_json(t.at("label")));
    } else {
      k = basis.index(label_from_json(t.at("signal"))) * d +
          basis.index(label_from_json(t.at("idler")));
    }
    v(static_cast<Eigen::Index>(k)) += c;
  }
  // Omitted sub-1e-12 amplitudes leave the norm short by far less than 1e-9.
  return PureState(basis, photons, std::move(v));
}

}  // namespace qet
