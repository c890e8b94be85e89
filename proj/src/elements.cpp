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

#include "qetsim/elements.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseCore>

#include "qetsim/error.hpp"

namespace qet {

namespace {

using Index = Eigen::Index;

Index idx(const BasisSpec& basis, const ModeLabel& label) {
  return static_cast<Index>(basis.index(label));
}

/// Builds U column by column from a per-mode image: image(label) returns
/// (target label, coefficient) pairs.
template <typename Image>
CMatrix matrix_from_image(const BasisSpec& basis, Image image) {
  const auto d = static_cast<Index>(basis.dim());
  CMatrix u = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    const ModeLabel in = basis.label(static_cast<std::size_t>(k));
    for (const auto& [out, c] : image(in)) u(idx(basis, out), k) += c;
  }
  return u;
}

using Sparse = Eigen::SparseMatrix<Complex>;

Sparse sparse(const CMatrix& m) { return m.sparseView(Complex(1.0), 1e-300); }

int wrap(int value, int lo, int n) { return ((value - lo) % n + n) % n + lo; }

}  // namespace

ElementOp::ElementOp(std::string name, BasisSpec basis, CMatrix matrix, double throughput,
                     std::vector<bool> guard, Subsystem subsystem)
    : name_(std::move(name)), basis_(basis), matrix_(std::move(matrix)),
      throughput_(throughput), guard_(std::move(guard)), subsystem_(subsystem) {
  const auto d = static_cast<Index>(basis_.dim());
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw DimensionError("ElementOp " + name_ + ": matrix does not match basis");
  }
  if (!(throughput_ > 0.0 && throughput_ <= 1.0)) {
    throw ConfigError("ElementOp " + name_ + ": throughput must lie in (0, 1]");
  }
  if (guard_.empty()) guard_.assign(basis_.dim(), false);
  if (guard_.size() != basis_.dim()) {
    throw DimensionError("ElementOp " + name_ + ": guard mask size mismatch");
  }
  if (unitarity_error() > 1e-9) {
    throw Error("ElementOp " + name_ + ": matrix is not unitary");
  }
}

ElementOp ElementOp::on(Subsystem subsystem) const {
  ElementOp out = *this;
  out.subsystem_ = subsystem;
  return out;
}

void ElementOp::check_guard(const CVector& amps, double cutoff) const {
  for (Index k = 0; k < amps.size(); ++k) {
    if (guard_[static_cast<std::size_t>(k)] && std::abs(amps(k)) > cutoff) {
      throw TruncationError(name_ + ": populated mode " +
                            to_string(basis_.label(static_cast<std::size_t>(k))) +
                            " would leave the truncated space");
    }
  }
}

double ElementOp::unitarity_error() const {
  // Optical elements are sparse (a few entries per column); a dense
  // product would dominate the cost of building an interferometer.
  const Sparse s = sparse(matrix_);
  Sparse gram = s.adjoint() * s;
  const auto d = matrix_.rows();
  Sparse eye(d, d);
  eye.setIdentity();
  gram -= eye;
  double worst = 0.0;
  for (Index k = 0; k < gram.outerSize(); ++k) {
    for (Sparse::InnerIterator it(gram, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

ElementOp identity(const BasisSpec& basis) {
  const auto d = static_cast<Index>(basis.dim());
  return ElementOp("identity", basis, CMatrix::Identity(d, d));
}

ElementOp beam_splitter(const BasisSpec& basis, int path_a, int path_b) {
  if (path_a == path_b || path_a < 0 || path_b < 0 || path_a >= basis.n_paths() ||
      path_b >= basis.n_paths()) {
    throw ConfigError("beam_splitter: need two distinct valid path ids");
  }
  const double r = 1.0 / std::numbers::sqrt2;
  const Complex i1(0.0, 1.0);
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    std::vector<std::pair<ModeLabel, Complex>> out;
    if (in.path != path_a && in.path != path_b) {
      out.emplace_back(in, 1.0);
      return out;
    }
    ModeLabel a = in;
    a.path = path_a;
    ModeLabel b = in;
    b.path = path_b;
    if (in.path == path_a) {
      out.emplace_back(a, r);
      out.emplace_back(b, i1 * r);
    } else {
      out.emplace_back(a, i1 * r);
      out.emplace_back(b, r);
    }
    return out;
  });
  return ElementOp("beam_splitter", basis, std::move(u));
}

ElementOp pbs(const BasisSpec& basis, int path_a, int path_b) {
  if (path_a == path_b || path_a < 0 || path_b < 0 || path_a >= basis.n_paths() ||
      path_b >= basis.n_paths()) {
    throw ConfigError("pbs: need two distinct valid path ids");
  }
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    ModeLabel out = in;
    if (in.pol == Polarization::V) {
      if (in.path == path_a) out.path = path_b;
      else if (in.path == path_b) out.path = path_a;
    }
    return std::vector<std::pair<ModeLabel, Complex>>{{out, 1.0}};
  });
  return ElementOp("pbs", basis, std::move(u));
}

ElementOp half_wave_plate(const BasisSpec& basis, double angle) {
  const double c = std::cos(2.0 * angle);
  const double s = std::sin(2.0 * angle);
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    ModeLabel h = in;
    h.pol = Polarization::H;
    ModeLabel v = in;
    v.pol = Polarization::V;
    if (in.pol == Polarization::H) {
      return std::vector<std::pair<ModeLabel, Complex>>{{h, c}, {v, s}};
    }
    return std::vector<std::pair<ModeLabel, Complex>>{{h, s}, {v, -c}};
  });
  return ElementOp("half_wave_plate", basis, std::move(u));
}

ElementOp spiral_phase_plate(const BasisSpec& basis, int charge, double efficiency) {
  std::vector<bool> guard(basis.dim(), false);
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    ModeLabel out = in;
    const int shifted = in.oam + charge;
    if (shifted < -basis.l_max() || shifted > basis.l_max()) {
      guard[basis.index(in)] = true;
    }
    out.oam = wrap(shifted, -basis.l_max(), basis.n_oam());
    return std::vector<std::pair<ModeLabel, Complex>>{{out, 1.0}};
  });
  return ElementOp("spiral_phase_plate(" + std::to_string(charge) + ")", basis, std::move(u),
                   efficiency, std::move(guard));
}

ElementOp dove_prism(const BasisSpec& basis, double alpha) {
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    ModeLabel out = in;
    out.oam = -in.oam;
    const Complex phase = std::polar(1.0, 2.0 * in.oam * alpha);
    return std::vector<std::pair<ModeLabel, Complex>>{{out, phase}};
  });
  return ElementOp("dove_prism", basis, std::move(u));
}

ElementOp delay_line(const BasisSpec& basis, int bins, double phase) {
  if (bins < 0) throw ConfigError("delay_line: bins must be non-negative");
  std::vector<bool> guard(basis.dim(), false);
  const Complex c = std::polar(1.0, phase);
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    ModeLabel out = in;
    if (in.time_bin + bins >= basis.t_max()) guard[basis.index(in)] = true;
    out.time_bin = (in.time_bin + bins) % basis.t_max();
    return std::vector<std::pair<ModeLabel, Complex>>{{out, c}};
  });
  return ElementOp("delay_line(" + std::to_string(bins) + ")", basis, std::move(u), 1.0,
                   std::move(guard));
}

ElementOp polarization_phase(const BasisSpec& basis, double phase) {
  const Complex c = std::polar(1.0, phase);
  CMatrix u = matrix_from_image(basis, [&](const ModeLabel& in) {
    return std::vector<std::pair<ModeLabel, Complex>>{
        {in, in.pol == Polarization::V ? c : Complex(1.0)}};
  });
  return ElementOp("polarization_phase", basis, std::move(u));
}

ElementOp restrict_to(const ElementOp& op, const std::function<bool(const ModeLabel&)>& keep,
                      const std::string& tag) {
  const BasisSpec& basis = op.basis();
  const auto d = static_cast<Index>(basis.dim());
  std::vector<bool> inside(basis.dim());
  for (Index k = 0; k < d; ++k) {
    inside[static_cast<std::size_t>(k)] = keep(basis.label(static_cast<std::size_t>(k)));
  }
  CMatrix u = CMatrix::Identity(d, d);
  std::vector<bool> guard(basis.dim(), false);
  for (Index col = 0; col < d; ++col) {
    if (!inside[static_cast<std::size_t>(col)]) continue;
    for (Index row = 0; row < d; ++row) {
      const Complex c = op.matrix()(row, col);
      if (!inside[static_cast<std::size_t>(row)] && std::abs(c) > 1e-12) {
        throw ConfigError("restrict_to: " + op.name() + " does not preserve the subspace " + tag);
      }
      u(row, col) = inside[static_cast<std::size_t>(row)] ? c : Complex(0.0);
    }
    guard[static_cast<std::size_t>(col)] = op.guard()[static_cast<std::size_t>(col)];
  }
  return ElementOp(op.name() + "@" + tag, basis, std::move(u), op.throughput(),
                   std::move(guard), op.subsystem());
}

ElementOp on_path(const ElementOp& op, int path) {
  return restrict_to(op, [path](const ModeLabel& l) { return l.path == path; },
                     "path" + std::to_string(path));
}

ElementOp on_polarization(const ElementOp& op, Polarization pol) {
  return restrict_to(op, [pol](const ModeLabel& l) { return l.pol == pol; },
                     pol == Polarization::H ? "H" : "V");
}

ElementOp compose(const ElementOp& outer, const ElementOp& inner) {
  if (!(outer.basis() == inner.basis())) throw DimensionError("compose: basis mismatch");
  const auto d = static_cast<Index>(inner.basis().dim());
  std::vector<bool> guard = inner.guard();
  for (Index col = 0; col < d; ++col) {
    for (Index row = 0; row < d; ++row) {
      if (outer.guard()[static_cast<std::size_t>(row)] &&
          std::abs(inner.matrix()(row, col)) > 1e-12) {
        guard[static_cast<std::size_t>(col)] = true;
      }
    }
  }
  return ElementOp(outer.name() + "*" + inner.name(), inner.basis(),
                   CMatrix(sparse(outer.matrix()) * sparse(inner.matrix())), outer.throughput() * inner.throughput(),
                   std::move(guard), inner.subsystem());
}

ElementOp compose(const std::vector<ElementOp>& in_order) {
  if (in_order.empty()) throw ConfigError("compose: empty element list");
  ElementOp acc = in_order.front();
  for (std::size_t k = 1; k < in_order.size(); ++k) acc = compose(in_order[k], acc);
  return acc;
}

PureState apply(const ElementOp& op, const PureState& state) {
  if (state.photons() != 1) throw Error("apply: single-photon state required");
  if (!(state.basis() == op.basis())) throw DimensionError("apply: basis mismatch");
  op.check_guard(state.amplitudes());
  return PureState(state.basis(), 1, op.matrix() * state.amplitudes(), state.norm_tolerance());
}

PureState apply(const ElementOp& op, const PureState& pair, Side side) {
  if (pair.photons() != 2) throw Error("apply: two-photon state required");
  if (!(pair.basis() == op.basis())) throw DimensionError("apply: basis mismatch");
  const CMatrix m = pair.as_matrix();
  // Guard check on the reduced support of the acted-on photon.
  const CVector support = side == Side::signal ? CVector(m.rowwise().norm().cast<Complex>())
                                               : CVector(m.colwise().norm().transpose().cast<Complex>());
  op.check_guard(support);
  const Sparse u = sparse(op.matrix());
  const CMatrix out = side == Side::signal ? CMatrix(u * m) : CMatrix(m * Sparse(u.transpose()));
  return PureState::from_matrix(pair.basis(), out, pair.norm_tolerance());
}

// ---------------------------------------------------------------------------

TwoPhotonOp::TwoPhotonOp(std::optional<ElementOp> signal, std::optional<ElementOp> idler)
    : signal_(std::move(signal)), idler_(std::move(idler)) {
  if (!signal_ && !idler_) throw ConfigError("TwoPhotonOp: needs at least one side");
  if (signal_ && idler_ && !(signal_->basis() == idler_->basis())) {
    throw DimensionError("TwoPhotonOp: basis mismatch");
  }
}

TwoPhotonOp TwoPhotonOp::after(const TwoPhotonOp& inner) const {
  auto merge = [](const std::optional<ElementOp>& a, const std::optional<ElementOp>& b) {
    if (a && b) return std::optional<ElementOp>(compose(*a, *b));
    return a ? a : b;
  };
  return TwoPhotonOp(merge(signal_, inner.signal_), merge(idler_, inner.idler_));
}

double TwoPhotonOp::throughput() const {
  return (signal_ ? signal_->throughput() : 1.0) * (idler_ ? idler_->throughput() : 1.0);
}

PureState TwoPhotonOp::operator()(const PureState& pair) const {
  PureState out = pair;
  if (signal_) out = apply(*signal_, out, Side::signal);
  if (idler_) out = apply(*idler_, out, Side::idler);
  return out;
}

CMatrix TwoPhotonOp::dense() const {
  const BasisSpec basis = signal_ ? signal_->basis() : idler_->basis();
  const auto d = static_cast<Index>(basis.dim());
  const CMatrix a = signal_ ? signal_->matrix() : CMatrix(CMatrix::Identity(d, d));
  const CMatrix b = idler_ ? idler_->matrix() : CMatrix(CMatrix::Identity(d, d));
  CMatrix out(d * d, d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = a(i, j) * b;
  }
  return out;
}

TwoPhotonOp lift(const ElementOp& op, Side side) {
  if (side == Side::signal) return TwoPhotonOp(op.on(Subsystem::signal), std::nullopt);
  return TwoPhotonOp(std::nullopt, op.on(Subsystem::idler));
}

}  // namespace qet
