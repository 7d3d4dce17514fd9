// Copyright 2026 The fisher-shadow Authors
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

#include "fshadow/operators.hpp"

#include <cmath>

#include "fshadow/error.hpp"

namespace fshadow {

HermitianOp::HermitianOp(CMat entries) : m_(std::move(entries)) {
  require(m_.rows() == m_.cols() && m_.rows() > 0, ErrorCode::kDimensionMismatch,
          "operator must be square and non-empty");
  double dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  require(dev <= 1e-12, ErrorCode::kInvalidArgument,
          "operator is not Hermitian (deviation " + std::to_string(dev) + ")");
}

DensityMatrix::DensityMatrix(CMat entries) : op_(std::move(entries)) {
  require(std::abs(op_.trace() - 1.0) <= 1e-10, ErrorCode::kInvalidArgument,
          "density matrix trace differs from 1");
  require(min_eigenvalue(op_.mat()) >= -1e-10, ErrorCode::kInvalidArgument,
          "density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  return DensityMatrix(CMat(CMat::Identity(d, d) / static_cast<double>(d)));
}

DensityMatrix DensityMatrix::pure(const CVec& psi) {
  CVec v = psi / psi.norm();
  CMat r = v * v.adjoint();
  // Exact hermiticity; the outer product can differ from its adjoint by one ulp.
  return DensityMatrix(CMat(0.5 * (r + r.adjoint())));
}

ObservableSet::ObservableSet(int dim, std::vector<HermitianOp> obs) : dim_(dim), obs_(std::move(obs)) {
  require(dim >= 1, ErrorCode::kInvalidArgument, "dimension must be positive");
  require(static_cast<int>(obs_.size()) <= dim * dim - 1, ErrorCode::kGramSingular,
          "more than d^2 - 1 observables cannot be independent");
  for (const auto& o : obs_) {
    require(o.dim() == dim, ErrorCode::kDimensionMismatch, "observable dimension differs from set");
    require(std::abs(o.mat().trace()) <= 1e-10, ErrorCode::kInvalidArgument, "observable is not traceless");
  }
  if (!obs_.empty()) {
    RVec ev = Eigen::SelfAdjointEigenSolver<RMat>(gram(), Eigen::EigenvaluesOnly).eigenvalues();
    require(ev.minCoeff() > 1e-10 * ev.maxCoeff(), ErrorCode::kGramSingular,
            "observables are linearly dependent");
  }
}

RMat ObservableSet::gram() const {
  int m = size();
  RMat g(m, m);
  for (int i = 0; i < m; i++) {
    for (int j = i; j < m; j++) g(i, j) = g(j, i) = trace_real(obs_[i].mat(), obs_[j].mat());
  }
  return g;
}

std::vector<CMat> DualBasis::all() const {
  std::vector<CMat> out = q;
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

DualResidual dual_basis_residual(const ObservableSet& obs, const DualBasis& basis) {
  DualResidual r;
  double d = obs.dim();
  for (int i = 0; i < obs.size(); i++) {
    for (int a = 0; a < basis.num_a(); a++) {
      r.q = std::max(r.q, std::abs(trace_real(obs[i], basis.q[a]) - (i == a ? d : 0.0)));
    }
    for (const auto& t : basis.t) r.t = std::max(r.t, std::abs(trace_real(obs[i], t)));
  }
  return r;
}

std::vector<CMat> gell_mann_basis(int d) {
  std::vector<CMat> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; j++) {
    for (int k = j + 1; k < d; k++) {
      CMat e = CMat::Zero(d, d);
      e(j, k) = e(k, j) = s;
      out.push_back(e);
      CMat f = CMat::Zero(d, d);
      f(j, k) = cplx(0, -s);
      f(k, j) = cplx(0, s);
      out.push_back(f);
    }
  }
  for (int l = 1; l < d; l++) {
    CMat e = CMat::Zero(d, d);
    double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int j = 0; j < l; j++) e(j, j) = norm;
    e(l, l) = -l * norm;
    out.push_back(e);
  }
  return out;
}

DualBasis build_dual_basis(const ObservableSet& obs) {
  const int d = obs.dim();
  const int m = obs.size();
  const int n = d * d - 1;
  RMat g = obs.gram();
  DualBasis basis;
  basis.canonical = true;
  if (m > 0) {
    RVec ev = Eigen::SelfAdjointEigenSolver<RMat>(g, Eigen::EigenvaluesOnly).eigenvalues();
    require(ev.minCoeff() > 1e-10 * ev.maxCoeff(), ErrorCode::kGramSingular,
            "observables are linearly dependent");
  }
  RMat ginv = m > 0 ? RMat(g.inverse()) : RMat();
  for (int a = 0; a < m; a++) {
    CMat q = CMat::Zero(d, d);
    for (int j = 0; j < m; j++) q += (d * ginv(j, a)) * obs[j];
    basis.q.push_back(0.5 * (q + q.adjoint()));
  }

  // T: Gram-Schmidt over the Gell-Mann coordinates, after projecting out span(O).
  std::vector<CMat> e = gell_mann_basis(d);
  RMat c(n, m);
  for (int k = 0; k < n; k++) {
    for (int j = 0; j < m; j++) c(k, j) = trace_real(e[k], obs[j]);
  }
  RMat proj = RMat::Identity(n, n);
  if (m > 0) proj -= c * ginv * c.transpose();
  std::vector<RVec> kept;
  for (int k = 0; k < n && static_cast<int>(kept.size()) < n - m; k++) {
    RVec v = proj.col(k);
    for (int pass = 0; pass < 2; pass++) {
      v = proj * v;
      for (const auto& u : kept) v -= u.dot(v) * u;
    }
    double nv = v.norm();
    if (nv > 1e-6) kept.push_back(v / nv);
  }
  require(static_cast<int>(kept.size()) == n - m, ErrorCode::kGramSingular,
          "could not complete the nuisance basis");
  for (const auto& v : kept) {
    CMat t = CMat::Zero(d, d);
    for (int k = 0; k < n; k++) t += (std::sqrt(static_cast<double>(d)) * v[k]) * e[k];
    basis.t.push_back(t);
  }
  return basis;
}

DualBasis basis_transform(const DualBasis& basis, const RMat& c1, const RMat& c2) {
  const int na = basis.num_a();
  const int nb = basis.num_b();
  require(c1.rows() == nb && c1.cols() == na, ErrorCode::kDimensionMismatch, "C1 must be |B| x |A|");
  require(c2.rows() == nb && c2.cols() == nb, ErrorCode::kDimensionMismatch, "C2 must be |B| x |B|");
  if (nb > 0) {
    Eigen::JacobiSVD<RMat> svd(c2);
    const RVec& sv = svd.singularValues();
    require(sv.minCoeff() > 0 && sv.maxCoeff() / sv.minCoeff() < 1e12, ErrorCode::kSingularC2,
            "C2 is numerically singular");
  }
  DualBasis out;
  out.canonical = false;
  for (int a = 0; a < na; a++) {
    CMat q = basis.q[a];
    for (int b = 0; b < nb; b++) q += c1(b, a) * basis.t[b];
    out.q.push_back(q);
  }
  for (int b2 = 0; b2 < nb; b2++) {
    CMat t = CMat::Zero(basis.t[0].rows(), basis.t[0].cols());
    for (int b = 0; b < nb; b++) t += c2(b, b2) * basis.t[b];
    out.t.push_back(t);
  }
  return out;
}

StateModel::StateModel(DensityMatrix rho0, ObservableSet obs)
    : StateModel(rho0, obs, build_dual_basis(obs)) {}

StateModel::StateModel(DensityMatrix rho0, ObservableSet obs, DualBasis basis)
    : rho0_(std::move(rho0)), obs_(std::move(obs)), basis_(std::move(basis)) {
  require(rho0_.dim() == obs_.dim(), ErrorCode::kDimensionMismatch, "rho0 and observables differ in dimension");
  require(basis_.num_a() == obs_.size() && basis_.num_a() + basis_.num_b() == dim() * dim() - 1,
          ErrorCode::kDimensionMismatch, "dual basis does not match observables");
  require(min_eigenvalue(rho0_.mat()) > 1e-12, ErrorCode::kInvalidArgument, "rho0 must be full rank");
}

HermitianOp parameterize(const StateModel& model, const RVec& theta, const RVec& phi) {
  require(theta.size() == model.num_a() && phi.size() == model.num_b(), ErrorCode::kDimensionMismatch,
          "parameter vector sizes do not match the model");
  const double d = model.dim();
  CMat r = model.rho0().mat();
  for (int a = 0; a < model.num_a(); a++) r += (theta[a] / d) * model.basis().q[a];
  for (int b = 0; b < model.num_b(); b++) r += (phi[b] / d) * model.basis().t[b];
  return HermitianOp(0.5 * (r + r.adjoint()));
}

Params extract_params(const StateModel& model, const CMat& rho) {
  require(rho.rows() == model.dim(), ErrorCode::kDimensionMismatch, "state dimension differs from model");
  const auto& obs = model.observables();
  const auto& basis = model.basis();
  const double d = model.dim();
  CMat delta = rho - model.rho0().mat();
  Params out;
  out.theta.resize(model.num_a());
  for (int a = 0; a < model.num_a(); a++) out.theta[a] = trace_real(delta, obs[a]);
  const int nb = model.num_b();
  out.phi.resize(nb);
  if (nb == 0) return out;
  RVec rhs(nb);
  for (int b = 0; b < nb; b++) rhs[b] = trace_real(delta, basis.t[b]);
  if (basis.canonical) {
    out.phi = rhs;
    return out;
  }
  // General basis: tr(T_b delta) = (1/d)(sum_a theta_a tr(T_b Q_a) + sum_b' phi_b' tr(T_b T_b')).
  RMat gtt(nb, nb);
  for (int b = 0; b < nb; b++) {
    for (int b2 = 0; b2 < nb; b2++) gtt(b, b2) = trace_real(basis.t[b], basis.t[b2]);
    for (int a = 0; a < model.num_a(); a++) rhs[b] -= out.theta[a] * trace_real(basis.t[b], basis.q[a]) / d;
  }
  out.phi = d * gtt.ldlt().solve(rhs);
  return out;
}

bool is_valid_state(const HermitianOp& op) {
  return std::abs(op.trace() - 1.0) <= 1e-10 && min_eigenvalue(op.mat()) >= -1e-10;
}

bool in_neighborhood(const CMat& rho, const CMat& rho0) {
  return min_eigenvalue(rho) >= -1e-10 && min_eigenvalue(2.0 * rho0 - rho) >= -1e-10;
}

DensityMatrix mix_with_maximally_mixed(const DensityMatrix& rho) {
  const int d = rho.dim();
  return DensityMatrix(CMat(0.5 * rho.mat() + CMat::Identity(d, d) / (2.0 * d)));
}

CMat pauli_string(const std::string& label) {
  CMat out = CMat::Identity(1, 1);
  for (char ch : label) {
    CMat p(2, 2);
    switch (ch) {
      case 'I': p << 1, 0, 0, 1; break;
      case 'X': p << 0, 1, 1, 0; break;
      case 'Y': p << 0, cplx(0, -1), cplx(0, 1), 0; break;
      case 'Z': p << 1, 0, 0, -1; break;
      default: throw Error(ErrorCode::kInvalidArgument, std::string("bad Pauli letter '") + ch + "'");
    }
    out = kron(out, p);
  }
  return out;
}

std::vector<std::string> pauli_labels(int n) {
  static const char kLetters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> out;
  long long total = 1LL << (2 * n);
  for (long long code = 1; code < total; code++) {
    std::string s(n, 'I');
    long long c = code;
    for (int k = n - 1; k >= 0; k--) {
      s[k] = kLetters[c & 3];
      c >>= 2;
    }
    out.push_back(s);
  }
  return out;
}

ObservableSet pauli_observables(const std::vector<std::string>& labels) {
  require(!labels.empty(), ErrorCode::kInvalidArgument, "no Pauli labels");
  std::vector<HermitianOp> ops;
  for (const auto& l : labels) ops.emplace_back(pauli_string(l));
  return ObservableSet(1 << labels[0].size(), std::move(ops));
}

ObservableSet pauli_observables(int n) { return pauli_observables(pauli_labels(n)); }

}  // namespace fshadow
