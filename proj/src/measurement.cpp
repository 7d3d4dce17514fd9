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

#include "fshadow/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fshadow/error.hpp"

namespace fshadow {

namespace {

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; i++) r *= base;
  return r;
}

// Rank-1 factor sqrt(w)|v>.
CMat rank_one(const CVec& v, double w) { return std::sqrt(w) * v; }

}  // namespace

Povm::Povm(int dim, int copies, std::vector<CMat> factors, std::vector<std::string> labels)
    : dim_(dim), copies_(copies), total_dim_(ipow(dim, copies)), factors_(std::move(factors)),
      labels_(std::move(labels)) {
  require(dim >= 1 && copies >= 1, ErrorCode::kInvalidArgument, "bad POVM shape");
  require(!factors_.empty(), ErrorCode::kInvalidArgument, "POVM has no outcomes");
  for (const auto& f : factors_) {
    require(f.rows() == total_dim_, ErrorCode::kDimensionMismatch, "POVM factor has wrong row count");
  }
  if (labels_.empty()) {
    for (size_t x = 0; x < factors_.size(); x++) labels_.push_back(std::to_string(x));
  }
  require(labels_.size() == factors_.size(), ErrorCode::kInvalidArgument, "label count differs from outcomes");
  double err = completeness_error();
  require(err <= 1e-9, ErrorCode::kInvalidArgument,
          "POVM elements do not sum to identity (deviation " + std::to_string(err) + ")");
}

Povm Povm::from_elements(int dim, int copies, const std::vector<CMat>& elements, std::vector<std::string> labels) {
  std::vector<CMat> factors;
  factors.reserve(elements.size());
  for (const auto& e : elements) {
    require(e.rows() == e.cols(), ErrorCode::kDimensionMismatch, "POVM element must be square");
    require((e - e.adjoint()).cwiseAbs().maxCoeff() <= 1e-10, ErrorCode::kInvalidArgument,
            "POVM element is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (e + e.adjoint()));
    const RVec& ev = es.eigenvalues();
    require(ev.minCoeff() >= -1e-10, ErrorCode::kInvalidArgument, "POVM element is not PSD");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); i++) {
      if (ev[i] > 1e-14) keep.push_back(i);
    }
    CMat f(e.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); k++) f.col(k) = std::sqrt(ev[keep[k]]) * es.eigenvectors().col(keep[k]);
    factors.push_back(std::move(f));
  }
  return Povm(dim, copies, std::move(factors), std::move(labels));
}

double Povm::expectation(size_t x, const CMat& a) const {
  const CMat& f = factors_[x];
  if (f.cols() == 1) return f.col(0).dot(a * f.col(0)).real();
  return (f.adjoint() * a * f).trace().real();
}

double Povm::completeness_error() const {
  CMat sum = CMat::Zero(total_dim_, total_dim_);
  for (const auto& f : factors_) sum.noalias() += f * f.adjoint();
  return (sum - CMat::Identity(total_dim_, total_dim_)).cwiseAbs().maxCoeff();
}

RVec outcome_probs(const Povm& m, const CMat& rho) {
  require(rho.rows() == m.total_dim(), ErrorCode::kDimensionMismatch, "state dimension differs from POVM");
  RVec p(m.size());
  for (size_t x = 0; x < m.size(); x++) p[x] = std::max(0.0, m.expectation(x, rho));
  return p;
}

std::vector<int> sample_from_probs(const RVec& p, size_t n, std::mt19937_64& rng) {
  std::vector<double> cdf(p.size());
  double acc = 0;
  for (Eigen::Index i = 0; i < p.size(); i++) cdf[i] = (acc += p[i]);
  std::uniform_real_distribution<double> unif(0.0, acc);
  std::vector<int> out(n);
  for (size_t k = 0; k < n; k++) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), unif(rng));
    out[k] = static_cast<int>(std::min<ptrdiff_t>(it - cdf.begin(), p.size() - 1));
  }
  return out;
}

OutcomeSample sample_outcomes(const Povm& m, const DensityMatrix& rho, size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return OutcomeSample{sample_from_probs(outcome_probs(m, rho), n, rng), seed};
}

CVec haar_random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVec v(d);
  for (int i = 0; i < d; i++) v[i] = cplx(g(rng), g(rng));
  return v / v.norm();
}

CVec haar_random_state(int d, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_random_state(d, rng);
}

CMat haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMat z(n, n);
  for (int i = 0; i < n; i++) {
    for (int j = 0; j < n; j++) z(i, j) = cplx(g(rng), g(rng));
  }
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; j++) {
    cplx ph = r(j, j) / std::abs(r(j, j));
    q.col(j) *= ph;
  }
  return q;
}

CVec sample_haar_measurement_outcome(const DensityMatrix& rho, std::mt19937_64& rng) {
  const int d = rho.dim();
  const double lmax = max_eigenvalue(rho.mat());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (true) {
    CVec v = haar_random_state(d, rng);
    double w = v.dot(rho.mat() * v).real();
    if (unif(rng) * lmax < w) return v;
  }
}

CVec sample_haar_measurement_outcome(const DensityMatrix& rho, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_haar_measurement_outcome(rho, rng);
}

namespace {

// Projected gradient descent on the frame potential sum_xy |<v_x|v_y>|^4. The
// second-moment operator of an exact 2-design is the symmetric projector, so this
// pulls a random sample toward the Haar moments the optimizer cares about.
void refine_toward_2design(std::vector<CVec>& vs, int d) {
  const int d2 = d * d;
  const double k = static_cast<double>(vs.size());
  CMat sym = CMat::Zero(d2, d2);
  for (int i = 0; i < d; i++) {
    for (int j = 0; j < d; j++) {
      sym(i * d + j, i * d + j) += 0.5;
      sym(i * d + j, j * d + i) += 0.5;
    }
  }
  const double scale = d * (d + 1.0) / (2.0 * k);
  for (int iter = 0; iter < 200; iter++) {
    CMat g = CMat::Zero(d2, d2);
    CVec w(d2);
    for (const auto& v : vs) {
      for (int i = 0; i < d; i++) w.segment(i * d, d) = v[i] * v;
      g.noalias() += w * w.adjoint();
    }
    g *= scale;
    if ((g - sym).norm() <= 1e-4 * sym.norm()) break;
    for (auto& v : vs) {
      for (int i = 0; i < d; i++) w.segment(i * d, d) = v[i] * v;
      CVec u = g * w;
      CVec grad(d);
      for (int i = 0; i < d; i++) grad[i] = v.adjoint() * u.segment(i * d, d);
      grad -= v.dot(grad) * v;
      v -= 0.5 * grad;
      v.normalize();
    }
  }
}

}  // namespace

Povm finite_haar_proxy(int d, int k, uint64_t seed) {
  require(k >= d * d, ErrorCode::kInvalidArgument, "finite Haar proxy needs K >= d^2");
  std::mt19937_64 rng(seed);
  std::vector<CVec> vs;
  vs.reserve(k);
  for (int i = 0; i < k; i++) vs.push_back(haar_random_state(d, rng));
  refine_toward_2design(vs, d);
  CMat s = CMat::Zero(d, d);
  for (const auto& v : vs) s.noalias() += v * v.adjoint();
  s *= static_cast<double>(d) / k;
  RVec ev = hermitian_eigenvalues(s);
  if (ev.minCoeff() <= 1e-10 * ev.maxCoeff()) throw Error(ErrorCode::kSingularFrame, "Haar frame is rank deficient");
  CMat isq = inverse_sqrt(s);
  std::vector<CMat> factors;
  factors.reserve(k);
  const double w = std::sqrt(static_cast<double>(d) / k);
  for (const auto& v : vs) factors.push_back(w * (isq * v));
  return Povm(d, 1, std::move(factors));
}

Povm computational_povm(int d) {
  std::vector<CMat> f;
  for (int i = 0; i < d; i++) f.push_back(CVec::Unit(d, i));
  return Povm(d, 1, std::move(f));
}

namespace {

// Eigenvectors of X, Y, Z with eigenvalue +1 then -1.
std::vector<std::pair<std::string, CVec>> pauli_eigenvectors() {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<std::pair<std::string, CVec>> out;
  CVec v(2);
  v << s, s; out.emplace_back("X+", v);
  v << s, -s; out.emplace_back("X-", v);
  v << s, cplx(0, s); out.emplace_back("Y+", v);
  v << s, cplx(0, -s); out.emplace_back("Y-", v);
  v << 1, 0; out.emplace_back("Z+", v);
  v << 0, 1; out.emplace_back("Z-", v);
  return out;
}

}  // namespace

Povm pauli_basis_uniform(int n) {
  require(n >= 1, ErrorCode::kInvalidArgument, "need at least one qubit");
  auto single = pauli_eigenvectors();
  std::vector<std::pair<std::string, CVec>> cur{{"", CVec::Ones(1)}};
  for (int q = 0; q < n; q++) {
    std::vector<std::pair<std::string, CVec>> next;
    for (const auto& [label, v] : cur) {
      for (const auto& [l2, v2] : single) next.emplace_back(label + l2, CVec(kron(v, v2)));
    }
    cur = std::move(next);
  }
  const double w = std::pow(3.0, -n);
  std::vector<CMat> f;
  std::vector<std::string> labels;
  for (const auto& [label, v] : cur) {
    f.push_back(rank_one(v, w));
    labels.push_back(label);
  }
  return Povm(1 << n, 1, std::move(f), std::move(labels));
}

Povm sic_d2() {
  // Tetrahedron: polar angles and azimuths of the four Bloch vectors.
  const double t0 = std::acos(-1.0 / 3.0);
  const double pi = std::numbers::pi;
  const double theta[4] = {0.0, t0, t0, t0};
  const double phi[4] = {0.0, 0.0, 2 * pi / 3, 4 * pi / 3};
  std::vector<CMat> f;
  for (int k = 0; k < 4; k++) {
    CVec v(2);
    v << std::cos(theta[k] / 2), std::polar(std::sin(theta[k] / 2), phi[k]);
    f.push_back(rank_one(v, 0.5));
  }
  return Povm(2, 1, std::move(f));
}

Povm mub_prime(int d) {
  bool prime = d >= 2;
  for (int k = 2; k * k <= d; k++) {
    if (d % k == 0) prime = false;
  }
  if (!prime) throw Error(ErrorCode::kUnsupportedDim, "MUB construction needs prime d, got " + std::to_string(d));
  const double w = 1.0 / (d + 1);
  std::vector<CMat> f;
  std::vector<std::string> labels;
  if (d == 2) {
    for (const auto& [label, v] : pauli_eigenvectors()) {
      f.push_back(rank_one(v, w));
      labels.push_back(label);
    }
    return Povm(2, 1, std::move(f), std::move(labels));
  }
  for (int j = 0; j < d; j++) {
    f.push_back(rank_one(CVec::Unit(d, j), w));
    labels.push_back("c" + std::to_string(j));
  }
  const double pi = std::numbers::pi;
  for (int k = 0; k < d; k++) {
    for (int j = 0; j < d; j++) {
      CVec v(d);
      for (int l = 0; l < d; l++) {
        long long e = (static_cast<long long>(k) * l * l + static_cast<long long>(j) * l) % d;
        v[l] = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2 * pi * e / d);
      }
      f.push_back(rank_one(v, w));
      labels.push_back("b" + std::to_string(k) + "." + std::to_string(j));
    }
  }
  return Povm(d, 1, std::move(f), std::move(labels));
}

Povm bell_basis_povm() {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<CMat> f;
  CVec v(4);
  v << s, 0, 0, s; f.push_back(v);
  v << s, 0, 0, -s; f.push_back(v);
  v << 0, s, s, 0; f.push_back(v);
  v << 0, s, -s, 0; f.push_back(v);
  return Povm(2, 2, std::move(f), {"Phi+", "Phi-", "Psi+", "Psi-"});
}

Povm standard_povm(int d, PovmKind kind) {
  switch (kind) {
    case PovmKind::kComputational: return computational_povm(d);
    case PovmKind::kPauliBasisUniform: {
      int n = 0;
      while ((1 << n) < d) n++;
      if ((1 << n) != d) throw Error(ErrorCode::kUnsupportedDim, "Pauli bases need d = 2^n");
      return pauli_basis_uniform(n);
    }
    case PovmKind::kSic:
      if (d != 2) throw Error(ErrorCode::kUnsupportedDim, "SIC is only provided for d = 2");
      return sic_d2();
    case PovmKind::kMub: return mub_prime(d);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown POVM kind");
}

Povm isometry_povm(const CMat& isometry) {
  const int d = static_cast<int>(isometry.cols());
  std::vector<CMat> f;
  for (Eigen::Index k = 0; k < isometry.rows(); k++) f.push_back(isometry.row(k).adjoint());
  return Povm(d, 1, std::move(f));
}

Povm mix_povms(const Povm& a, const Povm& b, double w) {
  require(a.total_dim() == b.total_dim() && a.copies() == b.copies(), ErrorCode::kDimensionMismatch,
          "POVMs act on different spaces");
  require(w >= 0 && w <= 1, ErrorCode::kInvalidArgument, "mixing weight must be in [0, 1]");
  std::vector<CMat> f;
  std::vector<std::string> labels;
  for (size_t x = 0; x < a.size(); x++) {
    f.push_back(std::sqrt(w) * a.factor(x));
    labels.push_back("a:" + a.labels()[x]);
  }
  for (size_t x = 0; x < b.size(); x++) {
    f.push_back(std::sqrt(1 - w) * b.factor(x));
    labels.push_back("b:" + b.labels()[x]);
  }
  return Povm(a.dim(), a.copies(), std::move(f), std::move(labels));
}

Povm tensor_product(const Povm& a, const Povm& b) {
  require(a.dim() == b.dim(), ErrorCode::kDimensionMismatch, "tensor factors have different local dimension");
  std::vector<CMat> f;
  std::vector<std::string> labels;
  for (size_t x = 0; x < a.size(); x++) {
    for (size_t y = 0; y < b.size(); y++) {
      f.push_back(kron(a.factor(x), b.factor(y)));
      labels.push_back(a.labels()[x] + "," + b.labels()[y]);
    }
  }
  return Povm(a.dim(), a.copies() + b.copies(), std::move(f), std::move(labels));
}

Povm tensor_power(const Povm& m, int c) {
  require(c >= 1, ErrorCode::kInvalidArgument, "copy count must be positive");
  Povm out = m;
  for (int k = 1; k < c; k++) out = tensor_product(out, m);
  return out;
}

namespace {

std::vector<CMat> reduced_elements(const Povm& m, const CMat& rho0, int slot) {
  const int d = m.dim();
  const int c = m.copies();
  CMat env = embed_at(CMat::Identity(d, d), rho0, c, slot);
  std::vector<CMat> out;
  out.reserve(m.size());
  for (size_t s = 0; s < m.size(); s++) {
    CMat g = partial_trace_keep(env * m.element(s), d, c, slot);
    out.push_back(0.5 * (g + g.adjoint()));
  }
  return out;
}

}  // namespace

Povm reduce_c_copy(const Povm& m, const DensityMatrix& rho0, int slot) {
  require(rho0.dim() == m.dim(), ErrorCode::kDimensionMismatch, "rho0 dimension differs from POVM");
  require(slot >= 0 && slot < m.copies(), ErrorCode::kInvalidArgument, "slot out of range");
  return Povm::from_elements(m.dim(), 1, reduced_elements(m, rho0.mat(), slot), m.labels());
}

Povm mixed_reduction(const Povm& m, const DensityMatrix& rho0) {
  require(rho0.dim() == m.dim(), ErrorCode::kDimensionMismatch, "rho0 dimension differs from POVM");
  const int c = m.copies();
  std::vector<CMat> all;
  std::vector<std::string> labels;
  for (int i = 0; i < c; i++) {
    auto g = reduced_elements(m, rho0.mat(), i);
    for (size_t s = 0; s < g.size(); s++) {
      all.push_back(g[s] / static_cast<double>(c));
      labels.push_back(std::to_string(i) + ":" + m.labels()[s]);
    }
  }
  return Povm::from_elements(m.dim(), 1, all, std::move(labels));
}

Povm random_joint_povm(int d, int copies, int outcomes, uint64_t seed) {
  require(outcomes >= 1, ErrorCode::kInvalidArgument, "need at least one outcome");
  const int big = ipow(d, copies);
  std::mt19937_64 rng(seed);
  CMat u = haar_unitary(big * outcomes, rng);
  CMat v = u.leftCols(big);
  std::vector<CMat> f;
  for (int k = 0; k < outcomes; k++) f.push_back(v.middleRows(k * big, big).adjoint());
  return Povm(d, copies, std::move(f));
}

}  // namespace fshadow
