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

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fshadow/linalg.hpp"

namespace fshadow {

/// A d x d complex Hermitian matrix. Construction rejects matrices whose
/// entries deviate from their conjugate transpose by more than 1e-12.
class HermitianOp {
 public:
  HermitianOp() = default;
  explicit HermitianOp(CMat entries);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& mat() const { return m_; }
  double trace() const { return m_.trace().real(); }

 private:
  CMat m_;
};

/// PSD (min eigenvalue >= -1e-10), unit trace (within 1e-10).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMat entries);
  explicit DensityMatrix(const HermitianOp& op) : DensityMatrix(op.mat()) {}

  static DensityMatrix maximally_mixed(int d);
  static DensityMatrix pure(const CVec& psi);

  int dim() const { return op_.dim(); }
  const CMat& mat() const { return op_.mat(); }
  const HermitianOp& op() const { return op_; }

 private:
  HermitianOp op_;
};

/// Traceless, linearly independent observables O_1..O_m.
class ObservableSet {
 public:
  ObservableSet() = default;
  ObservableSet(int dim, std::vector<HermitianOp> obs);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(obs_.size()); }
  const std::vector<HermitianOp>& obs() const { return obs_; }
  const CMat& operator[](int i) const { return obs_[i].mat(); }
  /// G_ij = tr(O_i O_j).
  RMat gram() const;

 private:
  int dim_ = 0;
  std::vector<HermitianOp> obs_;
};

/// Q_a (index set A) and T_b (index set B).
struct DualBasis {
  std::vector<CMat> q;
  std::vector<CMat> t;
  /// True when tr(T_b T_b') = d delta and Q lies in span(O).
  bool canonical = false;

  int num_a() const { return static_cast<int>(q.size()); }
  int num_b() const { return static_cast<int>(t.size()); }
  /// R_c, A first then B.
  std::vector<CMat> all() const;
};

/// Largest deviations from tr(O_i Q_a) = d delta_ia and tr(O_i T_b) = 0.
struct DualResidual {
  double q = 0;
  double t = 0;
};
DualResidual dual_basis_residual(const ObservableSet& obs, const DualBasis& basis);

DualBasis build_dual_basis(const ObservableSet& obs);

/// (Q', T') = (Q + T C1, T C2). C1 is |B| x |A|, C2 is |B| x |B|.
DualBasis basis_transform(const DualBasis& basis, const RMat& c1, const RMat& c2);

/// rho_{theta,phi} = rho0 + (1/d) sum theta_a Q_a + (1/d) sum phi_b T_b.
class StateModel {
 public:
  StateModel() = default;
  StateModel(DensityMatrix rho0, ObservableSet obs);
  StateModel(DensityMatrix rho0, ObservableSet obs, DualBasis basis);

  int dim() const { return rho0_.dim(); }
  int num_a() const { return basis_.num_a(); }
  int num_b() const { return basis_.num_b(); }
  const DensityMatrix& rho0() const { return rho0_; }
  const ObservableSet& observables() const { return obs_; }
  const DualBasis& basis() const { return basis_; }

 private:
  DensityMatrix rho0_;
  ObservableSet obs_;
  DualBasis basis_;
};

HermitianOp parameterize(const StateModel& model, const RVec& theta, const RVec& phi);

struct Params {
  RVec theta;
  RVec phi;
};
Params extract_params(const StateModel& model, const CMat& rho);
inline Params extract_params(const StateModel& model, const DensityMatrix& rho) {
  return extract_params(model, rho.mat());
}

bool is_valid_state(const HermitianOp& op);
bool in_neighborhood(const CMat& rho, const CMat& rho0);
inline bool in_neighborhood(const DensityMatrix& rho, const DensityMatrix& rho0) {
  return in_neighborhood(rho.mat(), rho0.mat());
}

/// rho -> rho/2 + I/(2d).
DensityMatrix mix_with_maximally_mixed(const DensityMatrix& rho);

/// Pauli string such as "XZ" (qubit 0 leftmost, most significant).
CMat pauli_string(const std::string& label);
/// All 4^n - 1 non-identity Pauli labels in lexicographic I<X<Y<Z order.
std::vector<std::string> pauli_labels(int n);
ObservableSet pauli_observables(int n);
ObservableSet pauli_observables(const std::vector<std::string>& labels);

/// Orthonormal (tr(E_k E_l) = delta) traceless Hermitian basis, d^2 - 1 elements.
std::vector<CMat> gell_mann_basis(int d);

}  // namespace fshadow
