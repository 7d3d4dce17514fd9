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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fshadow/linalg.hpp"
#include "fshadow/measurement.hpp"
#include "fshadow/operators.hpp"

namespace fshadow {

/// kDerivative: I_cc' = sum_x tr(M_x R_c) tr(M_x R_c') / (d^2 p_x), the
/// convention consistent with d p_x / d theta_c = tr(M_x R_c)/d.
/// kScaled drops the 1/d^2; it exists only as a negative control.
enum class FimConvention { kDerivative, kScaled };

struct FisherInfo {
  RMat matrix;
  int num_a = 0;
  int num_b = 0;
  std::string provenance;
  /// Optional factor with matrix = root^T root (weighted outcome scores).
  /// Lets the Schur restriction avoid squaring the condition number.
  RMat root;

  RMat aa() const { return matrix.topLeftCorner(num_a, num_a); }
  RMat ab() const { return matrix.topRightCorner(num_a, num_b); }
  RMat ba() const { return matrix.bottomLeftCorner(num_b, num_a); }
  RMat bb() const { return matrix.bottomRightCorner(num_b, num_b); }
};

struct SchurRestriction {
  /// (I_AA - I_AB I_BB^+ I_BA)^+.
  RMat matrix;
  /// The Schur complement itself.
  RMat complement;
  int support_rank = 0;
};

/// Scores s_{x,c} = tr(M_x R_c)/d are independent of rho0, so they are
/// computed once; each evaluation then costs one weighted Gram product.
class FimEngine {
 public:
  FimEngine(const std::vector<CMat>& ops, int num_a, const Povm& m,
            FimConvention convention = FimConvention::kDerivative);

  FisherInfo at(const CMat& rho0) const;
  const RMat& scores() const { return scores_; }
  const Povm& povm() const { return povm_; }

 private:
  Povm povm_;
  RMat scores_;
  int num_a_;
  double scale_;
};

FisherInfo fim(const StateModel& model, const Povm& m, FimConvention convention = FimConvention::kDerivative);

SchurRestriction schur_restriction(const FisherInfo& info);
/// C1 = -I_BB^+ I_BA.
RMat block_diag_C1(const FisherInfo& info);
/// FIM in the transformed basis (Q + T C1, T C2).
RMat transform_fim(const FisherInfo& info, const RMat& c1, const RMat& c2);

double chi2_divergence(const Povm& m, const CMat& rho, const CMat& rho0);
inline double chi2_divergence(const Povm& m, const DensityMatrix& rho, const DensityMatrix& rho0) {
  return chi2_divergence(m, rho.mat(), rho0.mat());
}

/// I(rho0^{(x)c}, M) over A u B, with all copies moving together.
FisherInfo c_copy_fim(const StateModel& model, const Povm& m);
std::pair<double, double> c_copy_first_order_check(const Povm& m, const StateModel& model, const RVec& theta,
                                                   const RVec& phi);
/// Smallest eigenvalue of c^2 I(rho0, G) - I(rho0^{(x)c}, M).
double c_copy_domination_margin(const Povm& m, const StateModel& model);
bool c_copy_domination_check(const Povm& m, const StateModel& model);

/// One node of a depth-N adaptive strategy. `children` is empty at the last
/// round; otherwise it has one child per outcome of `povm`. `branch_probs`,
/// if non-empty, declares the outcome probabilities under rho0.
struct AdaptiveNode {
  Povm povm;
  std::vector<double> branch_probs;
  std::vector<AdaptiveNode> children;
};

int adaptive_depth(const AdaptiveNode& root);
/// M~ = {(1/N) p_history M^{(r)}_history}.
Povm flatten_adaptive(const AdaptiveNode& root, const DensityMatrix& rho0);
/// FIM of the joint leaf distribution of the adaptive tree on rho0^{(x)N}.
FisherInfo adaptive_fim(const StateModel& model, const AdaptiveNode& root);

}  // namespace fshadow
