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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fshadow/linalg.hpp"
#include "fshadow/operators.hpp"

namespace fshadow {

/// Finite POVM on (C^d)^{(x) copies}. Each element is stored as a factor F_x
/// with M_x = F_x F_x^dagger, so rank-1 elements cost one column.
class Povm {
 public:
  Povm() = default;
  /// Validates completeness (1e-9 entrywise); PSD holds by construction.
  Povm(int dim, int copies, std::vector<CMat> factors, std::vector<std::string> labels = {});
  /// Factorizes PSD elements (min eigenvalue >= -1e-10) and validates completeness.
  static Povm from_elements(int dim, int copies, const std::vector<CMat>& elements,
                            std::vector<std::string> labels = {});

  int dim() const { return dim_; }
  int copies() const { return copies_; }
  int total_dim() const { return total_dim_; }
  size_t size() const { return factors_.size(); }
  const CMat& factor(size_t x) const { return factors_[x]; }
  const std::vector<CMat>& factors() const { return factors_; }
  const std::vector<std::string>& labels() const { return labels_; }
  CMat element(size_t x) const { return factors_[x] * factors_[x].adjoint(); }
  /// Re tr(M_x A) = Re tr(F^dagger A F).
  double expectation(size_t x, const CMat& a) const;
  /// Max entrywise deviation of sum_x M_x from the identity.
  double completeness_error() const;

 private:
  int dim_ = 0;
  int copies_ = 1;
  int total_dim_ = 0;
  std::vector<CMat> factors_;
  std::vector<std::string> labels_;
};

struct OutcomeSample {
  std::vector<int> indices;
  uint64_t seed = 0;
};

/// p_x = tr(M_x rho); entries in [-1e-12, 0) are clamped to zero.
RVec outcome_probs(const Povm& m, const CMat& rho);
inline RVec outcome_probs(const Povm& m, const DensityMatrix& rho) { return outcome_probs(m, rho.mat()); }

/// Inverse-CDF draws from a probability vector.
std::vector<int> sample_from_probs(const RVec& p, size_t n, std::mt19937_64& rng);
OutcomeSample sample_outcomes(const Povm& m, const DensityMatrix& rho, size_t n, uint64_t seed);

CVec haar_random_state(int d, std::mt19937_64& rng);
CVec haar_random_state(int d, uint64_t seed);
/// Haar unitary via QR of a Ginibre matrix with phase correction.
CMat haar_unitary(int n, std::mt19937_64& rng);

/// Vector with density d <v|rho|v> against Haar measure (rejection sampling).
CVec sample_haar_measurement_outcome(const DensityMatrix& rho, std::mt19937_64& rng);
CVec sample_haar_measurement_outcome(const DensityMatrix& rho, uint64_t seed);

/// Frame-corrected K-outcome surrogate for the continuous Haar POVM.
Povm finite_haar_proxy(int d, int k, uint64_t seed);

Povm computational_povm(int d);
/// Uniformly random Pauli basis on n qubits: 6^n rank-1 elements of weight 3^-n.
Povm pauli_basis_uniform(int n);
/// Qubit tetrahedron.
Povm sic_d2();
/// Complete set of d + 1 mutually unbiased bases for prime d.
Povm mub_prime(int d);
/// Two-qubit Bell-basis measurement.
Povm bell_basis_povm();

enum class PovmKind { kComputational, kPauliBasisUniform, kSic, kMub };
Povm standard_povm(int d, PovmKind kind);

/// Rank-1 POVM whose elements are |v_k><v_k| with v_k^dagger the rows of a K x d isometry.
Povm isometry_povm(const CMat& isometry);
/// Union {w M, (1-w) M'}.
Povm mix_povms(const Povm& a, const Povm& b, double w);

Povm tensor_product(const Povm& a, const Povm& b);
Povm tensor_power(const Povm& m, int c);
/// G_s = tr_{others}((rho0 on every slot but `slot`) M_s).
Povm reduce_c_copy(const Povm& m, const DensityMatrix& rho0, int slot);
/// {(1/c) G_s^{[i]}} over outcomes (i, s).
Povm mixed_reduction(const Povm& m, const DensityMatrix& rho0);

/// Random joint POVM on `copies` copies via a truncated Haar unitary (Naimark).
Povm random_joint_povm(int d, int copies, int outcomes, uint64_t seed);

}  // namespace fshadow
