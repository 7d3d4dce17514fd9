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
#include <optional>
#include <string>
#include <vector>

#include "fshadow/fisher.hpp"
#include "fshadow/linalg.hpp"
#include "fshadow/measurement.hpp"
#include "fshadow/operators.hpp"

namespace fshadow {

/// The Cramer-Rao saturating estimator at rho0:
/// theta_hat_a(x) = sum_c (I^+)_ac (tr(M_x R_c)/d) / p0_x.
class LocalEstimator {
 public:
  LocalEstimator(StateModel model, Povm povm);

  const StateModel& model() const { return model_; }
  const Povm& povm() const { return povm_; }
  /// m x (number of outcomes).
  const RMat& coeffs() const { return coeffs_; }
  /// tr(O_a rho0).
  const RVec& offset() const { return offset_; }
  const FisherInfo& fisher() const { return info_; }
  const SchurRestriction& restriction() const { return restriction_; }
  RVec estimate(int outcome) const { return coeffs_.col(outcome); }

 private:
  StateModel model_;
  Povm povm_;
  FisherInfo info_;
  SchurRestriction restriction_;
  RMat coeffs_;
  RVec offset_;
};

LocalEstimator build_local_estimator(const StateModel& model, const Povm& m);

/// Exact MSEM sum_x (theta_hat(x) - theta)(theta_hat(x) - theta)^T p_x.
RMat msem_exact(const LocalEstimator& est, const CMat& rho);
inline RMat msem_exact(const LocalEstimator& est, const DensityMatrix& rho) { return msem_exact(est, rho.mat()); }

/// (1/N0) sum ((d+1)|u><u| - I).
CMat coarse_tomography(const std::vector<CVec>& samples, int d);
/// Eigenvalue clip at 1e-6, trace renormalization, then 1e-3 mix toward I/d.
DensityMatrix regularize_estimate(const CMat& raw);

/// K batches of B in the given order; coordinate-wise (lower) median of batch means.
RVec mom_coordinatewise(const std::vector<RVec>& samples, size_t k, size_t b);
double median_of_means(const std::vector<double>& samples, size_t k, size_t b);

/// ceil(8 ln(m / delta)).
size_t default_batches(int m, double delta);

struct ShadowConfig {
  ObservableSet obs;
  double p = kInf;
  double epsilon = 0.1;
  double delta = 0.1;
  Povm measurement;
  size_t n0 = 4000;
  size_t n1 = 10000;
  /// 0 selects the defaults K = ceil(8 ln(m/delta)) and B = ceil(N1/K).
  size_t k = 0;
  size_t b = 0;
  uint64_t seed = 0;
};

struct RunReport {
  RVec estimates;
  std::optional<RVec> truth;
  double p_norm_error = 0;
  size_t n0 = 0;
  size_t n1 = 0;
  size_t k = 0;
  size_t b = 0;
  bool success = false;
  /// Whether the mixed input state was in N(rho0) for the estimated rho0.
  bool coarse_ok = true;
  uint64_t seed = 0;
  double epsilon = 0;
  double p = 0;
  CMat rho0;
};

/// Output of the shared first phase: mixing, coarse tomography, estimator.
struct PreparedRun {
  DensityMatrix mixed_truth;
  DensityMatrix rho0;
  std::optional<LocalEstimator> estimator;
  bool coarse_ok = true;
};

PreparedRun prepare_run(const ShadowConfig& cfg, const DensityMatrix& rho);
/// Per-shot estimates for n1 shots of the measurement on the mixed state.
std::vector<RVec> measure_shots(const PreparedRun& prep, size_t n1, uint64_t seed);

RunReport run_shadow_tomography(const ShadowConfig& cfg, const DensityMatrix& rho);
/// Finishes a prepared run; lets callers vary N1 with common random numbers.
RunReport finish_shadow_tomography(const ShadowConfig& cfg, const PreparedRun& prep, const DensityMatrix& rho);

/// Estimates tr(O_alpha rho) with alpha revealed after measurement. K = ceil(8 ln(1/delta)).
RunReport run_oblivious(const ShadowConfig& cfg, const DensityMatrix& rho, const RVec& alpha);
RunReport finish_oblivious(const ShadowConfig& cfg, const PreparedRun& prep, const DensityMatrix& rho,
                           const RVec& alpha);

enum class Decision { kNull, kAlternative };
/// Alternative iff ||theta_hat||_p >= 3 epsilon / 2; rounding-level ties go to alternative.
Decision distinguish(double epsilon, double p, const RVec& theta_hat);
/// rho0 known: estimate theta of rho with n1 shots and median-of-means, then decide.
Decision run_distinguishing(const LocalEstimator& est, const DensityMatrix& rho, size_t n1, double epsilon,
                            double p, double delta, uint64_t seed);

}  // namespace fshadow
