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

#include "fshadow/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "fshadow/error.hpp"

namespace fshadow {

LocalEstimator::LocalEstimator(StateModel model, Povm povm) : model_(std::move(model)), povm_(std::move(povm)) {
  require(povm_.copies() == 1 && povm_.dim() == model_.dim(), ErrorCode::kDimensionMismatch,
          "estimator POVM must be single-copy on the model dimension");
  const int m = model_.num_a();
  FimEngine engine(model_.basis().all(), m, povm_);
  info_ = engine.at(model_.rho0().mat());
  restriction_ = schur_restriction(info_);
  if (restriction_.support_rank < m) {
    throw Error(ErrorCode::kSingularFim, "Fisher information is singular on the target parameters");
  }
  RMat inv = pinv_sym(info_.matrix);
  RVec p0 = outcome_probs(povm_, model_.rho0());
  const RMat& s = engine.scores();
  coeffs_ = RMat::Zero(m, povm_.size());
  for (size_t x = 0; x < povm_.size(); x++) {
    if (p0[x] <= 1e-14) continue;
    coeffs_.col(x) = inv.topRows(m) * s.row(x).transpose() / p0[x];
  }
  offset_.resize(m);
  for (int a = 0; a < m; a++) offset_[a] = trace_real(model_.observables()[a], model_.rho0().mat());
}

LocalEstimator build_local_estimator(const StateModel& model, const Povm& m) { return LocalEstimator(model, m); }

RMat msem_exact(const LocalEstimator& est, const CMat& rho) {
  RVec theta = extract_params(est.model(), rho).theta;
  RVec p = outcome_probs(est.povm(), rho);
  const Eigen::Index m = theta.size();
  RMat v = RMat::Zero(m, m);
  for (Eigen::Index x = 0; x < p.size(); x++) {
    if (p[x] == 0) continue;
    RVec e = est.coeffs().col(x) - theta;
    v += p[x] * e * e.transpose();
  }
  return 0.5 * (v + v.transpose());
}

CMat coarse_tomography(const std::vector<CVec>& samples, int d) {
  require(!samples.empty(), ErrorCode::kInvalidArgument, "coarse tomography needs samples");
  CMat acc = CMat::Zero(d, d);
  for (const auto& u : samples) {
    require(u.size() == d, ErrorCode::kDimensionMismatch, "sample dimension differs from d");
    acc.noalias() += u * u.adjoint();
  }
  acc *= static_cast<double>(d + 1) / samples.size();
  acc -= CMat::Identity(d, d);
  return 0.5 * (acc + acc.adjoint());
}

DensityMatrix regularize_estimate(const CMat& raw) {
  const Eigen::Index d = raw.rows();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (raw + raw.adjoint()));
  RVec ev = es.eigenvalues().cwiseMax(1e-6);
  ev /= ev.sum();
  CMat rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  rho = (1.0 - 1e-3) * rho + 1e-3 * CMat::Identity(d, d) / static_cast<double>(d);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  return DensityMatrix(rho);
}

namespace {

double lower_median(std::vector<double>& v) {
  size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

}  // namespace

namespace {

// Summing in sorted order makes a batch mean independent of the order of its shots.
double batch_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double acc = 0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

RVec mom_coordinatewise(const std::vector<RVec>& samples, size_t k, size_t b) {
  if (samples.size() != k * b || k == 0 || b == 0) {
    throw Error(ErrorCode::kCountMismatch, "median-of-means expects exactly K*B samples");
  }
  const Eigen::Index m = samples[0].size();
  RVec out(m);
  std::vector<double> col(k);
  std::vector<double> batch(b);
  for (Eigen::Index a = 0; a < m; a++) {
    for (size_t j = 0; j < k; j++) {
      for (size_t i = 0; i < b; i++) batch[i] = samples[j * b + i][a];
      col[j] = batch_mean(batch);
    }
    out[a] = lower_median(col);
  }
  return out;
}

double median_of_means(const std::vector<double>& samples, size_t k, size_t b) {
  if (samples.size() != k * b || k == 0 || b == 0) {
    throw Error(ErrorCode::kCountMismatch, "median-of-means expects exactly K*B samples");
  }
  std::vector<double> means(k);
  for (size_t j = 0; j < k; j++) {
    means[j] = batch_mean(std::vector<double>(samples.begin() + j * b, samples.begin() + (j + 1) * b));
  }
  return lower_median(means);
}

size_t default_batches(int m, double delta) {
  return static_cast<size_t>(std::ceil(8.0 * std::log(static_cast<double>(m) / delta)));
}

PreparedRun prepare_run(const ShadowConfig& cfg, const DensityMatrix& rho) {
  const int d = cfg.obs.dim();
  require(rho.dim() == d, ErrorCode::kDimensionMismatch, "state dimension differs from observables");
  PreparedRun prep{mix_with_maximally_mixed(rho), DensityMatrix::maximally_mixed(d), std::nullopt, true};
  std::mt19937_64 rng = substream(cfg.seed, 0);
  std::vector<CVec> samples;
  samples.reserve(cfg.n0);
  for (size_t i = 0; i < cfg.n0; i++) samples.push_back(sample_haar_measurement_outcome(prep.mixed_truth, rng));
  prep.rho0 = regularize_estimate(coarse_tomography(samples, d));
  prep.coarse_ok = in_neighborhood(prep.mixed_truth, prep.rho0);
  prep.estimator.emplace(StateModel(prep.rho0, cfg.obs), cfg.measurement);
  return prep;
}

std::vector<RVec> measure_shots(const PreparedRun& prep, size_t n1, uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 1);
  const LocalEstimator& est = *prep.estimator;
  std::vector<int> outcomes = sample_from_probs(outcome_probs(est.povm(), prep.mixed_truth), n1, rng);
  std::vector<RVec> shots;
  shots.reserve(n1);
  for (int x : outcomes) shots.push_back(est.coeffs().col(x));
  return shots;
}

namespace {

RVec expectations(const ObservableSet& obs, const DensityMatrix& rho) {
  RVec out(obs.size());
  for (int a = 0; a < obs.size(); a++) out[a] = trace_real(obs[a], rho.mat());
  return out;
}

RunReport base_report(const ShadowConfig& cfg, const PreparedRun& prep) {
  RunReport r;
  r.n0 = cfg.n0;
  r.seed = cfg.seed;
  r.epsilon = cfg.epsilon;
  r.p = cfg.p;
  r.coarse_ok = prep.coarse_ok;
  r.rho0 = prep.rho0.mat();
  return r;
}

}  // namespace

RunReport finish_shadow_tomography(const ShadowConfig& cfg, const PreparedRun& prep, const DensityMatrix& rho) {
  const int m = cfg.obs.size();
  RunReport r = base_report(cfg, prep);
  r.k = cfg.k ? cfg.k : default_batches(m, cfg.delta);
  r.b = cfg.b ? cfg.b : static_cast<size_t>(std::ceil(static_cast<double>(cfg.n1) / r.k));
  r.n1 = r.k * r.b;
  RVec theta = mom_coordinatewise(measure_shots(prep, r.n1, cfg.seed), r.k, r.b);
  r.estimates = 2.0 * (theta + prep.estimator->offset());
  r.truth = expectations(cfg.obs, rho);
  r.p_norm_error = lp_norm(r.estimates - *r.truth, cfg.p);
  r.success = r.p_norm_error <= cfg.epsilon;
  return r;
}

RunReport run_shadow_tomography(const ShadowConfig& cfg, const DensityMatrix& rho) {
  return finish_shadow_tomography(cfg, prepare_run(cfg, rho), rho);
}

RunReport finish_oblivious(const ShadowConfig& cfg, const PreparedRun& prep, const DensityMatrix& rho,
                           const RVec& alpha) {
  const int m = cfg.obs.size();
  require(alpha.size() == m, ErrorCode::kDimensionMismatch, "alpha length differs from observable count");
  const double q = conjugate_exponent(cfg.p);
  if (lp_norm(alpha, q) > 1.0 + 1e-9) throw Error(ErrorCode::kInvalidAlpha, "alpha lies outside the dual unit ball");
  RunReport r = base_report(cfg, prep);
  r.k = cfg.k ? cfg.k : static_cast<size_t>(std::ceil(8.0 * std::log(1.0 / cfg.delta)));
  r.b = cfg.b ? cfg.b : static_cast<size_t>(std::ceil(static_cast<double>(cfg.n1) / r.k));
  r.n1 = r.k * r.b;
  // Shots are recorded before alpha is used.
  std::vector<RVec> shots = measure_shots(prep, r.n1, cfg.seed);
  std::vector<double> scalar(shots.size());
  for (size_t i = 0; i < shots.size(); i++) scalar[i] = alpha.dot(shots[i]);
  double est = 2.0 * (median_of_means(scalar, r.k, r.b) + alpha.dot(prep.estimator->offset()));
  r.estimates = RVec::Constant(1, est);
  r.truth = RVec::Constant(1, alpha.dot(expectations(cfg.obs, rho)));
  r.p_norm_error = std::abs(est - (*r.truth)[0]);
  r.success = r.p_norm_error <= cfg.epsilon;
  return r;
}

RunReport run_oblivious(const ShadowConfig& cfg, const DensityMatrix& rho, const RVec& alpha) {
  const double q = conjugate_exponent(cfg.p);
  require(alpha.size() == cfg.obs.size(), ErrorCode::kDimensionMismatch, "alpha length differs from observable count");
  if (lp_norm(alpha, q) > 1.0 + 1e-9) throw Error(ErrorCode::kInvalidAlpha, "alpha lies outside the dual unit ball");
  return finish_oblivious(cfg, prepare_run(cfg, rho), rho, alpha);
}

Decision distinguish(double epsilon, double p, const RVec& theta_hat) {
  return lp_norm(theta_hat, p) >= 1.5 * epsilon * (1 - 1e-12) ? Decision::kAlternative : Decision::kNull;
}

Decision run_distinguishing(const LocalEstimator& est, const DensityMatrix& rho, size_t n1, double epsilon,
                            double p, double delta, uint64_t seed) {
  const size_t k = default_batches(est.model().num_a(), delta);
  const size_t b = std::max<size_t>(1, n1 / k);
  std::mt19937_64 rng = substream(seed, 2);
  std::vector<int> outcomes = sample_from_probs(outcome_probs(est.povm(), rho), k * b, rng);
  std::vector<RVec> shots;
  shots.reserve(outcomes.size());
  for (int x : outcomes) shots.push_back(est.coeffs().col(x));
  return distinguish(epsilon, p, mom_coordinatewise(shots, k, b));
}

}  // namespace fshadow
