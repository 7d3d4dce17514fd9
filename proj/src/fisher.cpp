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

#include "fshadow/fisher.hpp"

#include <cmath>

#include "fshadow/error.hpp"

namespace fshadow {

namespace {

constexpr double kZeroProb = 1e-14;

// Rows s_x / sqrt(p_x), so that the FIM is root^T root. Outcomes with
// p_x <= kZeroProb and null scores are dropped.
RMat weighted_root(const RMat& scores, const RVec& p, double score_tol) {
  RMat ws = scores;
  for (Eigen::Index x = 0; x < scores.rows(); x++) {
    if (p[x] <= kZeroProb) {
      if (scores.row(x).cwiseAbs().maxCoeff() > score_tol) {
        throw Error(ErrorCode::kSingularOutcome,
                    "outcome " + std::to_string(x) + " has zero probability but nonzero score");
      }
      ws.row(x).setZero();
    } else {
      ws.row(x) /= std::sqrt(p[x]);
    }
  }
  return ws;
}

RVec stack(const RVec& theta, const RVec& phi) {
  RVec v(theta.size() + phi.size());
  v << theta, phi;
  return v;
}

}  // namespace

FimEngine::FimEngine(const std::vector<CMat>& ops, int num_a, const Povm& m, FimConvention convention)
    : povm_(m), num_a_(num_a) {
  const int d = m.total_dim();
  scale_ = convention == FimConvention::kScaled ? static_cast<double>(d) * d : 1.0;
  scores_.resize(m.size(), ops.size());
  for (size_t c = 0; c < ops.size(); c++) {
    require(ops[c].rows() == d, ErrorCode::kDimensionMismatch, "basis operator dimension differs from POVM");
  }
  for (size_t x = 0; x < m.size(); x++) {
    for (size_t c = 0; c < ops.size(); c++) scores_(x, c) = m.expectation(x, ops[c]) / d;
  }
}

FisherInfo FimEngine::at(const CMat& rho0) const {
  const double d = povm_.total_dim();
  FisherInfo info;
  info.root = std::sqrt(scale_) * weighted_root(scores_, outcome_probs(povm_, rho0), 1e-12 / d);
  RMat g = info.root.transpose() * info.root;
  info.matrix = 0.5 * (g + g.transpose());
  info.num_a = num_a_;
  info.num_b = static_cast<int>(scores_.cols()) - num_a_;
  info.provenance = "povm outcomes=" + std::to_string(povm_.size()) + " dim=" + std::to_string(povm_.total_dim());
  return info;
}

FisherInfo fim(const StateModel& model, const Povm& m, FimConvention convention) {
  require(m.copies() == 1 && m.dim() == model.dim(), ErrorCode::kDimensionMismatch,
          "POVM must be single-copy on the model dimension");
  return FimEngine(model.basis().all(), model.num_a(), m, convention).at(model.rho0().mat());
}

namespace {

// a^+ b. LDLT when a has full numerical rank (it is markedly more accurate than
// an eigendecomposition on ill-conditioned blocks), pseudoinverse otherwise.
RMat psd_solve(const RMat& a, const RMat& b, int* rank = nullptr) {
  int r = 0;
  RMat pinv = pinv_sym(a, &r);
  if (rank) *rank = r;
  if (r == a.rows() && r > 0) {
    Eigen::LDLT<RMat> ldlt(a);
    if (ldlt.info() == Eigen::Success) return ldlt.solve(b);
  }
  return pinv * b;
}

// Singular-value cutoff matching the 1e-10 eigenvalue cutoff on root^T root.
constexpr double kRootCutoff = 1e-5;

// Schur restriction from the factor: project the A columns off span(B columns),
// then invert through the triangular factor. Never forms a squared condition number.
bool restriction_from_root(const FisherInfo& info, SchurRestriction& out) {
  const int na = info.num_a;
  const int nb = info.num_b;
  RMat resid = info.root.leftCols(na);
  if (nb > 0) {
    Eigen::ColPivHouseholderQR<RMat> qb(info.root.rightCols(nb));
    qb.setThreshold(kRootCutoff);
    const Eigen::Index r = qb.rank();
    RMat rotated = qb.householderQ().transpose() * resid;
    resid = rotated.bottomRows(rotated.rows() - r);
  }
  if (resid.rows() < na) return false;
  Eigen::ColPivHouseholderQR<RMat> qa(resid);
  qa.setThreshold(kRootCutoff);
  if (qa.rank() < na) return false;
  RMat upper = qa.matrixR().topLeftCorner(na, na).triangularView<Eigen::Upper>();
  RMat rinv = upper.triangularView<Eigen::Upper>().solve(RMat::Identity(na, na));
  RMat perm = qa.colsPermutation();
  RMat g = resid.transpose() * resid;
  out.complement = 0.5 * (g + g.transpose());
  RMat inv = perm * (rinv * rinv.transpose()) * perm.transpose();
  out.matrix = 0.5 * (inv + inv.transpose());
  out.support_rank = na;
  return true;
}

}  // namespace

SchurRestriction schur_restriction(const FisherInfo& info) {
  SchurRestriction out;
  if (info.root.cols() == info.matrix.cols() && info.root.rows() > 0 && restriction_from_root(info, out)) return out;
  RMat s = info.aa();
  if (info.num_b > 0) s -= info.ab() * psd_solve(info.bb(), info.ba());
  out.complement = 0.5 * (s + s.transpose());
  RMat inv = psd_solve(out.complement, RMat::Identity(info.num_a, info.num_a), &out.support_rank);
  out.matrix = 0.5 * (inv + inv.transpose());
  return out;
}

RMat block_diag_C1(const FisherInfo& info) {
  if (info.num_b == 0) return RMat::Zero(0, info.num_a);
  return -psd_solve(info.bb(), info.ba());
}

RMat transform_fim(const FisherInfo& info, const RMat& c1, const RMat& c2) {
  const int na = info.num_a;
  const int nb = info.num_b;
  // New basis vectors in old coordinates: columns of J = [[I, 0], [C1, C2]].
  RMat j = RMat::Zero(na + nb, na + nb);
  j.topLeftCorner(na, na).setIdentity();
  j.bottomLeftCorner(nb, na) = c1;
  j.bottomRightCorner(nb, nb) = c2;
  RMat out = j.transpose() * info.matrix * j;
  return 0.5 * (out + out.transpose());
}

double chi2_divergence(const Povm& m, const CMat& rho, const CMat& rho0) {
  RVec p = outcome_probs(m, rho);
  RVec p0 = outcome_probs(m, rho0);
  double acc = 0;
  for (Eigen::Index x = 0; x < p.size(); x++) {
    if (p0[x] <= kZeroProb) {
      if (p[x] <= kZeroProb) continue;
      throw Error(ErrorCode::kSupportViolation, "outcome " + std::to_string(x) + " is impossible under rho0");
    }
    double r = p[x] - p0[x];
    acc += r * r / p0[x];
  }
  return acc;
}

FisherInfo c_copy_fim(const StateModel& model, const Povm& m) {
  require(m.dim() == model.dim(), ErrorCode::kDimensionMismatch, "POVM local dimension differs from model");
  const int c = m.copies();
  const CMat& rho0 = model.rho0().mat();
  std::vector<CMat> lifted;
  for (const auto& r : model.basis().all()) {
    CMat sum = CMat::Zero(m.total_dim(), m.total_dim());
    for (int i = 0; i < c; i++) sum += embed_at(r, rho0, c, i);
    lifted.push_back(sum);
  }
  CMat joint = embed_at(rho0, rho0, c, 0);
  // Scores use the single-copy 1/d derivative, not 1/d^c.
  const double d = model.dim();
  RMat scores(m.size(), lifted.size());
  for (size_t x = 0; x < m.size(); x++) {
    for (size_t k = 0; k < lifted.size(); k++) scores(x, k) = m.expectation(x, lifted[k]) / d;
  }
  FisherInfo info;
  info.root = weighted_root(scores, outcome_probs(m, joint), 1e-12 / d);
  RMat g = info.root.transpose() * info.root;
  info.matrix = 0.5 * (g + g.transpose());
  info.num_a = model.num_a();
  info.num_b = model.num_b();
  info.provenance = "c-copy povm copies=" + std::to_string(c);
  return info;
}

std::pair<double, double> c_copy_first_order_check(const Povm& m, const StateModel& model, const RVec& theta,
                                                   const RVec& phi) {
  require(theta.size() == model.num_a() && phi.size() == model.num_b(), ErrorCode::kDimensionMismatch,
          "parameter sizes do not match model");
  const int c = m.copies();
  const double d = model.dim();
  const CMat& rho0 = model.rho0().mat();
  CMat a = CMat::Zero(model.dim(), model.dim());
  for (int k = 0; k < model.num_a(); k++) a += (theta[k] / d) * model.basis().q[k];
  for (int k = 0; k < model.num_b(); k++) a += (phi[k] / d) * model.basis().t[k];
  CMat lifted = embed_at(a, rho0, c, 0);
  CMat joint = embed_at(rho0, rho0, c, 0);
  double lhs = 0;
  for (size_t s = 0; s < m.size(); s++) {
    double p = m.expectation(s, joint);
    double num = m.expectation(s, lifted);
    if (p <= kZeroProb) continue;
    lhs += num * num / p;
  }
  Povm g = reduce_c_copy(m, model.rho0(), 0);
  RVec v = stack(theta, phi);
  double rhs = v.dot(fim(model, g).matrix * v);
  return {lhs, rhs};
}

double c_copy_domination_margin(const Povm& m, const StateModel& model) {
  const double c = m.copies();
  Povm g = mixed_reduction(m, model.rho0());
  RMat diff = c * c * fim(model, g).matrix - c_copy_fim(model, m).matrix;
  return sym_min_eigenvalue(diff);
}

bool c_copy_domination_check(const Povm& m, const StateModel& model) {
  return c_copy_domination_margin(m, model) >= -1e-8;
}

int adaptive_depth(const AdaptiveNode& root) {
  if (root.children.empty()) return 1;
  if (root.children.size() != root.povm.size()) {
    throw Error(ErrorCode::kInvalidTree, "node needs one child per outcome");
  }
  int depth = adaptive_depth(root.children[0]);
  for (const auto& ch : root.children) {
    if (adaptive_depth(ch) != depth) throw Error(ErrorCode::kInvalidTree, "leaves at different depths");
  }
  return depth + 1;
}

namespace {

void flatten_into(const AdaptiveNode& node, const CMat& rho0, double p_hist, int n, std::vector<CMat>& factors,
                  std::vector<std::string>& labels, const std::string& prefix) {
  require(node.povm.copies() == 1 && node.povm.total_dim() == rho0.rows(), ErrorCode::kInvalidTree,
          "adaptive nodes must hold single-copy POVMs on the state dimension");
  RVec probs = outcome_probs(node.povm, rho0);
  if (!node.branch_probs.empty()) {
    if (node.branch_probs.size() != node.povm.size()) {
      throw Error(ErrorCode::kInvalidTree, "branch probability count differs from outcomes");
    }
    for (size_t x = 0; x < node.povm.size(); x++) {
      if (std::abs(node.branch_probs[x] - probs[x]) > 1e-9) {
        throw Error(ErrorCode::kInvalidTree, "branch probability does not match rho0 at " + prefix);
      }
    }
  }
  const double w = std::sqrt(p_hist / n);
  for (size_t x = 0; x < node.povm.size(); x++) {
    factors.push_back(w * node.povm.factor(x));
    labels.push_back(prefix + node.povm.labels()[x]);
  }
  for (size_t x = 0; x < node.children.size(); x++) {
    flatten_into(node.children[x], rho0, p_hist * probs[x], n, factors, labels,
                 prefix + node.povm.labels()[x] + "/");
  }
}

struct PathStep {
  double p;
  RVec score;
};

void leaf_fim(const AdaptiveNode& node, const std::vector<CMat>& ops, const CMat& rho0, std::vector<PathStep>& path,
              RMat& acc) {
  const double d = rho0.rows();
  for (size_t x = 0; x < node.povm.size(); x++) {
    PathStep step{std::max(0.0, node.povm.expectation(x, rho0)), RVec(ops.size())};
    for (size_t c = 0; c < ops.size(); c++) step.score[c] = node.povm.expectation(x, ops[c]) / d;
    path.push_back(step);
    if (node.children.empty()) {
      double p = 1;
      for (const auto& s : path) p *= s.p;
      RVec grad = RVec::Zero(ops.size());
      for (size_t r = 0; r < path.size(); r++) {
        double others = 1;
        for (size_t r2 = 0; r2 < path.size(); r2++) {
          if (r2 != r) others *= path[r2].p;
        }
        grad += others * path[r].score;
      }
      if (p > kZeroProb) {
        acc += grad * grad.transpose() / p;
      } else if (grad.size() && grad.cwiseAbs().maxCoeff() > 1e-12 / d) {
        throw Error(ErrorCode::kSingularOutcome, "adaptive leaf has zero probability but nonzero score");
      }
    } else {
      leaf_fim(node.children[x], ops, rho0, path, acc);
    }
    path.pop_back();
  }
}

}  // namespace

Povm flatten_adaptive(const AdaptiveNode& root, const DensityMatrix& rho0) {
  const int n = adaptive_depth(root);
  std::vector<CMat> factors;
  std::vector<std::string> labels;
  flatten_into(root, rho0.mat(), 1.0, n, factors, labels, "");
  return Povm(root.povm.dim(), 1, std::move(factors), std::move(labels));
}

FisherInfo adaptive_fim(const StateModel& model, const AdaptiveNode& root) {
  adaptive_depth(root);
  auto ops = model.basis().all();
  RMat acc = RMat::Zero(ops.size(), ops.size());
  std::vector<PathStep> path;
  leaf_fim(root, ops, model.rho0().mat(), path, acc);
  FisherInfo info;
  info.matrix = 0.5 * (acc + acc.transpose());
  info.num_a = model.num_a();
  info.num_b = model.num_b();
  info.provenance = "adaptive tree";
  return info;
}

}  // namespace fshadow
