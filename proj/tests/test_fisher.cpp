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

#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "fshadow/error.hpp"
#include "fshadow/experiments.hpp"
#include "fshadow/fisher.hpp"

using namespace fshadow;

namespace {

StateModel pauli_model(const std::vector<std::string>& labels, const CMat& rho0) {
  return StateModel(DensityMatrix(rho0), pauli_observables(labels));
}

RVec random_vec(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g;
  RVec v(n);
  for (int i = 0; i < n; i++) v[i] = scale * g(rng);
  return v;
}

// Scales (theta, phi) until the parameterized operator is a state.
RVec shrink_to_valid(const StateModel& model, RVec v) {
  while (!is_valid_state(parameterize(model, v.head(model.num_a()), v.tail(model.num_b())))) v *= 0.5;
  return v;
}

// FIM from central differences of an arbitrary linear-or-quadratic probability map.
RMat fim_by_differences(const std::function<RVec(const RVec&)>& probs, int n) {
  const double h = 1e-3;
  RVec p0 = probs(RVec::Zero(n));
  RMat grad(p0.size(), n);
  for (int c = 0; c < n; c++) {
    RVec e = RVec::Zero(n);
    e[c] = h;
    grad.col(c) = (probs(e) - probs(-e)) / (2 * h);
  }
  RMat out = RMat::Zero(n, n);
  for (Eigen::Index x = 0; x < p0.size(); x++) {
    if (p0[x] > 1e-14) out += grad.row(x).transpose() * grad.row(x) / p0[x];
  }
  return out;
}

CMat rho_at(const StateModel& model, const RVec& v) {
  return parameterize(model, v.head(model.num_a()), v.tail(model.num_b())).mat();
}

}  // namespace

TEST_CASE("computational measurement on a qubit sees only Z") {
  StateModel model = pauli_model({"Z", "X", "Y"}, CMat::Identity(2, 2) / 2.0);
  FisherInfo info = fim(model, computational_povm(2));
  RMat expect = RMat::Zero(3, 3);
  expect(0, 0) = 1;
  CHECK((info.matrix - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(info.num_a == 3);
  CHECK(info.num_b == 0);
}

TEST_CASE("fim agrees with finite differences of outcome probabilities") {
  std::mt19937_64 rng(5);
  for (int d : {2, 3}) {
    for (int it = 0; it < 10; it++) {
      int m = 1 + static_cast<int>(rng() % (d * d - 1));
      StateModel model(DensityMatrix(random_density(d, rng, 0.05)), random_observables(d, m, rng));
      Povm povm = random_joint_povm(d, 1, d + 2, rng());
      RMat oracle = fim_by_differences([&](const RVec& v) { return outcome_probs(povm, rho_at(model, v)); },
                                       d * d - 1);
      RMat info = fim(model, povm).matrix;
      CHECK((info - oracle).cwiseAbs().maxCoeff() <= 1e-7 * (1 + oracle.cwiseAbs().maxCoeff()));
      CHECK((info - info.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(sym_min_eigenvalue(info) >= -1e-9);
    }
  }
}

TEST_CASE("scaled convention differs by d^2") {
  std::mt19937_64 rng(8);
  StateModel model(DensityMatrix(random_density(3, rng, 0.05)), random_observables(3, 2, rng));
  Povm povm = random_joint_povm(3, 1, 5, 2);
  RMat a = fim(model, povm).matrix;
  RMat b = fim(model, povm, FimConvention::kScaled).matrix;
  CHECK((b - 9.0 * a).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("haar proxy fim is PSD and bounded by the closed form") {
  for (int d : {2, 4}) {
    StateModel model(DensityMatrix::maximally_mixed(d), pauli_observables(d == 2 ? 1 : 2));
    RMat info = fim(model, finite_haar_proxy(d, 50 * d * d, 13)).matrix;
    CHECK(sym_min_eigenvalue(info) >= -1e-9);
    CHECK(info.trace() <= (d * d - 1) * (1.0 / (d + 1)) * 1.05);
  }
}

TEST_CASE("fim is additive over POVM mixtures") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 10; it++) {
    StateModel model(DensityMatrix(random_density(2, rng, 0.05)), random_observables(2, 2, rng));
    Povm a = random_joint_povm(2, 1, 3, rng());
    Povm b = random_joint_povm(2, 1, 4, rng());
    RMat mixed = fim(model, mix_povms(a, b, 0.5)).matrix;
    RMat sum = 0.5 * fim(model, a).matrix + 0.5 * fim(model, b).matrix;
    CHECK((mixed - sum).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("zero-probability outcomes") {
  CMat pure = CMat::Zero(2, 2);
  pure(0, 0) = 1;
  FimEngine along_x({pauli_string("X")}, 1, computational_povm(2));
  CHECK(along_x.at(pure).matrix.norm() < 1e-15);
  FimEngine along_z({pauli_string("Z")}, 1, computational_povm(2));
  try {
    along_z.at(pure);
    FAIL("expected SingularOutcome");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingularOutcome);
  }
}

TEST_CASE("schur restriction and C1") {
  std::mt19937_64 rng(23);
  // No nuisance block: the restriction is the plain inverse.
  RMat spd = random_spd(3, rng);
  FisherInfo full{spd, 3, 0, ""};
  SchurRestriction r = schur_restriction(full);
  CHECK((r.matrix - spd.inverse()).cwiseAbs().maxCoeff() <= 1e-10 * spd.inverse().cwiseAbs().maxCoeff());
  CHECK(r.support_rank == 3);

  // Already block diagonal: C1 vanishes.
  RMat bd = RMat::Zero(4, 4);
  bd.topLeftCorner(2, 2) = random_spd(2, rng);
  bd.bottomRightCorner(2, 2) = random_spd(2, rng);
  CHECK(block_diag_C1(FisherInfo{bd, 2, 2, ""}).cwiseAbs().maxCoeff() == 0.0);

  for (int it = 0; it < 20; it++) {
    int n = 3 + it % 6;
    int na = 1 + it % (n - 1);
    FisherInfo info{random_spd(n, rng), na, n - na, ""};
    RMat c1 = block_diag_C1(info);
    RMat j = RMat::Identity(n, n);
    j.bottomLeftCorner(n - na, na) = c1;
    RMat moved = j.transpose() * info.matrix * j;
    CHECK(moved.topRightCorner(na, n - na).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((transform_fim(info, c1, RMat::Identity(n - na, n - na)) - moved).cwiseAbs().maxCoeff() <= 1e-9);
    // The restriction is the AA block of the inverse.
    RMat inv = info.matrix.inverse();
    CHECK((schur_restriction(info).matrix - inv.topLeftCorner(na, na)).cwiseAbs().maxCoeff() <=
          1e-8 * (1 + inv.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("schur restriction is invariant under admissible basis changes") {
  std::mt19937_64 rng(29);
  for (int it = 0; it < 20; it++) {
    int d = 2 + it % 2;
    int n = d * d - 1;
    int m = 1 + static_cast<int>(rng() % (n - 1));
    StateModel model(DensityMatrix(random_density(d, rng, 0.05)), random_observables(d, m, rng));
    Povm povm = random_joint_povm(d, 1, d * d + 1, rng());
    RMat base = schur_restriction(fim(model, povm)).matrix;
    RMat c1 = RMat::Random(n - m, m);
    RMat c2 = RMat::Random(n - m, n - m) + 3.0 * RMat::Identity(n - m, n - m);
    StateModel moved(model.rho0(), model.observables(), basis_transform(model.basis(), c1, c2));
    RMat other = schur_restriction(fim(moved, povm)).matrix;
    CHECK((base - other).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, base.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("chi-square divergence") {
  StateModel model = pauli_model({"Z"}, CMat::Identity(2, 2) / 2.0);
  Povm comp = computational_povm(2);
  CHECK(chi2_divergence(comp, model.rho0(), model.rho0()) == 0.0);
  CMat rho = rho_at(model, (RVec(3) << 0.3, 0, 0).finished());
  CHECK(chi2_divergence(comp, rho, model.rho0().mat()) == doctest::Approx(0.09).epsilon(1e-12));

  CMat pure = CMat::Zero(2, 2);
  pure(0, 0) = 1;
  try {
    chi2_divergence(comp, CMat(CMat::Identity(2, 2) / 2.0), pure);
    FAIL("expected SupportViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSupportViolation);
  }
  // Outcomes impossible under both states are skipped.
  CHECK(chi2_divergence(comp, pure, pure) == 0.0);
}

TEST_CASE("chi-square equals the FIM quadratic form along the linear family") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 30; it++) {
    int d = 2 + it % 3;
    int n = d * d - 1;
    int m = 1 + static_cast<int>(rng() % n);
    StateModel model(DensityMatrix(random_density(d, rng, 0.05)), random_observables(d, m, rng));
    Povm povm = random_joint_povm(d, 1, d + 3, rng());
    RVec v = shrink_to_valid(model, random_vec(n, rng, 0.1));
    double quad = v.dot(fim(model, povm).matrix * v);
    double chi2 = chi2_divergence(povm, rho_at(model, v), model.rho0().mat());
    CHECK(std::abs(chi2 - quad) <= 1e-9 * std::max(quad, 1e-12));
  }
}

TEST_CASE("mixing with the maximally mixed state at most doubles the FIM") {
  std::mt19937_64 rng(37);
  for (int it = 0; it < 30; it++) {
    int d = 2 + it % 2;
    int n = d * d - 1;
    CMat sigma = random_density(d, rng, 0.01);
    ObservableSet obs = random_observables(d, 1 + static_cast<int>(rng() % n), rng);
    Povm povm = random_joint_povm(d, 1, d + 2, rng());
    StateModel at_sigma{DensityMatrix(sigma), obs};
    StateModel at_mixed{mix_with_maximally_mixed(DensityMatrix(sigma)), obs};
    RMat a = fim(at_mixed, povm).matrix;
    RMat b = fim(at_sigma, povm).matrix;
    RVec v = random_vec(n, rng, 1.0);
    CHECK(v.dot(a * v) <= 2 * v.dot(b * v) + 1e-9);
    CHECK(sym_min_eigenvalue(2 * b - a) >= -1e-9);
  }
}

TEST_CASE("c-copy first-order identity") {
  std::mt19937_64 rng(41);
  // Product measurement: explicit evaluation of both sides.
  StateModel model(DensityMatrix(random_density(2, rng, 0.05)), random_observables(2, 2, rng));
  Povm prod = tensor_product(sic_d2(), computational_povm(2));
  RVec v = random_vec(3, rng, 0.1);
  auto [lhs, rhs] = c_copy_first_order_check(prod, model, v.head(2), v.tail(1));
  CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs));
  // For a product the reduction is M1 reweighted by tr(M2 rho0), which sums to M1.
  RMat direct = fim(model, sic_d2()).matrix;
  CHECK(std::abs(rhs - v.dot(direct * v)) <= 1e-12);

  for (int it = 0; it < 20; it++) {
    Povm joint = random_joint_povm(2, 2, 4, rng());
    RVec w = random_vec(3, rng, 0.2);
    auto [l, r] = c_copy_first_order_check(joint, model, w.head(2), w.tail(1));
    CHECK(std::abs(l - r) <= 1e-9 * std::max(1.0, r));
  }
  auto [z1, z2] = c_copy_first_order_check(prod, model, RVec::Zero(2), RVec::Zero(1));
  CHECK(z1 == 0.0);
  CHECK(z2 == 0.0);
}

TEST_CASE("c-copy FIM matches differences of the joint distribution") {
  std::mt19937_64 rng(43);
  StateModel model(DensityMatrix(random_density(2, rng, 0.05)), random_observables(2, 1, rng));
  Povm joint = random_joint_povm(2, 2, 5, 3);
  RMat oracle = fim_by_differences(
      [&](const RVec& v) {
        CMat r = rho_at(model, v);
        return outcome_probs(joint, kron(r, r));
      },
      3);
  RMat info = c_copy_fim(model, joint).matrix;
  CHECK((info - oracle).cwiseAbs().maxCoeff() <= 1e-6 * (1 + oracle.cwiseAbs().maxCoeff()));
}

TEST_CASE("c-copy domination") {
  std::mt19937_64 rng(47);
  StateModel single(DensityMatrix(random_density(2, rng, 0.05)), random_observables(2, 2, rng));
  Povm one = random_joint_povm(2, 1, 4, 9);
  CHECK(std::abs(c_copy_domination_margin(one, single)) <= 1e-9);
  CHECK(c_copy_domination_check(one, single));
  for (int it = 0; it < 50; it++) {
    StateModel model(DensityMatrix(random_density(2, rng, 0.02)), random_observables(2, 1 + it % 3, rng));
    CHECK(c_copy_domination_check(random_joint_povm(2, 2, 2 + it % 5, rng()), model));
  }
  StateModel half(DensityMatrix::maximally_mixed(2), pauli_observables(1));
  CHECK(c_copy_domination_check(bell_basis_povm(), half));
}

TEST_CASE("adaptive strategies flatten to a single-copy POVM") {
  StateModel model(DensityMatrix::maximally_mixed(2), pauli_observables(1));
  Povm x_basis = Povm::from_elements(2, 1, {(CMat::Identity(2, 2) + pauli_string("X")) / 2.0,
                                            (CMat::Identity(2, 2) - pauli_string("X")) / 2.0});
  Povm y_basis = Povm::from_elements(2, 1, {(CMat::Identity(2, 2) + pauli_string("Y")) / 2.0,
                                            (CMat::Identity(2, 2) - pauli_string("Y")) / 2.0});
  Povm z_basis = computational_povm(2);

  AdaptiveNode leaf{z_basis, {}, {}};
  CHECK(adaptive_depth(leaf) == 1);
  Povm flat1 = flatten_adaptive(leaf, model.rho0());
  REQUIRE(flat1.size() == 2);
  for (size_t x = 0; x < 2; x++) CHECK((flat1.element(x) - z_basis.element(x)).norm() < 1e-15);

  // X first, then Z after "+" and Y after "-".
  AdaptiveNode tree{x_basis, {0.5, 0.5}, {AdaptiveNode{z_basis, {}, {}}, AdaptiveNode{y_basis, {}, {}}}};
  CHECK(adaptive_depth(tree) == 2);
  RMat joint = adaptive_fim(model, tree).matrix;
  RMat flat = fim(model, flatten_adaptive(tree, model.rho0())).matrix;
  CHECK((joint - 2.0 * flat).cwiseAbs().maxCoeff() <= 1e-9);
  // Hand enumeration of the four leaves: X is seen twice as often as Z or Y per round.
  RMat hand = RMat::Zero(3, 3);
  hand(0, 0) = 1;    // X on round one
  hand(1, 1) = 0.5;  // Y on half the branches
  hand(2, 2) = 0.5;  // Z on the other half
  CHECK((joint - hand).cwiseAbs().maxCoeff() <= 1e-9);

  // Second round independent of the first: the FIM adds.
  AdaptiveNode indep{x_basis, {}, {AdaptiveNode{z_basis, {}, {}}, AdaptiveNode{z_basis, {}, {}}}};
  RMat sum = fim(model, x_basis).matrix + fim(model, z_basis).matrix;
  RMat indep_joint = adaptive_fim(model, indep).matrix;
  CHECK((indep_joint - sum).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((indep_joint - 2.0 * fim(model, flatten_adaptive(indep, model.rho0())).matrix).cwiseAbs().maxCoeff() <=
        1e-12);

  AdaptiveNode wrong{x_basis, {0.9, 0.1}, {AdaptiveNode{z_basis, {}, {}}, AdaptiveNode{y_basis, {}, {}}}};
  try {
    flatten_adaptive(wrong, model.rho0());
    FAIL("expected InvalidTree");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidTree);
  }
  AdaptiveNode ragged{x_basis, {}, {AdaptiveNode{z_basis, {}, {}}}};
  CHECK_THROWS_AS(adaptive_depth(ragged), Error);
}

TEST_CASE("depth-three adaptive trees on random states") {
  std::mt19937_64 rng(53);
  for (int it = 0; it < 5; it++) {
    StateModel model(DensityMatrix(random_density(2, rng, 0.05)), random_observables(2, 2, rng));
    std::function<AdaptiveNode(int)> build = [&](int depth) {
      AdaptiveNode node{random_joint_povm(2, 1, 2 + static_cast<int>(rng() % 2), rng()), {}, {}};
      if (depth > 1) {
        for (size_t x = 0; x < node.povm.size(); x++) node.children.push_back(build(depth - 1));
      }
      return node;
    };
    AdaptiveNode root = build(3);
    RMat joint = adaptive_fim(model, root).matrix;
    RMat flat = fim(model, flatten_adaptive(root, model.rho0())).matrix;
    CHECK((joint - 3.0 * flat).cwiseAbs().maxCoeff() <= 1e-8);
  }
}
