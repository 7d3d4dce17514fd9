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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fshadow/estimation.hpp"
#include "fshadow/experiments.hpp"
#include "fshadow/fisher.hpp"
#include "fshadow/gamma.hpp"

using namespace fshadow;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) failures++;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Random (theta, phi) with rho_{theta,phi} a valid state.
RVec random_valid_params(const StateModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const int n = model.num_a() + model.num_b();
  RVec v(n);
  for (int i = 0; i < n; i++) v[i] = g(rng);
  v *= std::uniform_real_distribution<double>(0.01, 0.5)(rng);
  while (!is_valid_state(parameterize(model, v.head(model.num_a()), v.tail(model.num_b())))) v *= 0.5;
  return v;
}

CMat neighbourhood_point(const CMat& rho0, std::mt19937_64& rng) {
  const int d = static_cast<int>(rho0.rows());
  CMat sigma = random_density(d, rng);
  double t = std::uniform_real_distribution<double>(0, 1)(rng);
  CMat rho = (1 - t) * rho0 + t * sigma;
  while (!in_neighborhood(rho, rho0)) {
    t *= 0.5;
    rho = (1 - t) * rho0 + t * sigma;
  }
  return rho;
}

void chi2_exactness() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int it = 0; it < 200; it++) {
    const int d = 2 + it % 3;
    const int n = d * d - 1;
    const int m = 1 + static_cast<int>(rng() % n);
    StateModel model(DensityMatrix(random_density(d, rng, 0.02)), random_observables(d, m, rng));
    Povm povm = random_joint_povm(d, 1, d * d + static_cast<int>(rng() % 4), rng());
    RVec v = random_valid_params(model, rng);
    CMat rho = parameterize(model, v.head(m), v.tail(n - m)).mat();
    RVec p = outcome_probs(povm, rho), p0 = outcome_probs(povm, model.rho0());
    double chi2 = 0;
    for (Eigen::Index x = 0; x < p.size(); x++) chi2 += std::pow(p[x] - p0[x], 2) / p0[x];
    double quad = v.dot(fim(model, povm).matrix * v);
    worst = std::max(worst, std::abs(chi2 - quad) / quad);
  }
  double secs = seconds_since(t0);
  report(1, "chi-square exactness", worst <= 1e-9 && secs < 10,
         "200 instances, max relative deviation " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs));
}

void duality() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  double worst = 0;
  const std::vector<std::pair<double, double>> pairs{{2, 2}, {kInf, 1}, {1, kInf}};
  for (int it = 0; it < 200; it++) {
    int n = 2 + static_cast<int>(rng() % 14);
    int na = 1 + static_cast<int>(rng() % n);
    FisherInfo info{random_spd(n, rng), na, n - na, ""};
    RMat restriction = schur_restriction(info).matrix;
    for (auto [p, q] : pairs) {
      double lo = dual_min_over_p_sphere(info, p, it).value;
      double hi = quad_max_over_q_ball(restriction, q, it).value;
      worst = std::max(worst, std::abs(lo * hi - 1));
    }
  }
  double secs = seconds_since(t0);
  report(2, "duality", worst <= 1e-6 && secs < 30,
         "200 FIMs x 3 norm pairs, max |product - 1| " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs));
}

void basis_invariance() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> g;
  double worst = 0;
  int transforms = 0;
  for (int it = 0; it < 20; it++) {
    const int d = 2 + it % 2;
    const int n = d * d - 1;
    const int m = 1 + static_cast<int>(rng() % (n - 1));
    StateModel model(DensityMatrix(random_density(d, rng, 0.02)), random_observables(d, m, rng));
    Povm povm = random_joint_povm(d, 1, d * d + 2, rng());
    RMat base = schur_restriction(fim(model, povm)).matrix;
    for (int t = 0; t < 50; t++, transforms++) {
      RMat c1(n - m, m), c2(n - m, n - m);
      for (int i = 0; i < n - m; i++) {
        for (int j = 0; j < m; j++) c1(i, j) = g(rng);
        for (int j = 0; j < n - m; j++) c2(i, j) = g(rng) + (i == j ? 3.0 : 0.0);
      }
      StateModel moved(model.rho0(), model.observables(), basis_transform(model.basis(), c1, c2));
      RMat other = schur_restriction(fim(moved, povm)).matrix;
      worst = std::max(worst, (base - other).cwiseAbs().maxCoeff() / std::max(1.0, base.cwiseAbs().maxCoeff()));
    }
  }
  report(3, "basis invariance", worst <= 1e-8,
         std::to_string(transforms) + " transforms over 20 instances, max entrywise deviation " + fmt("%.3g", worst));
}

void local_estimator() {
  std::mt19937_64 rng(404);
  double bias = 0, origin = 0, psd = 0;
  int points = 0;
  for (int it = 0; it < 10; it++) {
    const int d = 2 + it % 2;
    const int m = 1 + static_cast<int>(rng() % (d * d - 1));
    StateModel model(DensityMatrix(random_density(d, rng, 0.05)), random_observables(d, m, rng));
    LocalEstimator est = build_local_estimator(model, random_joint_povm(d, 1, d * d + 1, rng()));
    RMat s = est.restriction().matrix;
    origin = std::max(origin, (msem_exact(est, model.rho0()) - s).cwiseAbs().maxCoeff());
    for (int k = 0; k < 100; k++, points++) {
      CMat rho = neighbourhood_point(model.rho0().mat(), rng);
      RVec theta = extract_params(model, rho).theta;
      bias = std::max(bias, (est.coeffs() * outcome_probs(est.povm(), rho) - theta).cwiseAbs().maxCoeff());
      psd = std::max(psd, -sym_min_eigenvalue(2 * s - msem_exact(est, rho)));
    }
  }
  bool pass = bias <= 1e-10 && origin <= 1e-9 && psd <= 1e-9;
  report(4, "local estimator", pass,
         std::to_string(points) + " neighbourhood points: max bias " + fmt("%.3g", bias) + ", |V(rho0) - S| " +
             fmt("%.3g", origin) + ", worst 2S - V eigenvalue " + fmt("%.3g", -psd));
}

void gamma_relations() {
  std::mt19937_64 rng(505);
  const std::vector<double> ps{1.0, 1.5, 2.0, 3.0};
  double excess = 0, gap = 0;
  for (int it = 0; it < 200; it++) {
    const int d = 2 + it % 2;
    const int m = 1 + static_cast<int>(rng() % (d * d - 1));
    StateModel model(DensityMatrix(random_density(d, rng, 0.05)), random_observables(d, m, rng));
    SchurRestriction r = schur_restriction(fim(model, random_joint_povm(d, 1, d * d + 1, rng())));
    double p = ps[it % ps.size()];
    double ob = gamma_from_restriction(r, p, Variant::kOb);
    double full = gamma_from_restriction(r, p, Variant::kFull);
    excess = std::max(excess, (ob - full) / full);
    double ob_inf = gamma_from_restriction(r, kInf, Variant::kOb);
    double full_inf = gamma_from_restriction(r, kInf, Variant::kFull);
    gap = std::max(gap, std::abs(ob_inf - full_inf) / full_inf);
  }
  report(5, "gamma relations", excess <= 1e-12 && gap <= 1e-10,
         "200 instances: max relative excess of ob over full " + fmt("%.3g", excess) + ", p = inf gap " +
             fmt("%.3g", gap));
}

void tomography() {
  std::mt19937_64 pick(606);
  int good = 0, neighbourhood_ok = 0;
  for (int t = 0; t < 100; t++) {
    DensityMatrix rho = mix_with_maximally_mixed(DensityMatrix(random_density(2, pick)));
    std::mt19937_64 rng = substream(6060, t);
    std::vector<CVec> samples;
    samples.reserve(4000);
    for (int i = 0; i < 4000; i++) samples.push_back(sample_haar_measurement_outcome(rho, rng));
    CMat raw = coarse_tomography(samples, 2);
    if (operator_norm(raw - rho.mat()) <= 0.125) {
      good++;
      neighbourhood_ok += in_neighborhood(rho.mat(), regularize_estimate(raw).mat());
    }
  }
  report(6, "coarse tomography", good >= 90 && neighbourhood_ok == good,
         std::to_string(good) + "/100 within 1/8 in operator norm; neighbourhood holds in " +
             std::to_string(neighbourhood_ok) + "/" + std::to_string(good));
}

// Algorithm 1 on a qubit. Per-seed first phases are reused across N1 so the
// success rate is computed with common random numbers.
struct QubitRuns {
  ShadowConfig cfg;
  DensityMatrix rho;
  std::vector<PreparedRun> prepared;
  std::vector<uint64_t> seeds;

  QubitRuns(uint64_t first_seed, int trials) : rho(DensityMatrix::maximally_mixed(2)) {
    cfg.obs = pauli_observables(1);
    cfg.measurement = pauli_basis_uniform(1);
    cfg.p = kInf;
    cfg.delta = 0.1;
    cfg.n0 = 4000;
    CMat r = 0.5 * (CMat::Identity(2, 2) + 0.2 * pauli_string("X") - 0.1 * pauli_string("Y") +
                    0.4 * pauli_string("Z"));
    rho = DensityMatrix(r);
    for (int t = 0; t < trials; t++) {
      seeds.push_back(first_seed + t);
      cfg.seed = seeds.back();
      prepared.push_back(prepare_run(cfg, rho));
    }
  }

  double success_rate(double eps, size_t n1) {
    int ok = 0;
    for (size_t t = 0; t < prepared.size(); t++) {
      ShadowConfig c = cfg;
      c.seed = seeds[t];
      c.epsilon = eps;
      c.n1 = n1;
      ok += finish_shadow_tomography(c, prepared[t], rho).success;
    }
    return static_cast<double>(ok) / prepared.size();
  }

  // Smallest N1 on a 2% geometric grid reaching the target rate.
  size_t minimal_n1(double eps, double target) {
    size_t lo = 50, hi = 50;
    while (success_rate(eps, hi) < target) {
      lo = hi;
      hi *= 2;
      if (hi > 2000000) return 0;
    }
    while (static_cast<double>(hi) / lo > 1.02) {
      size_t mid = static_cast<size_t>(std::sqrt(static_cast<double>(lo) * hi));
      if (success_rate(eps, mid) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
};

void end_to_end() {
  auto t0 = Clock::now();
  const std::vector<double> eps{0.1, 0.05};
  QubitRuns pilot(70000, 100);
  // Ratio law from the minimal budgets reaching 90% on the pilot seeds.
  std::vector<size_t> n90;
  for (double e : eps) n90.push_back(pilot.minimal_n1(e, 0.9));
  // Frozen budget constant: N1 = C / eps^2, calibrated at a 96% pilot rate.
  double c = 0;
  for (double e : eps) c = std::max(c, pilot.minimal_n1(e, 0.96) * e * e);
  QubitRuns fresh(80000, 100);
  std::string detail;
  bool pass = n90[0] > 0 && n90[1] > 0;
  for (double e : eps) {
    size_t budget = static_cast<size_t>(std::ceil(c / (e * e)));
    double rate = fresh.success_rate(e, budget);
    pass = pass && rate >= 0.9;
    detail += "eps " + fmt("%.3g", e) + ": N1 = " + std::to_string(budget) + ", fresh success " + fmt("%.2f", rate) +
              "; ";
  }
  double ratio = n90[0] > 0 ? static_cast<double>(n90[1]) / n90[0] : 0;
  pass = pass && ratio >= 3 && ratio <= 6;
  double secs = seconds_since(t0);
  pass = pass && secs < 300;
  report(7, "end-to-end shadow tomography", pass,
         detail + "N(eps/2)/N(eps) = " + std::to_string(n90[1]) + "/" + std::to_string(n90[0]) + " = " +
             fmt("%.2f", ratio) + ", " + fmt("%.1f s", secs));
}

void pauli_closed_forms() {
  bool pass = true;
  double worst = 0;
  std::string detail;
  const std::vector<double> ps{1.0, 1.5, 2.0, 3.0, kInf};
  for (int n : {1, 2}) {
    const int d = 1 << n;
    ObservableSet paulis = pauli_observables(n);
    auto grid = s_half_grid(d, 808);
    SearchBudget inner;
    inner.max_evaluations = 200;
    inner.restarts = 2;
    GammaReport winner =
        inf_over_M(paulis, kInf, Variant::kOb, PovmFamily::kCatalog, Rho0Domain::kHalf, inner, SearchBudget{});
    const Povm& mstar = *winner.povm;
    for (double p : ps) {
      double q = conjugate_exponent(p);
      double formula = std::pow(d * d - 1.0, std::isinf(q) ? 0.0 : -1.0 / q) / 6.0;
      double eta = threshold_eta_ob(paulis, p, grid, mstar);
      worst = std::max(worst, std::abs(eta - formula));
      if (d == 2 && std::isinf(p)) {
        bool exact = std::abs(eta - 1.0 / 18) <= 1e-15;
        pass = pass && exact;
        detail += "eta_ob(inf, 2) = " + fmt("%.17g", eta) + "; ";
      }
      double a = threshold_a_max(paulis, p, grid, mstar, 9);
      double bound = p < 2 ? 2.0 : 2.0 * std::pow(d, std::isinf(p) ? 2.0 : 2.0 - 4.0 / p);
      if (a > bound + 1e-9) {
        pass = false;
        detail += "a_max(" + fmt("%g", p) + ", " + std::to_string(d) + ") = " + fmt("%.6g", a) + " > " +
                  fmt("%.6g", bound) + "; ";
      }
    }
  }
  pass = pass && worst <= 1e-12;
  report(8, "Pauli closed forms", pass, detail + "max |eta_ob - formula| " + fmt("%.3g", worst) + ", a_max bounds hold");
}

void pauli_scaling() {
  std::vector<double> values;
  std::string detail;
  bool pass = true;
  SearchBudget budget;
  budget.max_evaluations = 400;
  budget.restarts = 2;
  for (int n : {1, 2, 3}) {
    const int d = 1 << n;
    Povm proxy = finite_haar_proxy(d, 50 * d * d, 1);
    GammaReport r = sup_over_rho0(pauli_observables(n), proxy, 2, Variant::kOb, Rho0Domain::kFullRank, budget);
    values.push_back(r.value);
    bool in = r.value >= 0.5 * d && r.value <= 6.0 * d * std::log(static_cast<double>(d));
    pass = pass && in;
    detail += "d=" + std::to_string(d) + ": " + fmt("%.4g", r.value) + (in ? "" : " (outside bracket)") + "; ";
  }
  for (size_t i = 1; i < values.size(); i++) {
    double ratio = values[i] / values[i - 1];
    pass = pass && ratio >= 1.5 && ratio <= 3;
    detail += "ratio " + fmt("%.3g", ratio) + (i + 1 < values.size() ? ", " : "");
  }
  report(9, "Pauli gamma scaling", pass, detail);
}

void c_copy() {
  std::mt19937_64 rng(1010);
  double first_order = 0, domination = 0;
  int instances = 0;
  for (int d : {2, 3}) {
    for (int it = 0; it < 50; it++, instances++) {
      const int m = 1 + static_cast<int>(rng() % (d * d - 1));
      StateModel model(DensityMatrix(random_density(d, rng, 0.02)), random_observables(d, m, rng));
      Povm joint = random_joint_povm(d, 2, 2 + static_cast<int>(rng() % 5), rng());
      RVec v = random_valid_params(model, rng);
      auto [lhs, rhs] = c_copy_first_order_check(joint, model, v.head(m), v.tail(d * d - 1 - m));
      first_order = std::max(first_order, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      domination = std::max(domination, -c_copy_domination_margin(joint, model));
    }
  }
  double flatten = 0;
  int trees = 0;
  std::function<AdaptiveNode(int)> build = [&](int depth) {
    AdaptiveNode node{random_joint_povm(2, 1, 2 + static_cast<int>(rng() % 2), rng()), {}, {}};
    if (depth > 1) {
      for (size_t x = 0; x < node.povm.size(); x++) node.children.push_back(build(depth - 1));
    }
    return node;
  };
  for (int depth = 1; depth <= 3; depth++) {
    for (int it = 0; it < 10; it++, trees++) {
      StateModel model(DensityMatrix(random_density(2, rng, 0.02)), random_observables(2, 1 + it % 3, rng));
      AdaptiveNode root = build(depth);
      RMat joint = adaptive_fim(model, root).matrix;
      RMat flat = depth * fim(model, flatten_adaptive(root, model.rho0())).matrix;
      flatten = std::max(flatten, (joint - flat).cwiseAbs().maxCoeff() / std::max(1.0, joint.cwiseAbs().maxCoeff()));
    }
  }
  bool pass = first_order <= 1e-9 && domination <= 1e-8 && flatten <= 1e-9;
  report(10, "c-copy identities", pass,
         std::to_string(instances) + " joint POVMs: first-order deviation " + fmt("%.3g", first_order) +
             ", worst domination eigenvalue " + fmt("%.3g", -domination) + "; " + std::to_string(trees) +
             " adaptive trees, flattening deviation " + fmt("%.3g", flatten));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{chi2_exactness, duality,           basis_invariance,
                                                    local_estimator, gamma_relations,  tomography,
                                                    end_to_end,      pauli_closed_forms, pauli_scaling,
                                                    c_copy};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion threw: %s\n", e.what());
      failures++;
    }
  }
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
