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
#include <vector>

#include "fshadow/error.hpp"
#include "fshadow/fisher.hpp"
#include "fshadow/linalg.hpp"
#include "fshadow/measurement.hpp"
#include "fshadow/operators.hpp"

namespace fshadow {

enum class Variant { kOb, kFull };
enum class Method { kExact, kExtremePoint, kMultistartAscent, kMultistartDescent, kSimplexSearch, kCatalog };
/// Which side of the true optimum a reported number lies on.
enum class BoundDirection { kExact, kLower, kUpper };
enum class Rho0Domain { kFullRank, kHalf };
enum class PovmFamily { kCatalog, kParameterized };

std::string to_string(Variant v);
std::string to_string(Method m);
std::string to_string(BoundDirection b);
std::string to_string(Rho0Domain d);

struct QuadMax {
  double value = 0;
  RVec alpha;
  Method method = Method::kExact;
  BoundDirection bound = BoundDirection::kExact;
};

/// max alpha^T R alpha over ||alpha||_q <= 1. Exact for q in {1, 2} and for
/// q = inf with m <= 20; otherwise a multistart lower bound.
QuadMax quad_max_over_q_ball(const RMat& r, double q, uint64_t seed = 0);

struct DualMin {
  double value = 0;
  RVec theta;
  /// Nuisance witness C1 theta.
  RVec phi;
  Method method = Method::kExact;
  BoundDirection bound = BoundDirection::kExact;
};

/// min over ||theta||_p = 1 and free phi of (theta, phi)^T I (theta, phi).
/// Exact for p = 2, for p = inf (per-face box QPs) and for p = 1 with m <= 16
/// (per-orthant simplex QPs); otherwise a multistart upper bound.
DualMin dual_min_over_p_sphere(const FisherInfo& info, double p, uint64_t seed = 0);

struct QpResult {
  RVec x;
  double value = 0;
  int iterations = 0;
};

/// Primal active-set method for min 1/2 x^T H x + c^T x subject to
/// lower <= x <= upper and, optionally, eq_row^T x = eq_rhs. H must be
/// positive definite and x0 feasible.
QpResult minimize_bounded_qp(const RMat& h, const RVec& c, const RVec& lower, const RVec& upper, const RVec& x0,
                             const RVec* eq_row = nullptr, double eq_rhs = 0);

/// Full: ||diag(R)^{1/2}||_p^2. Ob: max over the q-ball. +inf if R is not of full support.
double gamma_from_restriction(const SchurRestriction& r, double p, Variant variant, RVec* alpha = nullptr);
double gamma_for_fixed(const StateModel& model, const Povm& m, double p, Variant variant);

struct SearchBudget {
  int max_evaluations = 2000;
  int restarts = 8;
  uint64_t seed = 1;
  bool fail_on_exhaustion = false;
};

struct GammaReport {
  double value = 0;
  double p = 2;
  Variant variant = Variant::kOb;
  RVec witness_alpha;
  CMat witness_rho0;
  std::string witness_povm;
  std::optional<Povm> povm;
  Method method = Method::kSimplexSearch;
  Rho0Domain domain = Rho0Domain::kFullRank;
  BoundDirection bound = BoundDirection::kLower;
  int evaluations = 0;
  bool budget_exhausted = false;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, GammaReport best)
      : Error(ErrorCode::kBudgetExhausted, what), best_(std::move(best)) {}
  const GammaReport& best() const { return best_; }

 private:
  GammaReport best_;
};

/// Maps unconstrained parameters (d^2 reals, a lower-triangular factor L) to
/// L L^dagger / tr, floored at eigenvalue 1e-6 and optionally sent into S_{1/2}.
CMat rho_from_params(const RVec& params, int d, Rho0Domain domain);

/// Simplex search for sup over rho0 at fixed M. The value is a lower bound.
GammaReport sup_over_rho0(const ObservableSet& obs, const Povm& m, double p, Variant variant, Rho0Domain domain,
                          const SearchBudget& budget);

struct NamedPovm {
  std::string name;
  Povm povm;
};
/// Computational basis, plus Pauli bases (d = 2^n), SIC (d = 2), MUBs (prime d)
/// and a Haar proxy with K = 50 d^2.
std::vector<NamedPovm> povm_catalog(int d, uint64_t seed);

/// inf over M of sup over rho0. The value is an upper bound on the inf.
GammaReport inf_over_M(const ObservableSet& obs, double p, Variant variant, PovmFamily family, Rho0Domain domain,
                       const SearchBudget& inner, const SearchBudget& outer, int outcomes = 0);

/// {sigma/2 + I/(2d)} for 32 Haar pure states, 32 random mixed states and I/d.
std::vector<CMat> s_half_grid(int d, uint64_t seed, int pure = 32, int mixed = 32);

/// Q'_a(rho0) = Q_a + sum_b C1_ba T_b with C1 from I(rho0, M).
std::vector<CMat> block_diag_q(const ObservableSet& obs, const Povm& m, const CMat& rho0);

/// min over grid of 1/(6 ||(||Q'_a||_inf)_a||_q). Upper bound on the inf.
double threshold_eta_ob(const ObservableSet& obs, double p, const std::vector<CMat>& grid, const Povm& m_star);
/// max over grid and ||theta||_p <= 1 of theta^T G theta, G_ij = tr(Q'_i rho0^-1 Q'_j)/d^2. Lower bound.
double threshold_a_max(const ObservableSet& obs, double p, const std::vector<CMat>& grid, const Povm& m_star,
                       uint64_t seed = 0);
double threshold_eta_ob_c(double a_max, double gamma_ob, int c);
/// Full: sqrt(Gamma ln m / d^3). Ob: sqrt(Gamma / d^3).
double threshold_eta_bar(double gamma, int d, int m, Variant variant);

struct ThresholdReport {
  double eta_ob = 0;
  double eta_ob_c = 0;
  double eta_bar = 0;
  double eta_bar_ob = 0;
  double a_max = 0;
  int grid_size = 0;
  int c = 1;
};

ThresholdReport compute_thresholds(const ObservableSet& obs, double p, const std::vector<CMat>& grid,
                                   const Povm& m_star, double gamma_full, double gamma_ob, int c);

}  // namespace fshadow
