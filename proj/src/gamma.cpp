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

#include "fshadow/gamma.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>

namespace fshadow {

std::string to_string(Variant v) { return v == Variant::kOb ? "ob" : "full"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::kExact: return "exact";
    case Method::kExtremePoint: return "extreme-point";
    case Method::kMultistartAscent: return "multistart-ascent";
    case Method::kMultistartDescent: return "multistart-descent";
    case Method::kSimplexSearch: return "simplex-search";
    case Method::kCatalog: return "catalog";
  }
  return "unknown";
}

std::string to_string(BoundDirection b) {
  switch (b) {
    case BoundDirection::kExact: return "exact";
    case BoundDirection::kLower: return "lower";
    case BoundDirection::kUpper: return "upper";
  }
  return "unknown";
}

std::string to_string(Rho0Domain d) { return d == Rho0Domain::kHalf ? "S_half" : "S_full_rank"; }

namespace {

struct NmResult {
  RVec x;
  double f = 0;
  int evals = 0;
  bool converged = false;
};

struct NmContext {
  const std::function<double(const RVec&)>* fn = nullptr;
  int evals = 0;
  // Best point seen so far; GSL leaves fval unset if the cap hits during setup.
  double best_f = kInf;
  RVec best_x;
};

double nm_trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<NmContext*>(params);
  RVec x(v->size);
  for (size_t i = 0; i < v->size; i++) x[i] = gsl_vector_get(v, i);
  ctx->evals++;
  double f = (*ctx->fn)(x);
  if (!std::isfinite(f)) return 1e300;
  if (f < ctx->best_f) {
    ctx->best_f = f;
    ctx->best_x = x;
  }
  return f;
}

// Nelder-Mead (GSL nmsimplex2) with an evaluation cap.
NmResult nelder_mead(const std::function<double(const RVec&)>& fn, const RVec& x0, double step, int max_evals,
                     double size_tol) {
  const size_t n = x0.size();
  NmContext ctx;
  ctx.fn = &fn;
  gsl_multimin_function f{&nm_trampoline, n, &ctx};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (size_t i = 0; i < n; i++) gsl_vector_set(x, i, x0[i]);
  gsl_vector_set_all(ss, step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &f, x, ss);
  NmResult out;
  while (ctx.evals < max_evals) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_fminimizer_size(s) < size_tol) {
      out.converged = true;
      break;
    }
  }
  if (ctx.best_x.size() == 0) {
    out.x = x0;
    out.f = kInf;
  } else {
    out.x = ctx.best_x;
    out.f = ctx.best_f;
  }
  out.evals = ctx.evals;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(ss);
  return out;
}

RVec normalize_lp(const RVec& v, double p) {
  double n = lp_norm(v, p);
  return n > 0 ? RVec(v / n) : v;
}

// Maximizer of g^T beta over the q-ball: sign(g) |g|^{p-1}, p the conjugate.
RVec q_ball_support(const RVec& g, double q) {
  const double p = conjugate_exponent(q);
  RVec out(g.size());
  if (q == 1.0) {
    Eigen::Index k;
    g.cwiseAbs().maxCoeff(&k);
    out.setZero();
    out[k] = g[k] >= 0 ? 1.0 : -1.0;
    return out;
  }
  for (Eigen::Index i = 0; i < g.size(); i++) {
    double s = g[i] >= 0 ? 1.0 : -1.0;
    out[i] = std::isinf(q) ? s : s * std::pow(std::abs(g[i]), p - 1.0);
  }
  return normalize_lp(out, q);
}

QuadMax power_ascent(const RMat& r, double q, uint64_t seed) {
  const Eigen::Index m = r.rows();
  QuadMax best;
  best.value = -1;
  best.method = Method::kMultistartAscent;
  best.bound = BoundDirection::kLower;
  Eigen::SelfAdjointEigenSolver<RMat> es(r);
  std::mt19937_64 rng = substream(seed, 0x9a11);
  std::normal_distribution<double> g;
  for (int start = 0; start < 32; start++) {
    RVec a(m);
    if (start == 0) {
      a = es.eigenvectors().col(m - 1);
    } else {
      for (Eigen::Index i = 0; i < m; i++) a[i] = g(rng);
    }
    a = normalize_lp(a, q);
    double val = a.dot(r * a);
    for (int it = 0; it < 2000; it++) {
      RVec next = q_ball_support(r * a, q);
      double nv = next.dot(r * next);
      if (nv <= val * (1 + 1e-15)) break;
      a = next;
      val = nv;
    }
    if (val > best.value) {
      best.value = val;
      best.alpha = a;
    }
  }
  return best;
}

}  // namespace

QuadMax quad_max_over_q_ball(const RMat& r, double q, uint64_t seed) {
  require(r.rows() == r.cols(), ErrorCode::kDimensionMismatch, "R must be square");
  require(q >= 1.0, ErrorCode::kInvalidArgument, "q must be >= 1");
  const Eigen::Index m = r.rows();
  QuadMax out;
  if (m == 0) return out;
  RMat s = 0.5 * (r + r.transpose());
  if (q == 2.0) {
    Eigen::SelfAdjointEigenSolver<RMat> es(s);
    out.value = es.eigenvalues()[m - 1];
    out.alpha = es.eigenvectors().col(m - 1);
    return out;
  }
  if (q == 1.0) {
    Eigen::Index k;
    out.value = s.diagonal().maxCoeff(&k);
    out.alpha = RVec::Unit(m, k);
    out.method = Method::kExtremePoint;
    return out;
  }
  if (std::isinf(q) && m <= 20) {
    // Gray-code walk over sign vectors with s_0 = +1.
    RVec sign = RVec::Ones(m);
    RVec rs = s * sign;
    double val = sign.dot(rs);
    out.value = val;
    out.alpha = sign;
    const uint64_t count = 1ULL << (m - 1);
    for (uint64_t k = 1; k < count; k++) {
      int j = __builtin_ctzll(k) + 1;
      val += -4.0 * sign[j] * rs[j] + 4.0 * s(j, j);
      rs -= 2.0 * sign[j] * s.col(j);
      sign[j] = -sign[j];
      if (val > out.value) {
        out.value = val;
        out.alpha = sign;
      }
    }
    out.method = Method::kExtremePoint;
    return out;
  }
  return power_ascent(s, q, seed);
}

QpResult minimize_bounded_qp(const RMat& h, const RVec& c, const RVec& lower, const RVec& upper, const RVec& x0,
                             const RVec* eq_row, double eq_rhs) {
  const Eigen::Index n = h.rows();
  enum State { kFree, kLower, kUpper };
  std::vector<State> state(n, kFree);
  RVec x = x0;
  for (Eigen::Index i = 0; i < n; i++) {
    if (x[i] <= lower[i]) {
      x[i] = lower[i];
      state[i] = kLower;
    } else if (x[i] >= upper[i]) {
      x[i] = upper[i];
      state[i] = kUpper;
    }
  }
  (void)eq_rhs;  // x0 is required to satisfy the equality; steps keep it.
  const double scale = 1.0 + h.cwiseAbs().maxCoeff() + c.cwiseAbs().maxCoeff();
  QpResult out;
  const int max_iter = 50 * static_cast<int>(n) + 100;
  for (int iter = 0; iter < max_iter; iter++) {
    out.iterations = iter + 1;
    RVec g = h * x + c;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; i++) {
      if (state[i] == kFree) free.push_back(i);
    }
    const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
    const int ne = eq_row ? 1 : 0;
    RVec step = RVec::Zero(n);
    double nu = 0;
    if (nf > 0) {
      RMat kkt = RMat::Zero(nf + ne, nf + ne);
      RVec rhs(nf + ne);
      for (Eigen::Index a = 0; a < nf; a++) {
        for (Eigen::Index b = 0; b < nf; b++) kkt(a, b) = h(free[a], free[b]);
        rhs[a] = -g[free[a]];
        if (ne) kkt(a, nf) = kkt(nf, a) = (*eq_row)[free[a]];
      }
      if (ne) rhs[nf] = 0;
      RVec sol = kkt.fullPivLu().solve(rhs);
      for (Eigen::Index a = 0; a < nf; a++) step[free[a]] = sol[a];
      if (ne) nu = sol[nf];
    } else if (ne) {
      // Every variable is pinned; pick nu that best balances the pinned gradients.
      double num = 0, den = 0;
      for (Eigen::Index i = 0; i < n; i++) {
        num -= g[i] * (*eq_row)[i];
        den += (*eq_row)[i] * (*eq_row)[i];
      }
      nu = den > 0 ? num / den : 0;
    }
    if (step.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + x.cwiseAbs().maxCoeff())) {
      Eigen::Index worst = -1;
      double worst_violation = 1e-12 * scale;
      for (Eigen::Index i = 0; i < n; i++) {
        if (state[i] == kFree) continue;
        double lam = g[i] + (ne ? nu * (*eq_row)[i] : 0.0);
        double violation = state[i] == kLower ? -lam : lam;
        if (violation > worst_violation) {
          worst_violation = violation;
          worst = i;
        }
      }
      if (worst < 0) break;
      state[worst] = kFree;
      continue;
    }
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    State block_state = kFree;
    for (Eigen::Index i : free) {
      if (step[i] < 0 && std::isfinite(lower[i])) {
        double t = (lower[i] - x[i]) / step[i];
        if (t < alpha) {
          alpha = t;
          blocking = i;
          block_state = kLower;
        }
      } else if (step[i] > 0 && std::isfinite(upper[i])) {
        double t = (upper[i] - x[i]) / step[i];
        if (t < alpha) {
          alpha = t;
          blocking = i;
          block_state = kUpper;
        }
      }
    }
    x += std::max(alpha, 0.0) * step;
    if (blocking >= 0) {
      state[blocking] = block_state;
      x[blocking] = block_state == kLower ? lower[blocking] : upper[blocking];
    }
  }
  out.x = x;
  out.value = 0.5 * x.dot(h * x) + c.dot(x);
  return out;
}

DualMin dual_min_over_p_sphere(const FisherInfo& info, double p, uint64_t seed) {
  require(p >= 1.0, ErrorCode::kInvalidArgument, "p must be >= 1");
  const int m = info.num_a;
  DualMin out;
  if (m == 0) return out;
  SchurRestriction sr = schur_restriction(info);
  RMat s = sr.complement;
  // A tiny ridge keeps the active-set KKT systems nonsingular when S is.
  double smax = std::max(sym_max_eigenvalue(s), 1e-300);
  RMat sq = s;
  if (sym_min_eigenvalue(s) < 1e-12 * smax) sq += 1e-12 * smax * RMat::Identity(m, m);
  RMat c1 = block_diag_C1(info);

  if (p == 2.0) {
    Eigen::SelfAdjointEigenSolver<RMat> es(s);
    out.value = es.eigenvalues()[0];
    out.theta = es.eigenvectors().col(0);
  } else if (std::isinf(p)) {
    // The minimizer lies on a face theta_i = +-1, |theta_j| <= 1; by symmetry take +1.
    out.value = kInf;
    for (int i = 0; i < m; i++) {
      std::vector<int> rest;
      for (int j = 0; j < m; j++) {
        if (j != i) rest.push_back(j);
      }
      const Eigen::Index r = static_cast<Eigen::Index>(rest.size());
      RVec theta = RVec::Zero(m);
      theta[i] = 1;
      if (r > 0) {
        RMat h(r, r);
        RVec c(r);
        for (Eigen::Index a = 0; a < r; a++) {
          c[a] = 2 * sq(rest[a], i);
          for (Eigen::Index b = 0; b < r; b++) h(a, b) = 2 * sq(rest[a], rest[b]);
        }
        QpResult qp = minimize_bounded_qp(h, c, RVec::Constant(r, -1), RVec::Constant(r, 1), RVec::Zero(r));
        for (Eigen::Index a = 0; a < r; a++) theta[rest[a]] = qp.x[a];
      }
      double v = theta.dot(s * theta);
      if (v < out.value) {
        out.value = v;
        out.theta = theta;
      }
    }
  } else if (p == 1.0 && m <= 16) {
    // One simplex QP per orthant (sign of the first coordinate fixed).
    out.value = kInf;
    const uint64_t count = 1ULL << (m - 1);
    RVec ones = RVec::Ones(m);
    for (uint64_t k = 0; k < count; k++) {
      RVec sign = RVec::Ones(m);
      for (int j = 1; j < m; j++) {
        if ((k >> (j - 1)) & 1) sign[j] = -1;
      }
      RMat h = 2.0 * sign.asDiagonal() * sq * sign.asDiagonal();
      QpResult qp = minimize_bounded_qp(h, RVec::Zero(m), RVec::Zero(m), RVec::Constant(m, kInf),
                                        RVec::Constant(m, 1.0 / m), &ones, 1.0);
      RVec theta = sign.cwiseProduct(qp.x);
      double v = theta.dot(s * theta);
      if (v < out.value) {
        out.value = v;
        out.theta = theta;
      }
    }
  } else {
    out.method = Method::kMultistartDescent;
    out.bound = BoundDirection::kUpper;
    std::function<double(const RVec&)> f = [&](const RVec& u) {
      double n = lp_norm(u, p);
      return n > 0 ? u.dot(s * u) / (n * n) : kInf;
    };
    out.value = kInf;
    std::mt19937_64 rng = substream(seed, 0xd0a1);
    std::normal_distribution<double> g;
    Eigen::SelfAdjointEigenSolver<RMat> es(s);
    for (int start = 0; start < 32; start++) {
      RVec u0(m);
      if (start == 0) {
        u0 = es.eigenvectors().col(0);
      } else {
        for (int i = 0; i < m; i++) u0[i] = g(rng);
      }
      u0 = normalize_lp(u0, p);
      NmResult r = nelder_mead(f, u0, 0.2, 4000, 1e-10);
      if (r.f < out.value) {
        out.value = r.f;
        out.theta = normalize_lp(r.x, p);
      }
    }
  }
  if (p != 2.0) out.theta = normalize_lp(out.theta, p);
  out.value = out.theta.dot(s * out.theta);
  out.phi = c1 * out.theta;
  return out;
}

double gamma_from_restriction(const SchurRestriction& r, double p, Variant variant, RVec* alpha) {
  const Eigen::Index m = r.matrix.rows();
  if (m == 0) return 0.0;
  if (r.support_rank < m) return kInf;
  if (variant == Variant::kOb) {
    QuadMax qm = quad_max_over_q_ball(r.matrix, conjugate_exponent(p));
    if (alpha) *alpha = qm.alpha;
    return qm.value;
  }
  RVec s = r.matrix.diagonal().cwiseMax(0.0);
  if (alpha) *alpha = RVec();
  if (std::isinf(p)) return s.maxCoeff();
  double acc = 0;
  for (Eigen::Index i = 0; i < m; i++) acc += std::pow(s[i], p / 2);
  return std::pow(acc, 2 / p);
}

double gamma_for_fixed(const StateModel& model, const Povm& m, double p, Variant variant) {
  return gamma_from_restriction(schur_restriction(fim(model, m)), p, variant);
}

CMat rho_from_params(const RVec& params, int d, Rho0Domain domain) {
  require(params.size() == d * d, ErrorCode::kDimensionMismatch, "rho parameterization needs d^2 reals");
  CMat l = CMat::Zero(d, d);
  int k = 0;
  for (int i = 0; i < d; i++) l(i, i) = params[k++];
  for (int i = 0; i < d; i++) {
    for (int j = 0; j < i; j++) {
      l(i, j) = cplx(params[k], params[k + 1]);
      k += 2;
    }
  }
  CMat rho = l * l.adjoint();
  double tr = rho.trace().real();
  CMat id = CMat::Identity(d, d);
  if (!(tr > 1e-300)) return id / static_cast<double>(d);
  rho /= tr;
  const double kappa = 1e-6;
  rho = (1.0 - d * kappa) * rho + kappa * id;
  if (domain == Rho0Domain::kHalf) rho = 0.5 * rho + id / (2.0 * d);
  return 0.5 * (rho + rho.adjoint());
}

namespace {

struct RestartResult {
  double value = -kInf;
  RVec x;
  int evals = 0;
  bool converged = false;
};

}  // namespace

GammaReport sup_over_rho0(const ObservableSet& obs, const Povm& m, double p, Variant variant, Rho0Domain domain,
                          const SearchBudget& budget) {
  const int d = obs.dim();
  require(m.copies() == 1 && m.dim() == d, ErrorCode::kDimensionMismatch, "POVM must be single-copy on dimension d");
  DualBasis basis = build_dual_basis(obs);
  FimEngine engine(basis.all(), obs.size(), m);
  auto value_at = [&](const CMat& rho) {
    return gamma_from_restriction(schur_restriction(engine.at(rho)), p, variant);
  };
  const int restarts = std::max(1, budget.restarts);
  const int per_restart = std::max(1, budget.max_evaluations / restarts);
  std::vector<RestartResult> results(restarts);
  parallel_for(restarts, [&](size_t r) {
    RVec x0 = RVec::Zero(d * d);
    if (r == 0) {
      x0.head(d).setOnes();
    } else {
      std::mt19937_64 rng = substream(budget.seed, r);
      std::normal_distribution<double> g;
      for (int i = 0; i < d * d; i++) x0[i] = g(rng);
    }
    std::function<double(const RVec&)> f = [&](const RVec& x) { return -value_at(rho_from_params(x, d, domain)); };
    RestartResult& out = results[r];
    double v0 = -f(x0);
    out.value = v0;
    out.x = x0;
    out.evals = 1;
    if (std::isinf(v0) || per_restart <= 1) {
      out.converged = true;
      return;
    }
    NmResult nm = nelder_mead(f, x0, 0.5, per_restart - 1, 1e-6);
    out.evals += nm.evals;
    out.converged = nm.converged;
    if (-nm.f > out.value) {
      out.value = -nm.f;
      out.x = nm.x;
    }
  });
  GammaReport rep;
  rep.p = p;
  rep.variant = variant;
  rep.domain = domain;
  rep.method = Method::kSimplexSearch;
  rep.bound = BoundDirection::kLower;
  rep.witness_povm = "fixed(" + std::to_string(m.size()) + " outcomes)";
  rep.povm = m;
  size_t best = 0;
  for (size_t r = 0; r < results.size(); r++) {
    rep.evaluations += results[r].evals;
    if (!results[r].converged) rep.budget_exhausted = true;
    if (results[r].value > results[best].value) best = r;
  }
  rep.witness_rho0 = rho_from_params(results[best].x, d, domain);
  rep.value = gamma_from_restriction(schur_restriction(engine.at(rep.witness_rho0)), p, variant, &rep.witness_alpha);
  if (rep.budget_exhausted && budget.fail_on_exhaustion) {
    throw BudgetExhausted("rho0 search hit its evaluation cap", rep);
  }
  return rep;
}

std::vector<NamedPovm> povm_catalog(int d, uint64_t seed) {
  std::vector<NamedPovm> out;
  out.push_back({"computational", computational_povm(d)});
  if ((d & (d - 1)) == 0 && d >= 2) out.push_back({"pauli_basis_uniform", standard_povm(d, PovmKind::kPauliBasisUniform)});
  if (d == 2) out.push_back({"sic_d2", sic_d2()});
  bool prime = d >= 2;
  for (int k = 2; k * k <= d; k++) {
    if (d % k == 0) prime = false;
  }
  if (prime) out.push_back({"mub_prime", mub_prime(d)});
  out.push_back({"haar_proxy", finite_haar_proxy(d, 50 * d * d, seed)});
  return out;
}

namespace {

CMat isometry_from_params(const RVec& x, int k, int d) {
  CMat z(k, d);
  for (int i = 0; i < k; i++) {
    for (int j = 0; j < d; j++) z(i, j) = cplx(x[2 * (i * d + j)], x[2 * (i * d + j) + 1]);
  }
  CMat gram = z.adjoint() * z;
  if (min_eigenvalue(gram) <= 1e-12 * std::max(1.0, max_eigenvalue(gram))) return CMat();
  return z * inverse_sqrt(gram);
}

}  // namespace

GammaReport inf_over_M(const ObservableSet& obs, double p, Variant variant, PovmFamily family, Rho0Domain domain,
                       const SearchBudget& inner, const SearchBudget& outer, int outcomes) {
  const int d = obs.dim();
  GammaReport best;
  best.value = kInf;
  bool have = false;
  int evaluations = 0;
  bool exhausted = false;
  for (auto& named : povm_catalog(d, outer.seed)) {
    GammaReport r = sup_over_rho0(obs, named.povm, p, variant, domain, inner);
    evaluations += r.evaluations;
    exhausted = exhausted || r.budget_exhausted;
    if (!have || r.value < best.value) {
      best = r;
      best.witness_povm = named.name;
      have = true;
    }
  }
  best.method = Method::kCatalog;
  if (family == PovmFamily::kParameterized) {
    const int k = outcomes > 0 ? outcomes : d * d;
    require(k >= d, ErrorCode::kInvalidArgument, "parameterized family needs K >= d");
    std::function<double(const RVec&)> f = [&](const RVec& x) {
      CMat w = isometry_from_params(x, k, d);
      if (w.size() == 0) return kInf;
      GammaReport r = sup_over_rho0(obs, isometry_povm(w), p, variant, domain, inner);
      evaluations += r.evaluations;
      return r.value;
    };
    std::mt19937_64 rng = substream(outer.seed, 0x150);
    std::normal_distribution<double> g;
    RVec x0(2 * k * d);
    for (Eigen::Index i = 0; i < x0.size(); i++) x0[i] = g(rng);
    NmResult nm = nelder_mead(f, x0, 0.5, std::max(2, outer.max_evaluations), 1e-6);
    exhausted = exhausted || !nm.converged;
    if (nm.f < best.value) {
      Povm found = isometry_povm(isometry_from_params(nm.x, k, d));
      best = sup_over_rho0(obs, found, p, variant, domain, inner);
      best.witness_povm = "isometry(K=" + std::to_string(k) + ")";
      best.method = Method::kSimplexSearch;
    }
  }
  best.bound = BoundDirection::kUpper;
  best.evaluations = evaluations;
  best.budget_exhausted = exhausted;
  if (exhausted && outer.fail_on_exhaustion) throw BudgetExhausted("measurement search hit its evaluation cap", best);
  return best;
}

std::vector<CMat> s_half_grid(int d, uint64_t seed, int pure, int mixed) {
  std::vector<CMat> out;
  CMat id = CMat::Identity(d, d);
  auto half = [&](const CMat& sigma) { return CMat(0.5 * sigma + id / (2.0 * d)); };
  for (int i = 0; i < pure; i++) {
    std::mt19937_64 rng = substream(seed, i);
    CVec v = haar_random_state(d, rng);
    out.push_back(half(v * v.adjoint()));
  }
  for (int i = 0; i < mixed; i++) {
    std::mt19937_64 rng = substream(seed, 1000 + i);
    std::normal_distribution<double> g;
    CMat z(d, d);
    for (int a = 0; a < d; a++) {
      for (int b = 0; b < d; b++) z(a, b) = cplx(g(rng), g(rng));
    }
    CMat s = z * z.adjoint();
    out.push_back(half(s / s.trace().real()));
  }
  out.push_back(id / static_cast<double>(d));
  for (auto& r : out) r = 0.5 * (r + r.adjoint());
  return out;
}

std::vector<CMat> block_diag_q(const ObservableSet& obs, const Povm& m, const CMat& rho0) {
  DualBasis basis = build_dual_basis(obs);
  FisherInfo info = FimEngine(basis.all(), obs.size(), m).at(rho0);
  RMat c1 = block_diag_C1(info);
  std::vector<CMat> out = basis.q;
  for (int a = 0; a < basis.num_a(); a++) {
    for (int b = 0; b < basis.num_b(); b++) out[a] += c1(b, a) * basis.t[b];
  }
  return out;
}

double threshold_eta_ob(const ObservableSet& obs, double p, const std::vector<CMat>& grid, const Povm& m_star) {
  const double q = conjugate_exponent(p);
  double best = kInf;
  for (const auto& rho0 : grid) {
    auto qp = block_diag_q(obs, m_star, rho0);
    RVec norms(qp.size());
    for (size_t a = 0; a < qp.size(); a++) norms[a] = operator_norm(qp[a]);
    best = std::min(best, 1.0 / (6.0 * lp_norm(norms, q)));
  }
  return best;
}

double threshold_a_max(const ObservableSet& obs, double p, const std::vector<CMat>& grid, const Povm& m_star,
                       uint64_t seed) {
  const double d = obs.dim();
  double best = 0;
  for (const auto& rho0 : grid) {
    auto qp = block_diag_q(obs, m_star, rho0);
    CMat inv = rho0.inverse();
    const int m = static_cast<int>(qp.size());
    RMat g(m, m);
    for (int i = 0; i < m; i++) {
      CMat left = qp[i] * inv;
      for (int j = i; j < m; j++) g(i, j) = g(j, i) = trace_real(left, qp[j]) / (d * d);
    }
    best = std::max(best, quad_max_over_q_ball(g, p, seed).value);
  }
  return best;
}

double threshold_eta_ob_c(double a_max, double gamma_ob, int c) {
  return std::min(1.0 / (3.0 * c * a_max * std::sqrt(gamma_ob)), 1.0 / (12.0 * c * std::sqrt(a_max)));
}

double threshold_eta_bar(double gamma, int d, int m, Variant variant) {
  double d3 = std::pow(static_cast<double>(d), 3);
  if (variant == Variant::kOb) return std::sqrt(gamma / d3);
  return std::sqrt(gamma * std::log(static_cast<double>(m)) / d3);
}

ThresholdReport compute_thresholds(const ObservableSet& obs, double p, const std::vector<CMat>& grid,
                                   const Povm& m_star, double gamma_full, double gamma_ob, int c) {
  ThresholdReport r;
  r.grid_size = static_cast<int>(grid.size());
  r.c = c;
  r.eta_ob = threshold_eta_ob(obs, p, grid, m_star);
  r.a_max = threshold_a_max(obs, p, grid, m_star);
  r.eta_ob_c = threshold_eta_ob_c(r.a_max, gamma_ob, c);
  r.eta_bar = threshold_eta_bar(gamma_full, obs.dim(), obs.size(), Variant::kFull);
  r.eta_bar_ob = threshold_eta_bar(gamma_ob, obs.dim(), obs.size(), Variant::kOb);
  return r;
}

}  // namespace fshadow
