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

#include "fshadow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "fshadow/error.hpp"

namespace fshadow {

double conjugate_exponent(double p) {
  require(p >= 1.0, ErrorCode::kInvalidArgument, "norm index must be >= 1");
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

double lp_norm(const RVec& v, double p) {
  if (std::isinf(p)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  double s = 0;
  for (Eigen::Index i = 0; i < v.size(); i++) s += std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

double trace_real(const CMat& a, const CMat& b) {
  // tr(AB) = sum_ij A_ij B_ji.
  return (a.array() * b.transpose().array()).sum().real();
}

RVec hermitian_eigenvalues(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const CMat& h) { return hermitian_eigenvalues(h).minCoeff(); }
double max_eigenvalue(const CMat& h) { return hermitian_eigenvalues(h).maxCoeff(); }
double operator_norm(const CMat& h) { return hermitian_eigenvalues(h).cwiseAbs().maxCoeff(); }

double sym_min_eigenvalue(const RMat& s) {
  if (s.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double sym_max_eigenvalue(const RMat& s) {
  if (s.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

RMat pinv_sym(const RMat& s, int* rank, double rel_cutoff) {
  if (s.size() == 0) {
    if (rank) *rank = 0;
    return s;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (s + s.transpose()));
  const RVec& ev = es.eigenvalues();
  double cut = rel_cutoff * ev.cwiseAbs().maxCoeff();
  RVec inv = RVec::Zero(ev.size());
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); i++) {
    if (std::abs(ev[i]) > cut) {
      inv[i] = 1.0 / ev[i];
      r++;
    }
  }
  if (rank) *rank = r;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

CMat inverse_sqrt(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  RVec ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); i++) ev[i] = 1.0 / std::sqrt(ev[i]);
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); i++) {
    for (Eigen::Index j = 0; j < a.cols(); j++) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMat embed_at(const CMat& a, const CMat& other, int copies, int slot) {
  CMat out = CMat::Identity(1, 1);
  for (int k = 0; k < copies; k++) out = kron(out, k == slot ? a : other);
  return out;
}

CMat partial_trace_keep(const CMat& m, int d, int copies, int keep) {
  // Index of a basis state: digits (i_0, ..., i_{c-1}) base d, slot 0 most significant.
  long long total = m.rows();
  long long stride = 1;
  for (int k = copies - 1; k > keep; k--) stride *= d;
  long long rest = total / d;
  CMat out = CMat::Zero(d, d);
  // Enumerate the environment index e in [0, rest) and insert the kept digit.
  auto compose = [&](long long env, int digit) {
    long long low = env % stride;
    long long high = env / stride;
    return (high * d + digit) * stride + low;
  };
  for (long long e = 0; e < rest; e++) {
    for (int i = 0; i < d; i++) {
      long long r = compose(e, i);
      for (int j = 0; j < d; j++) out(i, j) += m(r, compose(e, j));
    }
  }
  return out;
}

std::mt19937_64 substream(uint64_t seed, uint64_t index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

int worker_count() {
  if (const char* env = std::getenv("FISHER_SHADOW_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  size_t workers = std::min<size_t>(worker_count(), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; i++) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (size_t w = 0; w < workers; w++) {
    // Static striping keeps the assignment deterministic.
    pool.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fshadow
