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

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>

namespace fshadow {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Hoelder conjugate: 1/p + 1/q = 1, with 1 <-> inf.
double conjugate_exponent(double p);

/// l_p norm of a real vector; p = kInf gives the max norm.
double lp_norm(const RVec& v, double p);

/// Re tr(AB) without forming the product.
double trace_real(const CMat& a, const CMat& b);

RVec hermitian_eigenvalues(const CMat& h);
double min_eigenvalue(const CMat& h);
double max_eigenvalue(const CMat& h);
/// Largest |eigenvalue| of a Hermitian matrix.
double operator_norm(const CMat& h);

double sym_min_eigenvalue(const RMat& s);
double sym_max_eigenvalue(const RMat& s);

/// Symmetric pseudoinverse. Eigenvalues with |lambda| <= rel_cutoff * max|lambda| are dropped.
RMat pinv_sym(const RMat& s, int* rank = nullptr, double rel_cutoff = 1e-10);

/// H^{-1/2} for a positive definite Hermitian H.
CMat inverse_sqrt(const CMat& h);

CMat kron(const CMat& a, const CMat& b);

/// Operator on `copies` subsystems of dimension d: `a` on slot `slot`, `other` on every other slot.
CMat embed_at(const CMat& a, const CMat& other, int copies, int slot);

/// Partial trace over every subsystem except `keep`.
CMat partial_trace_keep(const CMat& m, int d, int copies, int keep);

/// Independent generator for (seed, index); used for per-trial and per-start streams.
std::mt19937_64 substream(uint64_t seed, uint64_t index);

/// Worker count: FISHER_SHADOW_THREADS if set, else hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). Each index must write only to its own output slot.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace fshadow
