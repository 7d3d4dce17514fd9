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

#include "fshadow/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "fshadow/error.hpp"

namespace fshadow {

json op_to_json(const CMat& op) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < op.rows(); i++) {
    json r = json::array();
    json c = json::array();
    for (Eigen::Index j = 0; j < op.cols(); j++) {
      r.push_back(op(i, j).real());
      c.push_back(op(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"dim", op.rows()}, {"re", re}, {"im", im}};
}

CMat op_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re")) {
    throw Error(ErrorCode::kConfigError, "operator needs \"dim\" and \"re\"");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "dim" && key != "re" && key != "im") throw Error(ErrorCode::kConfigError, "unknown operator key " + key);
  }
  const int d = j.at("dim").get<int>();
  if (d < 1) throw Error(ErrorCode::kConfigError, "operator dim must be positive");
  CMat out = CMat::Zero(d, d);
  auto fill = [&](const json& rows, bool imag) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
      throw Error(ErrorCode::kConfigError, "operator rows do not match dim");
    }
    for (int r = 0; r < d; r++) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != d) {
        throw Error(ErrorCode::kConfigError, "operator row length does not match dim");
      }
      for (int c = 0; c < d; c++) {
        double v = rows[r][c].get<double>();
        if (imag) {
          out(r, c) += cplx(0, v);
        } else {
          out(r, c) += v;
        }
      }
    }
  };
  fill(j.at("re"), false);
  if (j.contains("im")) fill(j.at("im"), true);
  return out;
}

json vec_to_json(const RVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); i++) out.push_back(v[i]);
  return out;
}

RVec vec_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kConfigError, "expected a numeric array");
  RVec v(j.size());
  for (size_t i = 0; i < j.size(); i++) v[i] = j[i].get<double>();
  return v;
}

json mat_to_json(const RMat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); i++) out.push_back(vec_to_json(m.row(i).transpose()));
  return out;
}

json povm_to_json(const Povm& m) {
  json elements = json::array();
  for (size_t x = 0; x < m.size(); x++) elements.push_back(op_to_json(m.element(x)));
  return {{"dim", m.dim()}, {"copies", m.copies()}, {"labels", m.labels()}, {"elements", elements}};
}

Povm povm_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("elements")) {
    throw Error(ErrorCode::kConfigError, "POVM needs \"dim\" and \"elements\"");
  }
  std::vector<CMat> elements;
  for (const auto& e : j.at("elements")) elements.push_back(op_from_json(e));
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  return Povm::from_elements(j.at("dim").get<int>(), j.value("copies", 1), elements, labels);
}

json fisher_to_json(const FisherInfo& info) {
  return {{"num_a", info.num_a}, {"num_b", info.num_b}, {"matrix", mat_to_json(info.matrix)},
          {"provenance", info.provenance}};
}

json norm_to_json(double p) {
  if (std::isinf(p)) return "inf";
  return p;
}

double norm_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw Error(ErrorCode::kConfigError, "norm index must be a number >= 1 or \"inf\"");
  }
  if (!j.is_number()) throw Error(ErrorCode::kConfigError, "norm index must be a number >= 1 or \"inf\"");
  double p = j.get<double>();
  if (!(p >= 1.0)) throw Error(ErrorCode::kConfigError, "norm index must be >= 1");
  return p;
}

namespace {

json value_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

json gamma_report_to_json(const GammaReport& r) {
  json out = {{"value", value_or_inf(r.value)},
              {"p", norm_to_json(r.p)},
              {"variant", to_string(r.variant)},
              {"method", to_string(r.method)},
              {"bound", to_string(r.bound)},
              {"rho0_domain", to_string(r.domain)},
              {"witness_povm", r.witness_povm},
              {"evaluations", r.evaluations},
              {"budget_exhausted", r.budget_exhausted}};
  out["witness_alpha"] = vec_to_json(r.witness_alpha);
  if (r.witness_rho0.size()) out["witness_rho0"] = op_to_json(r.witness_rho0);
  return out;
}

json threshold_report_to_json(const ThresholdReport& r) {
  return {{"eta_ob", r.eta_ob},         {"eta_ob_bound", "upper"}, {"eta_ob_c", r.eta_ob_c},
          {"eta_bar", r.eta_bar},       {"eta_bar_ob", r.eta_bar_ob}, {"a_max", r.a_max},
          {"a_max_bound", "lower"},     {"grid_size", r.grid_size},   {"c", r.c}};
}

json run_report_to_json(const RunReport& r) {
  json out = {{"estimates", vec_to_json(r.estimates)},
              {"p_norm_error", r.p_norm_error},
              {"samples", {{"N0", r.n0}, {"N1", r.n1}, {"K", r.k}, {"B", r.b}}},
              {"success", r.success},
              {"coarse_ok", r.coarse_ok},
              {"seed", r.seed},
              {"epsilon", r.epsilon},
              {"p", norm_to_json(r.p)}};
  if (r.truth) out["truth"] = vec_to_json(*r.truth);
  if (r.rho0.size()) out["rho0_hash"] = fnv1a_hex(op_to_json(r.rho0).dump());
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fshadow
