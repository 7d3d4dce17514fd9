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

#include <string>

#include "fshadow/estimation.hpp"
#include "fshadow/fisher.hpp"
#include "fshadow/gamma.hpp"
#include "fshadow/measurement.hpp"
#include "fshadow/operators.hpp"
#include "json.hpp"

namespace fshadow {

using json = nlohmann::json;

/// {"dim": d, "re": [[...]], "im": [[...]]}, row-major.
json op_to_json(const CMat& op);
CMat op_from_json(const json& j);
json vec_to_json(const RVec& v);
RVec vec_from_json(const json& j);
json mat_to_json(const RMat& m);

json povm_to_json(const Povm& m);
Povm povm_from_json(const json& j);

json fisher_to_json(const FisherInfo& info);
json gamma_report_to_json(const GammaReport& r);
json threshold_report_to_json(const ThresholdReport& r);
json run_report_to_json(const RunReport& r);

/// Norm index as JSON: numbers stay numbers, infinity becomes "inf".
json norm_to_json(double p);
double norm_from_json(const json& j);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace fshadow
