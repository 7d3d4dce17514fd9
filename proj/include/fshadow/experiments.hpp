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

#include <random>
#include <string>
#include <vector>

#include "fshadow/serialize.hpp"

namespace fshadow {

/// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIdentityFailure = 3;
inline constexpr int kExitBudget = 4;

struct CommandResult {
  json report;
  /// CSV body including the header row.
  std::string csv;
  int exit_code = kExitOk;
  std::string summary;
};

const std::vector<std::string>& command_names();
json command_defaults(const std::string& command);
/// Merges `user` over the defaults. Unknown keys or mistyped values raise ConfigError.
json resolve_config(const std::string& command, const json& user);
/// FNV-1a of the canonical dump of a resolved config.
std::string config_hash(const json& resolved);
CommandResult run_command(const std::string& command, const json& resolved);

// Random instances shared by the identity suites.
CMat random_density(int d, std::mt19937_64& rng, double floor = 0.0);
ObservableSet random_observables(int d, int m, std::mt19937_64& rng);
RMat random_spd(int n, std::mt19937_64& rng);

struct IdentityResult {
  std::string name;
  std::string anchor;
  double max_deviation = 0;
  double tolerance = 0;
  int instances = 0;
  bool pass = false;
};

/// Runs every exact-identity suite at the given dimensions.
std::vector<IdentityResult> run_identity_suites(const std::vector<int>& dims, int instances, FimConvention convention,
                                                uint64_t seed, double tolerance);
std::vector<IdentityResult> run_ccopy_suites(const std::vector<int>& dims, int instances, int outcomes,
                                             int max_depth, uint64_t seed, double tolerance);

}  // namespace fshadow
