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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "fshadow/error.hpp"
#include "fshadow/experiments.hpp"
#include "fshadow/gamma.hpp"

namespace {

using fshadow::json;

void write_outputs(const std::string& dir, const std::string& command, const std::string& hash, json report,
                   const std::string& csv) {
  std::filesystem::create_directories(dir);
  report["config_hash"] = hash;
  std::ofstream(std::filesystem::path(dir) / (command + ".json")) << report.dump(2) << "\n";
  std::ofstream out(std::filesystem::path(dir) / (command + ".csv"));
  out << "# config_hash=" << hash << "\n" << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information shadow tomography experiments"};
  std::string command;
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir = ".";
  bool pauli_complete = false;
  std::optional<int> n_qubits;
  std::optional<std::string> p_flag;
  std::optional<std::string> variant;

  std::string names;
  for (const auto& n : fshadow::command_names()) names += (names.empty() ? "" : "|") + n;
  app.add_option("command", command, names)->required()->check(CLI::IsMember(fshadow::command_names()));
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--pauli-complete", pauli_complete, "Use all non-identity Pauli strings as observables");
  app.add_option("--n", n_qubits, "Number of qubits");
  app.add_option("--p", p_flag, "Norm index (number >= 1 or inf)");
  app.add_option("--variant", variant, "ob or full");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fshadow::kExitConfig;
  }

  json resolved;
  try {
    json user = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw fshadow::Error(fshadow::ErrorCode::kConfigError, "cannot open " + config_path);
      try {
        user = json::parse(in);
      } catch (const json::exception& e) {
        throw fshadow::Error(fshadow::ErrorCode::kConfigError, std::string("malformed JSON: ") + e.what());
      }
    }
    if (!user.is_object()) throw fshadow::Error(fshadow::ErrorCode::kConfigError, "config must be a JSON object");
    if (seed) user["seed"] = *seed;
    if (pauli_complete) user["observables"] = "pauli-complete";
    if (n_qubits) user["n_qubits"] = *n_qubits;
    if (p_flag) {
      if (*p_flag == "inf") {
        user["p"] = "inf";
      } else {
        try {
          user["p"] = std::stod(*p_flag);
        } catch (const std::exception&) {
          throw fshadow::Error(fshadow::ErrorCode::kConfigError, "--p must be a number or inf");
        }
      }
    }
    if (variant) user["variant"] = *variant;
    resolved = fshadow::resolve_config(command, user);
  } catch (const fshadow::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return fshadow::kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return fshadow::kExitConfig;
  }

  const std::string hash = fshadow::config_hash(resolved);
  try {
    fshadow::CommandResult res = fshadow::run_command(command, resolved);
    res.report["command"] = command;
    res.report["config"] = resolved;
    write_outputs(out_dir, command, hash, res.report, res.csv);
    std::cout << res.summary << (res.summary.empty() || res.summary.back() == '\n' ? "" : "\n");
    return res.exit_code;
  } catch (const fshadow::BudgetExhausted& e) {
    json report = fshadow::gamma_report_to_json(e.best());
    report["command"] = command;
    report["config"] = resolved;
    report["error"] = e.what();
    write_outputs(out_dir, command, hash, report, "");
    std::cerr << e.what() << "\n";
    return fshadow::kExitBudget;
  } catch (const fshadow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == fshadow::ErrorCode::kConfigError ? fshadow::kExitConfig : 1;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return fshadow::kExitConfig;
  }
}
