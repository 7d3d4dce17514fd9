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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("fisher_shadow_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  std::string cmd = std::string(FISHER_SHADOW_BIN) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const json& cfg) {
  fs::path p = dir / "config.json";
  std::ofstream(p) << cfg.dump();
  return p;
}

}  // namespace

TEST_CASE("gamma on single-qubit Paulis") {
  fs::path dir = scratch("gamma");
  REQUIRE(run("gamma --pauli-complete --n 1 --p inf --variant ob --out " + dir.string()) == 0);
  json ob = json::parse(slurp(dir / "gamma.json"));
  double v = ob["value"];
  CHECK(v >= 2.0 / 3);
  CHECK(v <= 6.0);
  CHECK(ob["bound"] == "upper");
  CHECK(ob.contains("config_hash"));
  std::string csv = slurp(dir / "gamma.csv");
  CHECK(csv.rfind("# config_hash=" + ob["config_hash"].get<std::string>(), 0) == 0);
  CHECK(csv.find("d,m,p,variant,value,bound,method,wall_seconds") != std::string::npos);

  REQUIRE(run("gamma --pauli-complete --n 1 --p 2 --variant ob --out " + dir.string()) == 0);
  double ob2 = json::parse(slurp(dir / "gamma.json"))["value"];
  REQUIRE(run("gamma --pauli-complete --n 1 --p 2 --variant full --out " + dir.string()) == 0);
  double full2 = json::parse(slurp(dir / "gamma.json"))["value"];
  CHECK(full2 <= 3 * ob2 * (1 + 1e-6));
}

TEST_CASE("configuration errors exit with code 2") {
  fs::path dir = scratch("config");
  CHECK(run("gamma --config " + write_config(dir, json{{"unknown_key", 1}}).string() + " --out " + dir.string()) ==
        2);
  CHECK(run("gamma --config " + write_config(dir, json{{"p", "two"}}).string() + " --out " + dir.string()) == 2);
  CHECK(run("estimate --config " + write_config(dir, json{{"n1", -5}}).string() + " --out " + dir.string()) == 2);
  std::ofstream(dir / "broken.json") << "{not json";
  CHECK(run("gamma --config " + (dir / "broken.json").string()) == 2);
  CHECK(run("gamma --config " + (dir / "missing.json").string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("gamma --no-such-flag") == 2);
}

TEST_CASE("identity suites pass and the scaled convention is caught") {
  fs::path dir = scratch("identities");
  fs::path cfg = write_config(dir, json{{"instances", 8}});
  REQUIRE(run("identities --config " + cfg.string() + " --out " + dir.string()) == 0);
  json rep = json::parse(slurp(dir / "identities.json"));
  REQUIRE(rep["identities"].size() >= 6u);
  for (const auto& r : rep["identities"]) {
    CHECK(r["pass"] == true);
    CHECK(!r["anchor"].get<std::string>().empty());
  }
  fs::path scaled = write_config(dir, json{{"instances", 8}, {"convention", "scaled"}});
  CHECK(run("identities --config " + scaled.string() + " --out " + dir.string()) == 3);
  json bad = json::parse(slurp(dir / "identities.json"));
  for (const auto& r : bad["identities"]) {
    if (r["name"] == "chi2_exact") CHECK(r["pass"] == false);
  }
}

TEST_CASE("ccopy suites") {
  fs::path dir = scratch("ccopy");
  fs::path cfg = write_config(dir, json{{"instances", 5}, {"max_depth", 2}});
  CHECK(run("ccopy --config " + cfg.string() + " --out " + dir.string()) == 0);
}

TEST_CASE("budget exhaustion exits with code 4") {
  fs::path dir = scratch("budget");
  fs::path cfg = write_config(dir, json{{"budget", 4}, {"restarts", 2}, {"fail_on_budget", true}});
  CHECK(run("gamma --config " + cfg.string() + " --out " + dir.string()) == 4);
  json rep = json::parse(slurp(dir / "gamma.json"));
  CHECK(rep.contains("error"));
  CHECK(rep["value"].get<double>() > 0);
}

TEST_CASE("sweep is reproducible and marks the regime") {
  fs::path a = scratch("sweep_a");
  fs::path b = scratch("sweep_b");
  json cfg{{"epsilons", {0.8, 0.2}}, {"trials", 10}, {"n0", 500}, {"n_max", 20000}};
  fs::path ca = write_config(a, cfg);
  REQUIRE(run("sweep --config " + ca.string() + " --seed 5 --out " + a.string()) == 0);
  REQUIRE(run("sweep --config " + ca.string() + " --seed 5 --out " + b.string()) == 0);
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  json rep = json::parse(slurp(a / "sweep.json"));
  REQUIRE(rep["rows"].size() == 2u);
  CHECK(rep["rows"][0]["regime"] == "outside regime");
  CHECK(rep["rows"][1]["regime"] == "in regime");
  REQUIRE(run("sweep --config " + ca.string() + " --seed 6 --out " + b.string()) == 0);
  CHECK(slurp(a / "sweep.csv") != slurp(b / "sweep.csv"));
}

TEST_CASE("pauli table for one qubit") {
  fs::path dir = scratch("pauli");
  fs::path cfg = write_config(dir, json{{"qubits", {1}}, {"p", "inf"}, {"grid_pure", 4}, {"grid_mixed", 4}});
  REQUIRE(run("pauli --config " + cfg.string() + " --out " + dir.string()) == 0);
  json row = json::parse(slurp(dir / "pauli.json"))["rows"][0];
  CHECK(row["eta_ob"].get<double>() == doctest::Approx(1.0 / 18).epsilon(1e-12));
  CHECK(row["eta_ob_formula"].get<double>() == doctest::Approx(1.0 / 18).epsilon(1e-12));
  CHECK(row["in_bracket"] == true);
}

TEST_CASE("estimate, oblivious and thresholds run end to end") {
  fs::path dir = scratch("estimate");
  fs::path cfg = write_config(dir, json{{"n0", 1000}, {"n1", 20000}, {"trials", 3}});
  REQUIRE(run("estimate --config " + cfg.string() + " --out " + dir.string()) == 0);
  json rep = json::parse(slurp(dir / "estimate.json"));
  CHECK(rep.contains("config"));
  fs::path ob = write_config(dir, json{{"n0", 1000}, {"n1", 20000}, {"alpha", {0.5, 0.25, 0.25}}});
  CHECK(run("oblivious --config " + ob.string() + " --out " + dir.string()) == 0);
  fs::path bad_alpha = write_config(dir, json{{"alpha", {1.0, 1.0, 1.0}}});
  CHECK(run("oblivious --config " + bad_alpha.string() + " --out " + dir.string()) != 0);
  fs::path th = write_config(dir, json{{"grid_pure", 4}, {"grid_mixed", 4}, {"budget", 60}});
  REQUIRE(run("thresholds --config " + th.string() + " --out " + dir.string()) == 0);
  json t = json::parse(slurp(dir / "thresholds.json"));
  CHECK(t.dump().find("upper") != std::string::npos);
}
