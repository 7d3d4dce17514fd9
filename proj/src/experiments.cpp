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

#include "fshadow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fshadow/error.hpp"
#include "fshadow/estimation.hpp"
#include "fshadow/gamma.hpp"

namespace fshadow {

namespace {

const std::map<std::string, json>& defaults_table() {
  static const std::map<std::string, json> table = {
      {"gamma",
       {{"observables", "pauli-complete"}, {"n_qubits", 1}, {"p", 2.0}, {"variant", "ob"}, {"domain", "full_rank"},
        {"search", "catalog"}, {"measurement", "haar_proxy"}, {"proxy_factor", 50}, {"budget", 400},
        {"restarts", 4}, {"outer_budget", 20}, {"outcomes", 0}, {"fail_on_budget", false}, {"seed", 1}}},
      {"identities",
       {{"dims", {2, 3}}, {"instances", 20}, {"convention", "derivative"}, {"tolerance", 1e-8}, {"seed", 1}}},
      {"sweep",
       {{"n_qubits", 1}, {"p", "inf"}, {"epsilons", {0.2, 0.1, 0.05}}, {"delta", 0.1}, {"trials", 100},
        {"n0", 4000}, {"n_min", 100}, {"n_max", 400000}, {"measurement", "pauli_basis_uniform"},
        {"state", {{"bloch", {0.2, -0.1, 0.4}}}}, {"seed", 1}}},
      {"pauli",
       {{"qubits", {1, 2, 3}}, {"p", "inf"}, {"c", 2}, {"proxy_factor", 50}, {"budget", 400}, {"restarts", 2},
        {"grid_pure", 32}, {"grid_mixed", 32}, {"seed", 1}}},
      {"ccopy",
       {{"dims", {2, 3}}, {"instances", 50}, {"outcomes", 4}, {"max_depth", 3}, {"tolerance", 1e-8}, {"seed", 1}}},
      {"estimate",
       {{"observables", "pauli-complete"}, {"n_qubits", 1}, {"state", {{"bloch", {0.2, -0.1, 0.4}}}}, {"p", "inf"},
        {"epsilon", 0.1}, {"delta", 0.1}, {"n0", 4000}, {"n1", 20000}, {"k", 0}, {"b", 0},
        {"measurement", "pauli_basis_uniform"}, {"proxy_factor", 50}, {"trials", 1}, {"seed", 1}}},
      {"oblivious",
       {{"observables", "pauli-complete"}, {"n_qubits", 1}, {"state", {{"bloch", {0.2, -0.1, 0.4}}}}, {"p", "inf"},
        {"epsilon", 0.1}, {"delta", 0.1}, {"n0", 4000}, {"n1", 20000}, {"k", 0}, {"b", 0},
        {"measurement", "pauli_basis_uniform"}, {"proxy_factor", 50}, {"alpha", nullptr}, {"trials", 1},
        {"seed", 1}}},
      {"thresholds",
       {{"observables", "pauli-complete"}, {"n_qubits", 1}, {"p", "inf"}, {"c", 2}, {"m_star", "catalog"},
        {"proxy_factor", 50}, {"grid_pure", 32}, {"grid_mixed", 32}, {"budget", 300}, {"restarts", 2},
        {"seed", 1}}},
  };
  return table;
}

bool type_compatible(const std::string& key, const json& def, const json& val) {
  if (key == "p") return val.is_number() || val.is_string();
  if (key == "observables") return val.is_string() || val.is_array();
  if (key == "state") return val.is_string() || val.is_object();
  if (key == "alpha") return val.is_null() || val.is_array();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_number_integer()) return val.is_number_integer() && val.get<long long>() >= 0;
  if (def.is_number()) return val.is_number();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return true;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<uint64_t>(); }

ObservableSet parse_observables(const json& cfg) {
  const json& o = cfg.at("observables");
  if (o.is_string()) {
    if (o.get<std::string>() != "pauli-complete") {
      throw Error(ErrorCode::kConfigError, "observables must be \"pauli-complete\" or an array");
    }
    int n = cfg.at("n_qubits").get<int>();
    if (n < 1 || n > 3) throw Error(ErrorCode::kConfigError, "n_qubits must be in [1, 3]");
    return pauli_observables(n);
  }
  if (o.empty()) throw Error(ErrorCode::kConfigError, "observable list is empty");
  if (o[0].is_string()) return pauli_observables(o.get<std::vector<std::string>>());
  std::vector<HermitianOp> ops;
  for (const auto& e : o) ops.emplace_back(op_from_json(e));
  return ObservableSet(ops[0].dim(), std::move(ops));
}

DensityMatrix parse_state(const json& s, int d) {
  if (s.is_string()) {
    if (s.get<std::string>() == "maximally_mixed") return DensityMatrix::maximally_mixed(d);
    throw Error(ErrorCode::kConfigError, "state must be \"maximally_mixed\", {\"bloch\": [...]} or an operator");
  }
  if (s.contains("bloch")) {
    if (d != 2) throw Error(ErrorCode::kConfigError, "Bloch vectors describe qubits only");
    RVec b = vec_from_json(s.at("bloch"));
    if (b.size() != 3 || b.norm() > 1 + 1e-12) throw Error(ErrorCode::kConfigError, "bad Bloch vector");
    CMat rho = 0.5 * (pauli_string("I") + b[0] * pauli_string("X") + b[1] * pauli_string("Y") +
                      b[2] * pauli_string("Z"));
    return DensityMatrix(rho);
  }
  return DensityMatrix(op_from_json(s));
}

Povm parse_measurement(const std::string& name, int d, int proxy_factor, uint64_t seed) {
  if (name == "computational") return computational_povm(d);
  if (name == "pauli_basis_uniform") return standard_povm(d, PovmKind::kPauliBasisUniform);
  if (name == "sic") return standard_povm(d, PovmKind::kSic);
  if (name == "mub") return standard_povm(d, PovmKind::kMub);
  if (name == "haar_proxy") return finite_haar_proxy(d, proxy_factor * d * d, seed);
  throw Error(ErrorCode::kConfigError, "unknown measurement \"" + name + "\"");
}

Variant parse_variant(const json& v) {
  std::string s = v.get<std::string>();
  if (s == "ob") return Variant::kOb;
  if (s == "full") return Variant::kFull;
  throw Error(ErrorCode::kConfigError, "variant must be \"ob\" or \"full\"");
}

Rho0Domain parse_domain(const json& v) {
  std::string s = v.get<std::string>();
  if (s == "full_rank") return Rho0Domain::kFullRank;
  if (s == "half") return Rho0Domain::kHalf;
  throw Error(ErrorCode::kConfigError, "domain must be \"full_rank\" or \"half\"");
}

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); i++) {
    if (i) out += ",";
    out += cells[i];
  }
  return out + "\n";
}

CommandResult cmd_gamma(const json& cfg) {
  double t0 = now_seconds();
  ObservableSet obs = parse_observables(cfg);
  const int d = obs.dim();
  double p = norm_from_json(cfg.at("p"));
  Variant variant = parse_variant(cfg.at("variant"));
  Rho0Domain domain = parse_domain(cfg.at("domain"));
  SearchBudget inner{cfg.at("budget").get<int>(), cfg.at("restarts").get<int>(), seed_of(cfg),
                     cfg.at("fail_on_budget").get<bool>()};
  SearchBudget outer{cfg.at("outer_budget").get<int>(), 1, seed_of(cfg), cfg.at("fail_on_budget").get<bool>()};
  std::string search = cfg.at("search").get<std::string>();
  GammaReport rep;
  if (search == "fixed") {
    std::string name = cfg.at("measurement").get<std::string>();
    rep = sup_over_rho0(obs, parse_measurement(name, d, cfg.at("proxy_factor").get<int>(), seed_of(cfg)), p, variant,
                        domain, inner);
    rep.witness_povm = name;
  } else if (search == "catalog" || search == "parameterized") {
    rep = inf_over_M(obs, p, variant, search == "catalog" ? PovmFamily::kCatalog : PovmFamily::kParameterized,
                     domain, inner, outer, cfg.at("outcomes").get<int>());
  } else {
    throw Error(ErrorCode::kConfigError, "search must be fixed, catalog or parameterized");
  }
  double wall = now_seconds() - t0;
  CommandResult res;
  res.report = gamma_report_to_json(rep);
  res.report["d"] = d;
  res.report["m"] = obs.size();
  res.report["wall_seconds"] = wall;
  res.csv = csv_join({"d", "m", "p", "variant", "value", "bound", "method", "wall_seconds"});
  res.csv += csv_join({std::to_string(d), std::to_string(obs.size()), fmt(p), to_string(variant), fmt(rep.value),
                       to_string(rep.bound), to_string(rep.method), fmt(wall)});
  res.summary = "Gamma_" + fmt(p) + "^" + to_string(variant) + " = " + fmt(rep.value) + " (" +
                to_string(rep.bound) + " bound, " + rep.witness_povm + ")";
  return res;
}

CommandResult identity_table(const std::vector<IdentityResult>& results) {
  CommandResult res;
  res.report["identities"] = json::array();
  res.csv = csv_join({"identity", "anchor", "instances", "max_deviation", "tolerance", "pass"});
  bool all = true;
  std::ostringstream summary;
  for (const auto& r : results) {
    res.report["identities"].push_back({{"name", r.name},
                                        {"anchor", r.anchor},
                                        {"instances", r.instances},
                                        {"max_deviation", r.max_deviation},
                                        {"tolerance", r.tolerance},
                                        {"pass", r.pass}});
    res.csv += csv_join({r.name, "\"" + r.anchor + "\"", std::to_string(r.instances), fmt(r.max_deviation),
                         fmt(r.tolerance), r.pass ? "pass" : "FAIL"});
    summary << (r.pass ? "pass " : "FAIL ") << r.name << "  max deviation " << fmt(r.max_deviation) << "\n";
    all = all && r.pass;
  }
  res.report["all_pass"] = all;
  res.exit_code = all ? kExitOk : kExitIdentityFailure;
  res.summary = summary.str();
  return res;
}

CommandResult cmd_identities(const json& cfg) {
  std::string conv = cfg.at("convention").get<std::string>();
  if (conv != "derivative" && conv != "scaled") {
    throw Error(ErrorCode::kConfigError, "convention must be \"derivative\" or \"scaled\"");
  }
  auto dims = cfg.at("dims").get<std::vector<int>>();
  for (int d : dims) {
    if (d < 2 || d > 4) throw Error(ErrorCode::kConfigError, "identity dims must be in [2, 4]");
  }
  return identity_table(run_identity_suites(dims, cfg.at("instances").get<int>(),
                                            conv == "scaled" ? FimConvention::kScaled : FimConvention::kDerivative,
                                            seed_of(cfg), cfg.at("tolerance").get<double>()));
}

CommandResult cmd_ccopy(const json& cfg) {
  auto dims = cfg.at("dims").get<std::vector<int>>();
  for (int d : dims) {
    if (d < 2 || d > 3) throw Error(ErrorCode::kConfigError, "c-copy dims must be 2 or 3");
  }
  return identity_table(run_ccopy_suites(dims, cfg.at("instances").get<int>(), cfg.at("outcomes").get<int>(),
                                         cfg.at("max_depth").get<int>(), seed_of(cfg),
                                         cfg.at("tolerance").get<double>()));
}

ShadowConfig shadow_config(const json& cfg, const ObservableSet& obs) {
  ShadowConfig sc;
  sc.obs = obs;
  sc.p = norm_from_json(cfg.at("p"));
  sc.epsilon = cfg.at("epsilon").get<double>();
  sc.delta = cfg.at("delta").get<double>();
  if (!(sc.epsilon > 0) || !(sc.delta > 0 && sc.delta < 1)) {
    throw Error(ErrorCode::kConfigError, "need epsilon > 0 and 0 < delta < 1");
  }
  sc.measurement = parse_measurement(cfg.at("measurement").get<std::string>(), obs.dim(),
                                     cfg.at("proxy_factor").get<int>(), seed_of(cfg));
  sc.n0 = cfg.at("n0").get<size_t>();
  sc.n1 = cfg.at("n1").get<size_t>();
  sc.k = cfg.at("k").get<size_t>();
  sc.b = cfg.at("b").get<size_t>();
  if (sc.n0 == 0 || sc.n1 == 0) throw Error(ErrorCode::kConfigError, "n0 and n1 must be positive");
  sc.seed = seed_of(cfg);
  return sc;
}

CommandResult run_trials(const json& cfg, bool oblivious) {
  ObservableSet obs = parse_observables(cfg);
  ShadowConfig sc = shadow_config(cfg, obs);
  DensityMatrix rho = parse_state(cfg.at("state"), obs.dim());
  RVec alpha;
  if (oblivious) {
    double q = conjugate_exponent(sc.p);
    if (cfg.at("alpha").is_null()) {
      alpha = RVec::Ones(obs.size()) / (std::isinf(q) ? 1.0 : std::pow(obs.size(), 1.0 / q));
    } else {
      alpha = vec_from_json(cfg.at("alpha"));
    }
  }
  const int trials = cfg.at("trials").get<int>();
  if (trials < 1) throw Error(ErrorCode::kConfigError, "trials must be positive");
  CommandResult res;
  res.report["runs"] = json::array();
  res.csv = csv_join({"trial", "seed", "p_norm_error", "success", "coarse_ok", "N0", "N1", "K", "B"});
  int wins = 0;
  for (int t = 0; t < trials; t++) {
    ShadowConfig c = sc;
    c.seed = sc.seed + t;
    RunReport r = oblivious ? run_oblivious(c, rho, alpha) : run_shadow_tomography(c, rho);
    wins += r.success;
    res.report["runs"].push_back(run_report_to_json(r));
    res.csv += csv_join({std::to_string(t), std::to_string(r.seed), fmt(r.p_norm_error), r.success ? "1" : "0",
                         r.coarse_ok ? "1" : "0", std::to_string(r.n0), std::to_string(r.n1), std::to_string(r.k),
                         std::to_string(r.b)});
  }
  if (oblivious) res.report["alpha"] = vec_to_json(alpha);
  res.report["success_rate"] = static_cast<double>(wins) / trials;
  res.summary = "success rate " + fmt(static_cast<double>(wins) / trials) + " over " + std::to_string(trials) +
                " trial(s)";
  return res;
}

CommandResult cmd_sweep(const json& cfg) {
  int n = cfg.at("n_qubits").get<int>();
  if (n < 1 || n > 2) throw Error(ErrorCode::kConfigError, "sweep supports 1 or 2 qubits");
  ObservableSet obs = pauli_observables(n);
  const int d = obs.dim();
  json sc_json = cfg;
  sc_json["epsilon"] = 1.0;
  sc_json["n1"] = 1;
  sc_json["k"] = 0;
  sc_json["b"] = 0;
  sc_json["proxy_factor"] = 50;
  ShadowConfig base = shadow_config(sc_json, obs);
  DensityMatrix rho = parse_state(cfg.at("state"), d);
  const int trials = cfg.at("trials").get<int>();
  const size_t n_min = cfg.at("n_min").get<size_t>();
  const size_t n_max = cfg.at("n_max").get<size_t>();
  if (trials < 1 || n_min < 1 || n_max < n_min) throw Error(ErrorCode::kConfigError, "bad trial or N range");
  auto epsilons = cfg.at("epsilons").get<std::vector<double>>();

  // Regime check: Gamma^ob at the measurement, evaluated at I/d.
  double gamma_ob = gamma_for_fixed(StateModel(DensityMatrix::maximally_mixed(d), obs), base.measurement, base.p,
                                    Variant::kOb);
  double eta_bar_ob = threshold_eta_bar(gamma_ob, d, obs.size(), Variant::kOb);

  std::vector<PreparedRun> prepared;
  std::vector<ShadowConfig> configs;
  for (int t = 0; t < trials; t++) {
    ShadowConfig c = base;
    c.seed = base.seed + t;
    configs.push_back(c);
    prepared.push_back(prepare_run(c, rho));
  }
  auto rate = [&](size_t n1, double eps) {
    int wins = 0;
    for (int t = 0; t < trials; t++) {
      ShadowConfig c = configs[t];
      c.n1 = n1;
      c.epsilon = eps;
      wins += finish_shadow_tomography(c, prepared[t], rho).success;
    }
    return static_cast<double>(wins) / trials;
  };
  const double target = 1.0 - base.delta;
  CommandResult res;
  res.csv = csv_join({"epsilon", "n1", "success_rate", "regime"});
  res.report["rows"] = json::array();
  std::vector<double> xs, ys;
  for (double eps : epsilons) {
    bool in_regime = eps <= eta_bar_ob;
    size_t lo = n_min, hi = n_max;
    double hi_rate = rate(hi, eps);
    bool reached = hi_rate >= target;
    if (reached) {
      if (rate(lo, eps) >= target) {
        hi = lo;
      } else {
        while (static_cast<double>(hi) / lo > 1.02 && hi - lo > 1) {
          size_t mid = static_cast<size_t>(std::sqrt(static_cast<double>(lo) * hi));
          mid = std::clamp(mid, lo + 1, hi - 1);
          double r = rate(mid, eps);
          if (r >= target) {
            hi = mid;
            hi_rate = r;
          } else {
            lo = mid;
          }
        }
      }
      hi_rate = rate(hi, eps);
    }
    std::string regime = in_regime ? "in regime" : "outside regime";
    res.csv += csv_join({fmt(eps), reached ? std::to_string(hi) : "not reached", fmt(hi_rate), regime});
    res.report["rows"].push_back({{"epsilon", eps},
                                  {"n1", reached ? json(hi) : json(nullptr)},
                                  {"success_rate", hi_rate},
                                  {"regime", regime}});
    if (reached && in_regime) {
      xs.push_back(std::log(1.0 / eps));
      ys.push_back(std::log(static_cast<double>(hi)));
    }
  }
  double slope = std::nan("");
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); i++) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= xs.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < xs.size(); i++) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    slope = sxy / sxx;
  }
  res.report["slope"] = std::isnan(slope) ? json(nullptr) : json(slope);
  res.report["eta_bar_ob"] = eta_bar_ob;
  res.report["gamma_ob_at_center"] = gamma_ob;
  res.summary = "fitted slope of log N vs log(1/eps): " + (std::isnan(slope) ? std::string("n/a") : fmt(slope));
  return res;
}

CommandResult cmd_pauli(const json& cfg) {
  double p = norm_from_json(cfg.at("p"));
  const int c = cfg.at("c").get<int>();
  if (c < 1) throw Error(ErrorCode::kConfigError, "c must be positive");
  SearchBudget budget{cfg.at("budget").get<int>(), cfg.at("restarts").get<int>(), seed_of(cfg), false};
  CommandResult res;
  res.csv = csv_join({"n", "d", "gamma2_ob", "bracket_lo", "bracket_hi", "in_bracket", "eta_ob", "eta_ob_formula",
                      "a_max", "a_max_bound", "gamma_p_ob", "eta_ob_c"});
  res.report["rows"] = json::array();
  std::vector<double> gammas;
  for (int n : cfg.at("qubits").get<std::vector<int>>()) {
    if (n < 1 || n > 3) throw Error(ErrorCode::kConfigError, "qubits must be in [1, 3]");
    ObservableSet obs = pauli_observables(n);
    const int d = obs.dim();
    Povm proxy = finite_haar_proxy(d, cfg.at("proxy_factor").get<int>() * d * d, seed_of(cfg) + n);
    GammaReport g2 = sup_over_rho0(obs, proxy, 2.0, Variant::kOb, Rho0Domain::kFullRank, budget);
    GammaReport gp = p == 2.0 ? g2 : sup_over_rho0(obs, proxy, p, Variant::kOb, Rho0Domain::kFullRank, budget);
    auto grid = s_half_grid(d, seed_of(cfg), cfg.at("grid_pure").get<int>(), cfg.at("grid_mixed").get<int>());
    double eta = threshold_eta_ob(obs, p, grid, proxy);
    double q = conjugate_exponent(p);
    double eta_formula = (1.0 / 6.0) * (std::isinf(q) ? 1.0 : std::pow(d * d - 1.0, -1.0 / q));
    double a_max = threshold_a_max(obs, p, grid, proxy, seed_of(cfg));
    double a_bound = p < 2.0 ? 2.0 : (std::isinf(p) ? 2.0 * d * d : 2.0 * std::pow(d, 2.0 - 4.0 / p));
    double eta_c = threshold_eta_ob_c(a_max, gp.value, c);
    double lo = 0.5 * d, hi = 6.0 * d * std::log(static_cast<double>(d));
    bool in = g2.value >= lo && g2.value <= hi;
    gammas.push_back(g2.value);
    res.csv += csv_join({std::to_string(n), std::to_string(d), fmt(g2.value), fmt(lo), fmt(hi), in ? "1" : "0",
                         fmt(eta), fmt(eta_formula), fmt(a_max), fmt(a_bound), fmt(gp.value), fmt(eta_c)});
    res.report["rows"].push_back({{"n", n},
                                  {"d", d},
                                  {"gamma2_ob", g2.value},
                                  {"gamma2_ob_bound", "lower"},
                                  {"bracket", {lo, hi}},
                                  {"in_bracket", in},
                                  {"eta_ob", eta},
                                  {"eta_ob_formula", eta_formula},
                                  {"a_max", a_max},
                                  {"a_max_bound", a_bound},
                                  {"gamma_p_ob", gp.value},
                                  {"eta_ob_c", eta_c},
                                  {"c", c}});
  }
  json ratios = json::array();
  for (size_t i = 1; i < gammas.size(); i++) ratios.push_back(gammas[i] / gammas[i - 1]);
  res.report["ratios"] = ratios;
  res.summary = "Pauli scaling table with " + std::to_string(gammas.size()) + " row(s)";
  return res;
}

CommandResult cmd_thresholds(const json& cfg) {
  ObservableSet obs = parse_observables(cfg);
  const int d = obs.dim();
  double p = norm_from_json(cfg.at("p"));
  const int c = cfg.at("c").get<int>();
  SearchBudget budget{cfg.at("budget").get<int>(), cfg.at("restarts").get<int>(), seed_of(cfg), false};
  std::string m_name = cfg.at("m_star").get<std::string>();
  Povm m_star;
  GammaReport ob;
  if (m_name == "catalog") {
    ob = inf_over_M(obs, p, Variant::kOb, PovmFamily::kCatalog, Rho0Domain::kHalf, budget, budget);
    m_star = *ob.povm;
    m_name = ob.witness_povm;
  } else {
    m_star = parse_measurement(m_name, d, cfg.at("proxy_factor").get<int>(), seed_of(cfg));
    ob = sup_over_rho0(obs, m_star, p, Variant::kOb, Rho0Domain::kHalf, budget);
  }
  GammaReport full = sup_over_rho0(obs, m_star, p, Variant::kFull, Rho0Domain::kHalf, budget);
  auto grid = s_half_grid(d, seed_of(cfg), cfg.at("grid_pure").get<int>(), cfg.at("grid_mixed").get<int>());
  ThresholdReport tr = compute_thresholds(obs, p, grid, m_star, full.value, ob.value, c);
  CommandResult res;
  res.report = threshold_report_to_json(tr);
  res.report["m_star"] = m_name;
  res.report["gamma_ob"] = gamma_report_to_json(ob);
  res.report["gamma_full"] = gamma_report_to_json(full);
  res.csv = csv_join({"d", "m", "p", "c", "m_star", "eta_ob", "a_max", "eta_ob_c", "eta_bar", "eta_bar_ob"});
  res.csv += csv_join({std::to_string(d), std::to_string(obs.size()), fmt(p), std::to_string(c), m_name,
                       fmt(tr.eta_ob), fmt(tr.a_max), fmt(tr.eta_ob_c), fmt(tr.eta_bar), fmt(tr.eta_bar_ob)});
  res.summary = "eta_ob = " + fmt(tr.eta_ob) + " (upper), a_max = " + fmt(tr.a_max) + " (lower), M* = " + m_name;
  return res;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gamma",    "identities", "sweep",     "pauli",
                                                 "ccopy",    "estimate",   "oblivious", "thresholds"};
  return names;
}

json command_defaults(const std::string& command) {
  auto it = defaults_table().find(command);
  if (it == defaults_table().end()) throw Error(ErrorCode::kConfigError, "unknown command \"" + command + "\"");
  return it->second;
}

json resolve_config(const std::string& command, const json& user) {
  json out = command_defaults(command);
  if (user.is_null()) return out;
  if (!user.is_object()) throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  for (const auto& [key, val] : user.items()) {
    if (!out.contains(key)) throw Error(ErrorCode::kConfigError, "unknown config key \"" + key + "\"");
    if (!type_compatible(key, out[key], val)) {
      throw Error(ErrorCode::kConfigError, "config key \"" + key + "\" has the wrong type");
    }
    out[key] = val;
  }
  if (out.contains("p")) norm_from_json(out["p"]);
  return out;
}

std::string config_hash(const json& resolved) { return fnv1a_hex(resolved.dump()); }

CommandResult run_command(const std::string& command, const json& resolved) {
  if (command == "gamma") return cmd_gamma(resolved);
  if (command == "identities") return cmd_identities(resolved);
  if (command == "sweep") return cmd_sweep(resolved);
  if (command == "pauli") return cmd_pauli(resolved);
  if (command == "ccopy") return cmd_ccopy(resolved);
  if (command == "estimate") return run_trials(resolved, false);
  if (command == "oblivious") return run_trials(resolved, true);
  if (command == "thresholds") return cmd_thresholds(resolved);
  throw Error(ErrorCode::kConfigError, "unknown command \"" + command + "\"");
}

CMat random_density(int d, std::mt19937_64& rng, double floor) {
  std::normal_distribution<double> g;
  CMat z(d, d);
  for (int i = 0; i < d; i++) {
    for (int j = 0; j < d; j++) z(i, j) = cplx(g(rng), g(rng));
  }
  CMat r = z * z.adjoint();
  r /= r.trace().real();
  r = (1.0 - floor * d) * r + floor * CMat::Identity(d, d);
  return 0.5 * (r + r.adjoint());
}

ObservableSet random_observables(int d, int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<HermitianOp> ops;
  for (int k = 0; k < m; k++) {
    CMat z(d, d);
    for (int i = 0; i < d; i++) {
      for (int j = 0; j < d; j++) z(i, j) = cplx(g(rng), g(rng));
    }
    CMat h = 0.5 * (z + z.adjoint());
    h -= (h.trace() / static_cast<double>(d)) * CMat::Identity(d, d);
    ops.emplace_back(CMat(0.5 * (h + h.adjoint())));
  }
  return ObservableSet(d, std::move(ops));
}

RMat random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RMat a(n, n);
  for (int i = 0; i < n; i++) {
    for (int j = 0; j < n; j++) a(i, j) = g(rng);
  }
  return a * a.transpose() / n + 0.1 * RMat::Identity(n, n);
}

namespace {

struct Tracker {
  IdentityResult r;
  void see(double dev) {
    r.max_deviation = std::max(r.max_deviation, dev);
    r.instances++;
  }
  IdentityResult done() {
    r.pass = r.max_deviation <= r.tolerance;
    return r;
  }
};

Tracker tracker(const std::string& name, const std::string& anchor, double tol) {
  Tracker t;
  t.r.name = name;
  t.r.anchor = anchor;
  t.r.tolerance = tol;
  return t;
}

// A random (theta, phi) with rho_{theta,phi} positive definite.
RVec random_direction_inside(const StateModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const int n = model.num_a() + model.num_b();
  RVec v(n);
  for (int i = 0; i < n; i++) v[i] = g(rng);
  auto ops = model.basis().all();
  CMat delta = CMat::Zero(model.dim(), model.dim());
  for (int i = 0; i < n; i++) delta += (v[i] / model.dim()) * ops[i];
  double t = 0.9 * min_eigenvalue(model.rho0().mat()) / operator_norm(delta);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  return v * t * u(rng);
}

int random_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

AdaptiveNode random_tree(int depth, std::mt19937_64& rng) {
  AdaptiveNode node{random_joint_povm(2, 1, random_int(rng, 2, 3), rng()), {}, {}};
  if (depth > 1) {
    for (size_t x = 0; x < node.povm.size(); x++) node.children.push_back(random_tree(depth - 1, rng));
  }
  return node;
}

}  // namespace

std::vector<IdentityResult> run_identity_suites(const std::vector<int>& dims, int instances, FimConvention convention,
                                                uint64_t seed, double tolerance) {
  std::vector<IdentityResult> out;
  std::mt19937_64 rng = substream(seed, 0x1d);

  auto chi2 = tracker("chi2_exact", "chi-square divergence equals the FIM quadratic form on the linear family",
                      tolerance);
  auto duality = tracker("duality", "min distinguishing cost times max oblivious variance equals one", 1e-6);
  auto invariance = tracker("basis_invariance", "Schur restriction is invariant under admissible basis changes",
                            tolerance);
  auto relation = tracker("gamma_relation", "Gamma^ob_p <= Gamma_p, with equality at p = inf", 1e-10);
  auto unbiased = tracker("local_unbiasedness", "local estimator is exactly unbiased on the symmetric neighborhood",
                          1e-10);
  auto mixing = tracker("mixing_bound", "I(rho/2 + I/2d, M) <= 2 I(rho, M)", 1e-9);

  for (int d : dims) {
    const int n = d * d - 1;
    for (int it = 0; it < instances; it++) {
      int m = random_int(rng, 1, std::min(n, 6));
      ObservableSet obs = random_observables(d, m, rng);
      StateModel model(DensityMatrix(random_density(d, rng, 0.02)), obs);
      Povm povm = random_joint_povm(d, 1, random_int(rng, d * d, d * d + 3), rng());
      FisherInfo info = fim(model, povm, convention);

      RVec v = random_direction_inside(model, rng);
      CMat rho = parameterize(model, v.head(m), v.tail(n - m)).mat();
      double quad = v.dot(info.matrix * v);
      double c2 = chi2_divergence(povm, rho, model.rho0().mat());
      chi2.see(std::abs(c2 - quad) / std::max(std::abs(quad), 1e-300));

      FisherInfo ref = convention == FimConvention::kDerivative ? info : fim(model, povm);
      SchurRestriction sr = schur_restriction(ref);
      for (int t = 0; t < 5; t++) {
        std::normal_distribution<double> g;
        RMat c1(n - m, m), c2m(n - m, n - m);
        for (int i = 0; i < n - m; i++) {
          for (int j = 0; j < m; j++) c1(i, j) = g(rng);
          for (int j = 0; j < n - m; j++) c2m(i, j) = g(rng) + (i == j ? 3.0 : 0.0);
        }
        StateModel moved(model.rho0(), obs, basis_transform(model.basis(), c1, c2m));
        SchurRestriction sr2 = schur_restriction(fim(moved, povm));
        invariance.see((sr.matrix - sr2.matrix).cwiseAbs().maxCoeff() / std::max(1.0, sr.matrix.cwiseAbs().maxCoeff()));
      }

      for (double p : {1.0, 2.0, 3.0, kInf}) {
        double full = gamma_from_restriction(sr, p, Variant::kFull);
        double ob = gamma_from_restriction(sr, p, Variant::kOb);
        relation.see(std::max(0.0, ob - full) / std::max(1.0, full));
        if (std::isinf(p)) relation.see(std::abs(ob - full) / std::max(1.0, full));
      }

      LocalEstimator est(model, povm);
      for (int k = 0; k < 5; k++) {
        CMat sigma = random_density(d, rng);
        double lam = min_eigenvalue(model.rho0().mat());
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        CMat pt = model.rho0().mat() + u(rng) * lam * (sigma - model.rho0().mat());
        RVec theta = extract_params(model, pt).theta;
        RVec probs = outcome_probs(povm, pt);
        RVec mean = est.coeffs() * probs;
        unbiased.see((mean - theta).cwiseAbs().maxCoeff());
      }

      CMat sigma = random_density(d, rng, 0.01);
      StateModel at_sigma(DensityMatrix(sigma), obs);
      StateModel at_half(mix_with_maximally_mixed(DensityMatrix(sigma)), obs);
      RMat lhs = fim(at_half, povm).matrix;
      RMat rhs = fim(at_sigma, povm).matrix;
      mixing.see(std::max(0.0, -sym_min_eigenvalue(2.0 * rhs - lhs)) / std::max(1.0, rhs.norm()));
    }
  }
  for (int it = 0; it < instances; it++) {
    int na = random_int(rng, 1, 6);
    int nb = random_int(rng, 0, 6);
    FisherInfo info{random_spd(na + nb, rng), na, nb, "random", {}};
    SchurRestriction sr = schur_restriction(info);
    std::vector<std::pair<double, double>> pairs = {{2.0, 2.0}, {kInf, 1.0}, {1.0, kInf}};
    for (auto [p, q] : pairs) {
      double lo = dual_min_over_p_sphere(info, p, it).value;
      double hi = quad_max_over_q_ball(sr.matrix, q, it).value;
      duality.see(std::abs(lo * hi - 1.0));
    }
  }
  out.push_back(chi2.done());
  out.push_back(duality.done());
  out.push_back(invariance.done());
  out.push_back(relation.done());
  out.push_back(unbiased.done());
  out.push_back(mixing.done());
  return out;
}

std::vector<IdentityResult> run_ccopy_suites(const std::vector<int>& dims, int instances, int outcomes,
                                             int max_depth, uint64_t seed, double tolerance) {
  std::vector<IdentityResult> out;
  std::mt19937_64 rng = substream(seed, 0xcc);
  auto first = tracker("c_copy_first_order", "c-copy first-order term equals the single-copy functional of G",
                       std::max(tolerance, 1e-9));
  auto dom = tracker("c_copy_domination", "c^2 I(rho0, G) dominates I(rho0^c, M)", tolerance);
  auto flat = tracker("adaptive_flattening", "N I(rho0, M~) equals the adaptive-tree FIM", tolerance);
  for (int d : dims) {
    for (int it = 0; it < instances; it++) {
      int m = random_int(rng, 1, d * d - 1);
      StateModel model(DensityMatrix(random_density(d, rng, 0.02)), random_observables(d, m, rng));
      Povm joint = random_joint_povm(d, 2, outcomes, rng());
      RVec v = random_direction_inside(model, rng);
      auto [lhs, rhs] = c_copy_first_order_check(joint, model, v.head(m), v.tail(d * d - 1 - m));
      first.see(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      dom.see(std::max(0.0, -c_copy_domination_margin(joint, model)));
    }
  }
  StateModel qubit(DensityMatrix::maximally_mixed(2), pauli_observables(1));
  dom.see(std::max(0.0, -c_copy_domination_margin(bell_basis_povm(), qubit)));
  for (int depth = 1; depth <= max_depth; depth++) {
    for (int it = 0; it < std::max(1, instances / 5); it++) {
      StateModel model(DensityMatrix(random_density(2, rng, 0.05)), pauli_observables(1));
      AdaptiveNode tree = random_tree(depth, rng);
      Povm flat_povm = flatten_adaptive(tree, model.rho0());
      RMat lhs = static_cast<double>(depth) * fim(model, flat_povm).matrix;
      RMat rhs = adaptive_fim(model, tree).matrix;
      flat.see((lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));
    }
  }
  out.push_back(first.done());
  out.push_back(dom.done());
  out.push_back(flat.done());
  return out;
}

}  // namespace fshadow
