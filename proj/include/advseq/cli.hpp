#pragma once

// Command-line front end: problem ingestion, command dispatch, and result
// emission. run_cli is the whole program minus main(), so tests drive it
// in-process.
//
// Exit codes: 0 ok, 1 usage, 2 validation, 3 infeasible spec, 4 resource
// budget, 5 a certificate failed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "advseq/adversary.hpp"
#include "advseq/defaults.hpp"
#include "advseq/error.hpp"
#include "advseq/geometry.hpp"
#include "advseq/oracle.hpp"
#include "advseq/prob.hpp"
#include "advseq/sequential_test.hpp"
#include "advseq/simulation.hpp"

namespace advseq::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitInfeasible = 3,
  kExitResource = 4,
  kExitCertifyFailed = 5,
};

/// Bad flag combination detected after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kSimulateHeader =
    "regime,kind,n,alpha0,alpha1,delta,beta,r,strategy_h0,strategy_h1,trials,seed,horizon,"
    "errors_h0,err_rate_h0,err_lo_h0,err_hi_h0,errors_h1,err_rate_h1,err_lo_h1,err_hi_h1,"
    "mean_tau_h0,se_tau_h0,mean_tau_h1,se_tau_h1,truncation_rate,empirical_E0,empirical_E1,"
    "estimate";

inline constexpr const char* kSweepHeader =
    "regime,n,alpha0,alpha1,delta,beta,r,trials,horizon,err_h0,err_h1,mean_tau_h0,mean_tau_h1,"
    "worst_h0,worst_h1,empirical_E0,empirical_E1,region_E0,region_E1,inside_region,estimate";

inline constexpr const char* kReportHeader = "curve,source,E0,E1,n,parameter";

// ---------------------------------------------------------------------------
// Formatting helpers.

/// Shortest-enough text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

inline std::string join_csv(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline Regime parse_regime(const std::string& s) {
  if (s == "theorem1") return Regime::theorem1;
  if (s == "theorem2") return Regime::theorem2;
  if (s == "theorem3") return Regime::theorem3;
  if (s == "fixed") return Regime::fixed;
  throw UsageError("unknown regime '" + s + "' (theorem1|theorem2|theorem3|fixed)");
}

// ---------------------------------------------------------------------------
// Problem files.

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                             std::min(byte, text.size())),
                            '\n'));
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": line " + std::to_string(line_of(text, e.byte)) +
                     ": invalid JSON (" + e.what() + ")");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ConvexSet parse_vertex_list(const json& doc, const char* field, std::size_t k,
                                   const std::string& source) {
  if (!doc.contains(field))
    throw ParseError(source + ": missing field \"" + field + "\"");
  const json& list = doc.at(field);
  if (!list.is_array() || list.empty())
    throw ParseError(source + ": field \"" + field + "\" must be a non-empty list of vertices");
  std::vector<Distribution> vertices;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = source + ": " + field + "[" + std::to_string(i) + "]";
    const json& v = list[i];
    if (!v.is_array()) throw ParseError(where + ": vertex must be a list of probabilities");
    if (v.size() != k)
      throw ValidationError(where + ": has " + std::to_string(v.size()) +
                            " entries, alphabet_size is " + std::to_string(k));
    std::vector<double> probs;
    for (std::size_t x = 0; x < v.size(); ++x) {
      if (!v[x].is_number())
        throw ParseError(where + "[" + std::to_string(x) + "]: not a number");
      probs.push_back(v[x].get<double>());
    }
    try {
      vertices.emplace_back(std::move(probs));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return ConvexSet(std::move(vertices));
}

/// {"alphabet_size": k, "P": [[...], ...], "Q": [[...], ...]}
inline std::pair<ConvexSet, ConvexSet> parse_problem(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw ParseError(source + ": top level must be a JSON object");
  if (!doc.contains("alphabet_size"))
    throw ParseError(source + ": missing field \"alphabet_size\"");
  const json& ks = doc.at("alphabet_size");
  if (!ks.is_number_integer() || ks.get<long long>() < 2)
    throw ValidationError(source + ": alphabet_size must be an integer >= 2");
  const auto k = static_cast<std::size_t>(ks.get<long long>());
  return {parse_vertex_list(doc, "P", k, source), parse_vertex_list(doc, "Q", k, source)};
}

inline std::pair<ConvexSet, ConvexSet> load_problem(const std::string& path) {
  return parse_problem(parse_json_text(read_file(path), path), path);
}

inline json to_json(const Distribution& d) {
  json a = json::array();
  for (double v : d.probs()) a.push_back(v);
  return a;
}

inline json to_json(const ConvexSet& s) {
  json a = json::array();
  for (const auto& v : s.vertices()) a.push_back(to_json(v));
  return a;
}

inline json to_json(const ClosestPairResult& r) {
  return {{"direction", to_string(r.direction)},
          {"p_star", to_json(r.p_star)},
          {"q_star", to_json(r.q_star)},
          {"p_weights", r.p_weights},
          {"q_weights", r.q_weights},
          {"divergence", r.divergence},
          {"converged", r.converged},
          {"iterations", r.iterations}};
}

inline json region_json(const ProblemInstance& inst) {
  json out = json::object();
  for (Regime g : {Regime::theorem1, Regime::theorem2, Regime::theorem3}) {
    const auto r = exponent_region(inst, g);
    json e = {{"corner", {r.corner.first, r.corner.second}}};
    if (g == Regime::theorem1) e["product_bound"] = r.product_bound;
    out[to_string(g)] = e;
  }
  return out;
}

/// Solved instance, loadable again as a problem file.
inline json instance_to_json(const ProblemInstance& inst) {
  return {{"alphabet_size", inst.alphabet_size()},
          {"P", to_json(inst.P)},
          {"Q", to_json(inst.Q)},
          {"forward_pair", to_json(inst.forward_pair)},
          {"reverse_pair", to_json(inst.reverse_pair)},
          {"c_fwd", inst.c_fwd},
          {"c_rev", inst.c_rev},
          {"regions", region_json(inst)}};
}

inline ClosestPairResult pair_from_json(const json& j, const ConvexSet& P, const ConvexSet& Q,
                                        Direction dir, const std::string& where) {
  try {
    auto pw = j.at("p_weights").get<std::vector<double>>();
    auto qw = j.at("q_weights").get<std::vector<double>>();
    Distribution p(j.at("p_star").get<std::vector<double>>());
    Distribution q(j.at("q_star").get<std::vector<double>>());
    require_same_alphabet(p, P.vertex(0));
    require_same_alphabet(q, Q.vertex(0));
    const double d = dir == Direction::forward ? kl_divergence(p, q) : kl_divergence(q, p);
    return {std::move(p), std::move(q), std::move(pw), std::move(qw), d, dir,
            j.value("converged", true), j.value("iterations", 0), {}};
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

/// Rebuilds an instance from solve output without re-solving; a plain problem
/// file is solved.
inline ProblemInstance instance_from_json(const json& doc, const std::string& source,
                                          double tol = defaults::kSolverTolerance) {
  auto [P, Q] = parse_problem(doc, source);
  if (!doc.contains("forward_pair") || !doc.contains("reverse_pair"))
    return build_instance(P, Q, tol);
  auto fwd = pair_from_json(doc.at("forward_pair"), P, Q, Direction::forward,
                            source + ": forward_pair");
  auto rev = pair_from_json(doc.at("reverse_pair"), P, Q, Direction::reverse,
                            source + ": reverse_pair");
  return ProblemInstance::from_pairs(std::move(P), std::move(Q), std::move(fwd), std::move(rev));
}

// ---------------------------------------------------------------------------
// Options shared by all commands.

struct Options {
  std::string problem;
  std::string regime = "theorem1";
  double n = 10.0;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double delta = 0.1;
  double beta = 1e-3;
  double r = 0.1;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 1;
  std::uint64_t horizon = 0;
  unsigned workers = 1;
  std::string out;
  std::string format;
  double tol = defaults::kSolverTolerance;
  std::size_t state_budget = defaults::kStateBudget;
  std::string strategy = "family";
  std::vector<double> n_ladder{5.0, 10.0, 20.0};
  std::vector<std::string> alphas{"1:1"};
  std::vector<std::string> inputs;
  int points = 21;
};

struct Emitter {
  const Options& opt;
  std::ostream& out;

  void write(const std::string& text) const {
    if (opt.out.empty()) {
      out << text;
      return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw ParseError(opt.out + ": cannot open for writing");
    f << text;
  }
};

inline std::string require_format(const Options& opt, const std::string& fallback,
                                  std::initializer_list<const char*> allowed) {
  const std::string f = opt.format.empty() ? fallback : opt.format;
  for (const char* a : allowed)
    if (f == a) return f;
  throw UsageError("--format " + f + " is not supported by this command");
}

inline ProblemInstance load_instance(const Options& opt) {
  if (opt.problem.empty()) throw UsageError("--problem is required");
  const std::string text = read_file(opt.problem);
  return instance_from_json(parse_json_text(text, opt.problem), opt.problem, opt.tol);
}

inline TestSpec spec_from(const Options& opt, Regime regime) {
  switch (regime) {
    case Regime::theorem1: return ExpectationSpec{opt.alpha0, opt.alpha1, opt.n};
    case Regime::theorem2: return ProbConstraintSpec{opt.delta, opt.n};
    case Regime::theorem3: return ErrorConstraintSpec{opt.beta};
    case Regime::fixed: {
      if (opt.n < 1 || std::floor(opt.n) != opt.n)
        throw UsageError("--n must be a positive integer for the fixed regime");
      return FixedLengthSpec{static_cast<std::uint64_t>(opt.n), opt.r};
    }
  }
  throw UsageError("unknown regime");
}

inline std::vector<AdversaryStrategy::Kind> strategies_from(const std::string& name) {
  if (name == "family") return sweep_family();
  if (name == "optimal_pair_forward") return {OptimalPairForward{}};
  if (name == "optimal_pair_reverse") return {OptimalPairReverse{}};
  if (name == "greedy_drift") return {GreedyDrift{}};
  const std::string prefix = "static_vertex:";
  if (name.rfind(prefix, 0) == 0) {
    try {
      return {StaticVertex{static_cast<std::size_t>(std::stoul(name.substr(prefix.size())))}};
    } catch (const std::logic_error&) {
    }
  }
  throw UsageError("unknown strategy '" + name +
                   "' (family|optimal_pair_forward|optimal_pair_reverse|greedy_drift|"
                   "static_vertex:I)");
}

// ---------------------------------------------------------------------------
// Commands.

inline int cmd_solve(const Options& opt, std::ostream& out) {
  require_format(opt, "json", {"json"});
  const auto inst = load_instance(opt);
  Emitter{opt, out}.write(instance_to_json(inst).dump(2) + "\n");
  return kExitOk;
}

inline json simulation_json(const SimulationResult& r) {
  auto hyp = [](const HypothesisStats& h) {
    return json{{"strategy", h.strategy},       {"errors", h.errors},
                {"err_rate", h.err_rate},       {"err_ci", {h.err_ci.lo, h.err_ci.hi}},
                {"truncated", h.truncated},     {"mean_tau", h.mean_tau},
                {"se_tau", h.se_tau}};
  };
  return {{"kind", to_string(r.kind)},
          {"trials", r.trials},
          {"seed", r.master_seed},
          {"horizon", r.horizon},
          {"h0", hyp(r.h0)},
          {"h1", hyp(r.h1)},
          {"truncation_rate", r.truncation_rate},
          {"empirical_E0", r.empirical_E0},
          {"empirical_E1", r.empirical_E1},
          {"estimate", "monte_carlo_lower_bound"}};
}

inline std::string simulation_csv_row(const Options& opt, Regime regime, const TestSpec& spec,
                                      const SimulationResult& r) {
  const bool t2 = regime == Regime::theorem2, t3 = regime == Regime::theorem3,
             fx = regime == Regime::fixed, t1 = regime == Regime::theorem1;
  return join_csv({to_string(regime), to_string(spec.kind()), fmt(opt.n),
                   t1 ? fmt(opt.alpha0) : "", t1 ? fmt(opt.alpha1) : "",
                   t2 ? fmt(opt.delta) : "", t3 ? fmt(opt.beta) : "", fx ? fmt(opt.r) : "",
                   r.h0.strategy, r.h1.strategy, fmt(r.trials), fmt(r.master_seed),
                   fmt(r.horizon), fmt(r.h0.errors), fmt(r.h0.err_rate), fmt(r.h0.err_ci.lo),
                   fmt(r.h0.err_ci.hi), fmt(r.h1.errors), fmt(r.h1.err_rate),
                   fmt(r.h1.err_ci.lo), fmt(r.h1.err_ci.hi), fmt(r.h0.mean_tau),
                   fmt(r.h0.se_tau), fmt(r.h1.mean_tau), fmt(r.h1.se_tau),
                   fmt(r.truncation_rate), fmt(r.empirical_E0), fmt(r.empirical_E1),
                   "monte_carlo_lower_bound"});
}

inline int cmd_simulate(const Options& opt, std::ostream& out) {
  const std::string format = require_format(opt, "csv", {"csv", "json"});
  const Regime regime = parse_regime(opt.regime);
  const auto kinds = strategies_from(opt.strategy);
  const auto inst = load_instance(opt);
  const TestSpec spec = spec_from(opt, regime);
  std::optional<HoeffdingSolution> hoeffding;
  if (regime == Regime::fixed) hoeffding = hardest_pair(inst.P, inst.Q, opt.r, opt.tol);
  const TrialConfig cfg{opt.trials, opt.seed, opt.horizon, opt.workers};

  std::string csv = std::string(kSimulateHeader) + "\n";
  json rows = json::array();
  for (const auto& kind : kinds) {
    const auto res = run_trials(spec, inst, AdversaryStrategy(kind, 0), AdversaryStrategy(kind, 1),
                                cfg, hoeffding ? &*hoeffding : nullptr);
    csv += simulation_csv_row(opt, regime, spec, res) + "\n";
    rows.push_back(simulation_json(res));
  }
  Emitter{opt, out}.write(format == "csv" ? csv : json{{"regime", opt.regime}, {"rows", rows}}.dump(2) + "\n");
  return kExitOk;
}

/// Theoretical point of the regime the sweep row is compared with.
inline std::pair<double, double> predicted_point(const ProblemInstance& inst, const SweepRow& row,
                                                 const HoeffdingSolution* hoeffding) {
  switch (row.regime) {
    case Regime::theorem1:
      return {row.alpha1 / row.alpha0 * inst.d_fwd(), row.alpha0 / row.alpha1 * inst.d_rev()};
    case Regime::theorem2: return {inst.d_rev(), inst.d_fwd()};
    case Regime::theorem3: return {inst.d_fwd(), inst.d_rev()};
    case Regime::fixed: return {hoeffding ? hoeffding->s_star : 0.0, row.r};
  }
  return {0.0, 0.0};
}

inline std::vector<std::pair<double, double>> parse_alphas(const std::vector<std::string>& specs) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : specs) {
    const auto parts = split(s, ':');
    try {
      if (parts.size() != 2) throw std::invalid_argument(s);
      out.emplace_back(std::stod(parts[0]), std::stod(parts[1]));
    } catch (const std::logic_error&) {
      throw UsageError("--alphas entries look like ALPHA0:ALPHA1, got '" + s + "'");
    }
  }
  return out;
}

inline int cmd_sweep(const Options& opt, std::ostream& out) {
  const std::string format = require_format(opt, "csv", {"csv", "json"});
  const Regime regime = parse_regime(opt.regime);
  const auto inst = load_instance(opt);
  SweepParams params;
  params.alphas = parse_alphas(opt.alphas);
  params.delta = opt.delta;
  params.r = opt.r;
  std::optional<HoeffdingSolution> hoeffding;
  if (regime == Regime::fixed) {
    for (double n : opt.n_ladder)
      if (n < 1 || std::floor(n) != n)
        throw UsageError("--n-ladder entries must be positive integers for the fixed regime");
    hoeffding = hardest_pair(inst.P, inst.Q, opt.r, opt.tol);
  }
  const auto rows = exponent_sweep(inst, regime, opt.n_ladder, params,
                                   {opt.trials, opt.seed, opt.horizon, opt.workers});
  std::string csv = std::string(kSweepHeader) + "\n";
  json arr = json::array();
  for (const auto& row : rows) {
    const auto [pe0, pe1] = predicted_point(inst, row, hoeffding ? &*hoeffding : nullptr);
    std::string inside = "na";
    if (regime != Regime::fixed)
      inside = exponent_region(inst, regime).contains(row.empirical_E0, row.empirical_E1, 0.1)
                   ? "true"
                   : "false";
    const bool t1 = regime == Regime::theorem1;
    csv += join_csv({to_string(regime), fmt(row.n), t1 ? fmt(row.alpha0) : "",
                     t1 ? fmt(row.alpha1) : "",
                     regime == Regime::theorem2 ? fmt(row.delta) : "",
                     regime == Regime::theorem3 ? fmt(row.beta) : "",
                     regime == Regime::fixed ? fmt(row.r) : "", fmt(row.trials),
                     fmt(row.horizon), fmt(row.err_h0), fmt(row.err_h1), fmt(row.mean_tau_h0),
                     fmt(row.mean_tau_h1), row.worst_h0, row.worst_h1, fmt(row.empirical_E0),
                     fmt(row.empirical_E1), fmt(pe0), fmt(pe1), inside,
                     "monte_carlo_lower_bound"}) +
           "\n";
    arr.push_back({{"regime", to_string(regime)},
                   {"n", row.n},
                   {"alpha0", row.alpha0},
                   {"alpha1", row.alpha1},
                   {"delta", row.delta},
                   {"beta", row.beta},
                   {"r", row.r},
                   {"trials", row.trials},
                   {"horizon", row.horizon},
                   {"err_h0", row.err_h0},
                   {"err_h1", row.err_h1},
                   {"mean_tau_h0", row.mean_tau_h0},
                   {"mean_tau_h1", row.mean_tau_h1},
                   {"worst_h0", row.worst_h0},
                   {"worst_h1", row.worst_h1},
                   {"empirical_E0", row.empirical_E0},
                   {"empirical_E1", row.empirical_E1},
                   {"region_point", {pe0, pe1}},
                   {"inside_region", inside},
                   {"estimate", "monte_carlo_lower_bound"}});
  }
  Emitter{opt, out}.write(format == "csv" ? csv : arr.dump(2) + "\n");
  return kExitOk;
}

/// Collects certificates; each records value, bound and the verdict.
class CertificateLog {
 public:
  void add(std::string name, json params, double value, double bound, bool pass,
           const char* method, json extra = json::object()) {
    json c = {{"name", std::move(name)}, {"method", method}, {"params", std::move(params)},
              {"value", value},          {"bound", bound},   {"pass", pass}};
    for (auto& [k, v] : extra.items()) c[k] = v;
    if (!pass) ++failures_;
    entries_.push_back(std::move(c));
  }

  void skip(std::string name, json params, std::string reason) {
    entries_.push_back({{"name", std::move(name)},
                        {"params", std::move(params)},
                        {"skipped", true},
                        {"reason", std::move(reason)}});
  }

  int failures() const noexcept { return failures_; }
  const json& entries() const noexcept { return entries_; }

 private:
  json entries_ = json::array();
  int failures_ = 0;
};

/// Every certificate inequality on one instance. Exact DP values are sup over
/// all adaptive adversaries at the stated horizon.
inline void certify_instance(const ProblemInstance& inst, std::uint64_t horizon, double r,
                             std::size_t budget, double tol, CertificateLog& log) {
  using defaults::kCertSlack;
  const char* exact = "exact_dp";
  const char* direct = "direct";

  // Pythagorean inequality and the submartingale drift, vertex by vertex.
  for (std::size_t i = 0; i < inst.P.vertex_count(); ++i) {
    const double s = check_pythagorean(inst, inst.P.vertex(i));
    log.add("pythagorean_forward", {{"vertex", i}}, s, -kCertSlack, s >= -kCertSlack, direct);
    const double d = check_submartingale_step(inst, 0, i);
    log.add("submartingale_drift_h0", {{"vertex", i}}, d, -kCertSlack, d >= -kCertSlack, direct);
  }
  for (std::size_t i = 0; i < inst.Q.vertex_count(); ++i) {
    const double s = check_pythagorean_reverse(inst, inst.Q.vertex(i));
    log.add("pythagorean_reverse", {{"vertex", i}}, s, -kCertSlack, s >= -kCertSlack, direct);
    const double d = check_submartingale_step(inst, 1, i);
    log.add("submartingale_drift_h1", {{"vertex", i}}, d, -kCertSlack, d >= -kCertSlack, direct);
  }
  {
    const double e0 = check_pythagorean(inst, inst.forward_pair.p_star);
    log.add("pythagorean_equality_forward", json::object(), std::abs(e0), kCertSlack,
            std::abs(e0) <= kCertSlack, direct);
    const double e1 = check_pythagorean_reverse(inst, inst.reverse_pair.q_star);
    log.add("pythagorean_equality_reverse", json::object(), std::abs(e1), kCertSlack,
            std::abs(e1) <= kCertSlack, direct);
  }
  // Likelihood-ratio expectations.
  for (std::size_t i = 0; i < inst.Q.vertex_count(); ++i) {
    const double v = check_likelihood_ratio_bound(inst, 0, i);
    log.add("likelihood_ratio_q", {{"vertex", i}}, v, 1 + kCertSlack, v <= 1 + kCertSlack, direct);
  }
  for (std::size_t i = 0; i < inst.P.vertex_count(); ++i) {
    const double v = check_likelihood_ratio_bound(inst, 1, i);
    log.add("likelihood_ratio_p", {{"vertex", i}}, v, 1 + kCertSlack, v <= 1 + kCertSlack, direct);
  }

  // Expectation-constrained test: errors, stopping times, stopped moments.
  for (double a0 : {0.25, 0.5})
    for (double a1 : {0.25, 0.5})
      for (double n : {4.0, 8.0, 12.0}) {
        const TestSpec spec = ExpectationSpec{a0, a1, n};
        const json params = {{"alpha0", a0}, {"alpha1", a1}, {"n", n}, {"horizon", horizon}};
        const double e0 = dp_worst_case(spec, inst, 0, Objective::error_prob, horizon, budget).value;
        log.add("theorem1_type1_error", params, e0, std::exp2(-a1 * n),
                e0 <= std::exp2(-a1 * n) + kCertSlack, exact);
        const double e1 = dp_worst_case(spec, inst, 1, Objective::error_prob, horizon, budget).value;
        log.add("theorem1_type2_error", params, e1, std::exp2(-a0 * n),
                e1 <= std::exp2(-a0 * n) + kCertSlack, exact);
        for (int h : {0, 1}) {
          const auto tc = dp_expected_tau_bound_check(spec, inst, h, horizon, budget);
          log.add(h == 0 ? "expected_tau_h0" : "expected_tau_h1", params, tc.worst_tau, tc.bound,
                  tc.slack >= -defaults::kTauSlack, exact,
                  {{"truncation_dominated", tc.truncation_dominated}});
        }
        const double m1 = dp_worst_case(spec, inst, 0, Objective::exp_moment_s1, horizon, budget).value;
        log.add("stopped_moment_s1_h0", params, m1, 1.0, m1 <= 1 + kCertSlack, exact);
        const double m0 = dp_worst_case(spec, inst, 1, Objective::exp_moment_s0, horizon, budget).value;
        log.add("stopped_moment_s0_h1", params, m0, 1.0, m0 <= 1 + kCertSlack, exact);
      }

  // Probability-constrained test: P(tau > n) against the Azuma bound.
  for (double delta : {0.05, 0.1})
    for (double n : {20.0, 30.0}) {
      const json params = {{"delta", delta}, {"n", n}};
      if (delta >= inst.d_fwd() || delta >= inst.d_rev()) {
        log.skip("stop_prob_exceeds_n", params, "delta is not below both divergences");
        continue;
      }
      const TestSpec spec = ProbConstraintSpec{delta, n};
      for (int h : {0, 1}) {
        const auto sp = dp_stop_prob_exceeds_n(spec, inst, h, budget);
        log.add(h == 0 ? "stop_prob_exceeds_n_h0" : "stop_prob_exceeds_n_h1", params,
                sp.worst_prob, sp.azuma_bound, sp.worst_prob <= sp.azuma_bound + kCertSlack, exact);
      }
    }

  // Fixed-length test on the hardest pair.
  const auto sol = hardest_pair(inst.P, inst.Q, r, tol);
  for (std::size_t i = 0; i < inst.Q.vertex_count(); ++i) {
    const double s = check_hoeffding_vertex_inequality(sol, inst.Q, 0, i);
    log.add("hoeffding_vertex_q", {{"r", r}, {"vertex", i}}, s, -defaults::kHoeffdingVertexSlack,
            s >= -defaults::kHoeffdingVertexSlack, direct);
  }
  for (std::size_t i = 0; i < inst.P.vertex_count(); ++i) {
    const double s = check_hoeffding_vertex_inequality(sol, inst.P, 1, i);
    log.add("hoeffding_vertex_p", {{"r", r}, {"vertex", i}}, s, -defaults::kHoeffdingVertexSlack,
            s >= -defaults::kHoeffdingVertexSlack, direct);
  }
  for (std::uint64_t n : {6u, 10u}) {
    const json params = {{"r", r}, {"n", n}, {"s_star", sol.s_star}};
    const double nn = static_cast<double>(n);
    const double miss = dp_fixed_length_error(sol, inst, 1, n, budget).value;
    log.add("fixed_length_type2_error", params, miss, std::exp2(-nn * r),
            miss <= std::exp2(-nn * r) + kCertSlack, exact);
    const double alarm = dp_fixed_length_error(sol, inst, 0, n, budget).value;
    log.add("fixed_length_type1_error", params, alarm, std::exp2(-nn * sol.s_star),
            alarm <= std::exp2(-nn * sol.s_star) + kCertSlack, exact);
  }
}

inline int cmd_certify(const Options& opt, std::ostream& out) {
  require_format(opt, "json", {"json"});
  const auto inst = load_instance(opt);
  const std::uint64_t horizon = opt.horizon == 0 ? 60 : opt.horizon;
  CertificateLog log;
  certify_instance(inst, horizon, opt.r, opt.state_budget, opt.tol, log);
  const json doc = {{"problem", opt.problem},
                    {"horizon", horizon},
                    {"r", opt.r},
                    {"certificates", log.entries()},
                    {"failures", log.failures()},
                    {"all_pass", log.failures() == 0}};
  Emitter{opt, out}.write(doc.dump(2) + "\n");
  return log.failures() == 0 ? kExitOk : kExitCertifyFailed;
}

inline json hoeffding_json(const HoeffdingSolution& s) {
  return {{"r", s.r},
          {"p_H", to_json(s.p_H)},
          {"q_H", to_json(s.q_H)},
          {"p_weights", s.p_weights},
          {"q_weights", s.q_weights},
          {"lambda_star", s.lambda_star},
          {"s_star", s.s_star},
          {"converged", s.converged}};
}

/// (r, s*(r)) for r evenly spaced over [0, D(p0*||q0*)]: the fixed-length
/// tradeoff with E1 = r and E0 = s*.
inline std::vector<HoeffdingSolution> hoeffding_curve(const ProblemInstance& inst, int points,
                                                      double tol) {
  std::vector<HoeffdingSolution> out;
  for (int i = 0; i < points; ++i) {
    const double r = points == 1 ? 0.0 : inst.d_fwd() * i / (points - 1);
    out.push_back(hardest_pair(inst.P, inst.Q, r, tol));
  }
  return out;
}

inline int cmd_hoeffding(const Options& opt, std::ostream& out) {
  require_format(opt, "json", {"json"});
  if (opt.r < 0) throw UsageError("--r must be non-negative");
  if (opt.points < 1) throw UsageError("--points must be at least 1");
  const auto inst = load_instance(opt);
  const auto sol = hardest_pair(inst.P, inst.Q, opt.r, opt.tol);
  json curve = json::array();
  for (const auto& s : hoeffding_curve(inst, opt.points, opt.tol))
    curve.push_back({{"r", s.r}, {"E0", s.s_star}, {"E1", s.r}, {"lambda_star", s.lambda_star}});
  const json doc = {{"solution", hoeffding_json(sol)}, {"curve", curve}};
  Emitter{opt, out}.write(doc.dump(2) + "\n");
  return kExitOk;
}

inline int cmd_report(const Options& opt, std::ostream& out) {
  require_format(opt, "csv", {"csv"});
  if (opt.problem.empty() && opt.inputs.empty())
    throw UsageError("report needs --problem and/or --inputs");
  std::string csv = std::string(kReportHeader) + "\n";
  if (!opt.problem.empty()) {
    const auto inst = load_instance(opt);
    // Sequential boundary E0 E1 = D_rev D_fwd, traced as (rho D_fwd, D_rev / rho).
    const int pts = std::max(opt.points, 2);
    for (int i = 0; i < pts; ++i) {
      const double rho = std::exp2(-2.0 + 4.0 * i / (pts - 1));
      csv += join_csv({"sequential_boundary", "problem", fmt(rho * inst.d_fwd()),
                       fmt(inst.d_rev() / rho), "", fmt(rho)}) +
             "\n";
    }
    for (const auto& s : hoeffding_curve(inst, pts, opt.tol))
      csv += join_csv({"fixed_length_tradeoff", "problem", fmt(s.s_star), fmt(s.r), "", fmt(s.r)}) +
             "\n";
  }
  for (const auto& path : opt.inputs) {
    const std::string text = read_file(path);
    const auto first = text.substr(0, text.find('\n'));
    if (first == kSweepHeader || first == kSimulateHeader) {
      const auto header = split(first, ',');
      auto col = [&](const char* name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) -
                                        header.begin());
      };
      std::istringstream is(text);
      std::string line;
      std::getline(is, line);
      std::size_t lineno = 1;
      while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
          throw ParseError(path + ": line " + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " columns");
        const std::string regime = cells[col("regime")];
        std::string parameter = cells[col("alpha1")].empty()
                                    ? ""
                                    : cells[col("alpha0")] + ":" + cells[col("alpha1")];
        if (!cells[col("delta")].empty()) parameter = cells[col("delta")];
        if (!cells[col("beta")].empty()) parameter = cells[col("beta")];
        if (!cells[col("r")].empty()) parameter = cells[col("r")];
        csv += join_csv({"measured_" + regime, path, cells[col("empirical_E0")],
                         cells[col("empirical_E1")], cells[col("n")], parameter}) +
               "\n";
      }
    } else {
      const json doc = parse_json_text(text, path);
      if (!doc.is_object() || !doc.contains("curve"))
        throw ParseError(path + ": not a sweep/simulate CSV or hoeffding JSON");
      for (const auto& pt : doc.at("curve"))
        csv += join_csv({"fixed_length_tradeoff", path, fmt(pt.at("E0").get<double>()),
                         fmt(pt.at("E1").get<double>()), "", fmt(pt.at("r").get<double>())}) +
               "\n";
    }
  }
  Emitter{opt, out}.write(csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Dispatch.

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial sequential hypothesis testing over finite alphabets", "advseq"};
  app.require_subcommand(1);
  Options opt;

  auto problem = [&](CLI::App* c) {
    c->add_option("--problem", opt.problem, "Problem JSON file")->required();
    c->add_option("--tol", opt.tol, "Solver tolerance (bits)")->check(CLI::PositiveNumber);
    c->add_option("--out", opt.out, "Write output here instead of stdout");
    c->add_option("--format", opt.format, "json or csv");
  };
  auto test_params = [&](CLI::App* c) {
    c->add_option("--regime", opt.regime, "theorem1|theorem2|theorem3|fixed");
    c->add_option("--n", opt.n, "Scale parameter n")->check(CLI::PositiveNumber);
    c->add_option("--alpha0", opt.alpha0, "Threshold factor on s0 (theorem1)")
        ->check(CLI::PositiveNumber);
    c->add_option("--alpha1", opt.alpha1, "Threshold factor on s1 (theorem1)")
        ->check(CLI::PositiveNumber);
    c->add_option("--delta", opt.delta, "Threshold back-off (theorem2)")->check(CLI::PositiveNumber);
    c->add_option("--beta", opt.beta, "Error target (theorem3)")->check(CLI::Range(0.0, 1.0));
    c->add_option("--r", opt.r, "Type-II exponent floor (fixed)")->check(CLI::NonNegativeNumber);
  };
  auto mc = [&](CLI::App* c) {
    c->add_option("--trials", opt.trials, "Monte Carlo trials per hypothesis")
        ->check(CLI::PositiveNumber);
    c->add_option("--seed", opt.seed, "Master seed");
    c->add_option("--horizon", opt.horizon, "Truncation horizon (0: default)");
    c->add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Solve both closest pairs and report the instance");
  problem(solve);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error rates and stopping times");
  problem(simulate);
  test_params(simulate);
  mc(simulate);
  simulate->add_option("--strategy", opt.strategy,
                       "family|optimal_pair_forward|optimal_pair_reverse|greedy_drift|"
                       "static_vertex:I");

  auto* sweep = app.add_subcommand("sweep", "Empirical exponents along an n ladder");
  problem(sweep);
  test_params(sweep);
  mc(sweep);
  sweep->add_option("--n-ladder", opt.n_ladder, "Values of n")->delimiter(',');
  sweep->add_option("--alphas", opt.alphas, "ALPHA0:ALPHA1 points (theorem1)")->delimiter(',');

  auto* certify = app.add_subcommand("certify", "Exact worst-case certificates");
  problem(certify);
  certify->add_option("--horizon", opt.horizon, "DP horizon (default 60)");
  certify->add_option("--r", opt.r, "Type-II exponent floor for the fixed-length checks")
      ->check(CLI::NonNegativeNumber);
  certify->add_option("--state-budget", opt.state_budget, "Maximum DP states")
      ->check(CLI::PositiveNumber);

  auto* hoeffding = app.add_subcommand("hoeffding", "Hardest pair and fixed-length tradeoff");
  problem(hoeffding);
  hoeffding->add_option("--r", opt.r, "Type-II exponent floor")->check(CLI::NonNegativeNumber);
  hoeffding->add_option("--points", opt.points, "Points on the tradeoff curve")
      ->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Merge outputs into one plot-ready CSV");
  report->add_option("--problem", opt.problem, "Problem JSON (adds the theoretical curves)");
  report->add_option("--inputs", opt.inputs, "sweep/simulate CSV or hoeffding JSON files");
  report->add_option("--out", opt.out, "Write output here instead of stdout");
  report->add_option("--format", opt.format, "csv");
  report->add_option("--tol", opt.tol, "Solver tolerance (bits)")->check(CLI::PositiveNumber);
  report->add_option("--points", opt.points, "Points per theoretical curve")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(opt, out);
    if (simulate->parsed()) return cmd_simulate(opt, out);
    if (sweep->parsed()) return cmd_sweep(opt, out);
    if (certify->parsed()) return cmd_certify(opt, out);
    if (hoeffding->parsed()) return cmd_hoeffding(opt, out);
    if (report->parsed()) return cmd_report(opt, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleSpecError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ResourceError& e) {
    err << "resource: " << e.what() << "\n";
    return kExitResource;
  } catch (const Error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace advseq::cli
