#pragma once

// Seeded Monte Carlo over the test families. Every trial draws from its own
// counter-based stream, and per-trial outcomes are aggregated in trial order,
// so a result depends only on (inputs, master_seed): never on worker count.
//
// Error accounting is conservative: a run truncated at the horizon counts as
// an error under either hypothesis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "advseq/adversary.hpp"
#include "advseq/defaults.hpp"
#include "advseq/error.hpp"
#include "advseq/geometry.hpp"
#include "advseq/prob.hpp"
#include "advseq/rng.hpp"
#include "advseq/sequential_test.hpp"

namespace advseq {

struct TrialConfig {
  std::uint64_t trials = 10'000;
  std::uint64_t master_seed = 1;
  std::uint64_t horizon = 0;  // 0: default_horizon(spec, inst)
  unsigned workers = 1;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for `successes` out of `trials`.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = defaults::kWilsonZ) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

/// Error rate with a Laplace floor of 1/(trials+1), so its log is finite.
inline double floored_rate(std::uint64_t errors, std::uint64_t trials) {
  const double rate = static_cast<double>(errors) / static_cast<double>(trials);
  return std::max(rate, 1.0 / (static_cast<double>(trials) + 1.0));
}

struct HypothesisStats {
  std::string strategy;
  std::uint64_t errors = 0;
  std::uint64_t truncated = 0;
  double err_rate = 0.0;
  Interval err_ci;
  double mean_tau = 0.0;  // of tau ^ horizon
  double se_tau = 0.0;
};

struct SimulationResult {
  TestKind kind = TestKind::expectation;
  std::uint64_t trials = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t horizon = 0;
  HypothesisStats h0;  // errors: decided 1 or truncated
  HypothesisStats h1;  // errors: decided 0 or truncated
  double truncation_rate = 0.0;
  double empirical_E0 = 0.0;
  double empirical_E1 = 0.0;
};

/// ceil(20 n max(1, alpha) / min divergence) for expectation specs, 20 n /
/// min divergence for prob_constraint, 20 max(1, -log2 beta) / min divergence
/// for error_constraint, and n for fixed_length.
inline std::uint64_t default_horizon(const TestSpec& spec, const ProblemInstance& inst) {
  const double dmin = std::min(inst.d_fwd(), inst.d_rev());
  double scale = 1.0;
  switch (spec.kind()) {
    case TestKind::expectation: {
      const auto& e = spec.as<ExpectationSpec>();
      scale = e.n * std::max({1.0, e.alpha0, e.alpha1});
      break;
    }
    case TestKind::prob_constraint: scale = spec.as<ProbConstraintSpec>().n; break;
    case TestKind::error_constraint:
      scale = std::max(1.0, -std::log2(spec.as<ErrorConstraintSpec>().beta));
      break;
    case TestKind::fixed_length: return spec.as<FixedLengthSpec>().n;
  }
  return static_cast<std::uint64_t>(std::ceil(defaults::kHorizonFactor * scale / dmin));
}

/// Exponent of one hypothesis from its (worst) error rate and stopping time:
/// expectation: -log2(err) / mean_tau; prob_constraint, fixed_length:
/// -log2(err) / n; error_constraint: -log2(beta) / mean_tau.
inline double empirical_exponent(const TestSpec& spec, double floored_err, double mean_tau) {
  switch (spec.kind()) {
    case TestKind::expectation: return -std::log2(floored_err) / mean_tau;
    case TestKind::prob_constraint:
      return -std::log2(floored_err) / spec.as<ProbConstraintSpec>().n;
    case TestKind::error_constraint:
      return -std::log2(spec.as<ErrorConstraintSpec>().beta) / mean_tau;
    case TestKind::fixed_length:
      return -std::log2(floored_err) / static_cast<double>(spec.as<FixedLengthSpec>().n);
  }
  return 0.0;
}

namespace detail {

struct TrialOutcome {
  Decision decision = Decision::undecided;
  std::uint64_t tau = 0;  // horizon when truncated
};

inline Symbol sample(const Distribution& d, double u) noexcept {
  double acc = 0.0;
  for (std::size_t x = 0; x + 1 < d.size(); ++x) {
    acc += d[x];
    if (u < acc) return static_cast<Symbol>(x);
  }
  return static_cast<Symbol>(d.size() - 1);
}

/// Runs one trial. `fixed` selects the fixed-length rule.
inline TrialOutcome run_one(const ProblemInstance& inst, const BoundAdversary& adversary,
                            const Thresholds& th, const FixedLengthTest* fixed,
                            std::uint64_t horizon, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::uint32_t> counts(inst.alphabet_size(), 0);
  if (fixed) {
    for (std::uint64_t t = 0; t < fixed->n; ++t) ++counts[sample(adversary.next(counts), rng.uniform())];
    return {fixed->decide_counts(counts), fixed->n};
  }
  SequentialState state = init_state();
  while (state.t < horizon) {
    const Symbol x = sample(adversary.next(counts), rng.uniform());
    ++counts[x];
    state = step(state, x, inst);
    if (Verdict v = check_stop(state, th); v.stopped()) return {v.decision, state.t};
  }
  return {Decision::undecided, horizon};
}

inline std::vector<TrialOutcome> run_hypothesis(const ProblemInstance& inst,
                                                const BoundAdversary& adversary,
                                                const Thresholds& th,
                                                const FixedLengthTest* fixed,
                                                const TrialConfig& cfg, int hypothesis) {
  std::vector<TrialOutcome> out(static_cast<std::size_t>(cfg.trials));
  const unsigned workers = std::max(1u, cfg.workers);
  auto work = [&](unsigned w) {
    for (std::uint64_t i = w; i < cfg.trials; i += workers)
      out[i] = run_one(inst, adversary, th, fixed, cfg.horizon,
                       trial_seed(cfg.master_seed, i, hypothesis));
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return out;
}

inline HypothesisStats summarize(const std::vector<TrialOutcome>& outcomes, Decision wrong,
                                 std::string strategy) {
  HypothesisStats s;
  s.strategy = std::move(strategy);
  CompensatedSum tau, tau2;
  for (const auto& o : outcomes) {
    if (o.decision == wrong || o.decision == Decision::undecided) ++s.errors;
    if (o.decision == Decision::undecided) ++s.truncated;
    const double t = static_cast<double>(o.tau);
    tau.add(t);
    tau2.add(t * t);
  }
  const auto n = static_cast<double>(outcomes.size());
  s.err_rate = static_cast<double>(s.errors) / n;
  s.err_ci = wilson_interval(s.errors, outcomes.size());
  s.mean_tau = tau.value() / n;
  const double var = n > 1 ? std::max(0.0, (tau2.value() - n * s.mean_tau * s.mean_tau) / (n - 1))
                           : 0.0;
  s.se_tau = std::sqrt(var / n);
  return s;
}

}  // namespace detail

/// Monte Carlo estimate of both error probabilities and stopping times, with
/// `strategy_h0` drawing from P and `strategy_h1` from Q. fixed_length specs
/// need the hardest-pair solution for their r.
inline SimulationResult run_trials(const TestSpec& spec, const ProblemInstance& inst,
                                   const AdversaryStrategy& strategy_h0,
                                   const AdversaryStrategy& strategy_h1, TrialConfig cfg,
                                   const HoeffdingSolution* hoeffding = nullptr) {
  if (cfg.trials < 1) throw DomainError("run_trials: trials must be at least 1");
  if (strategy_h0.hypothesis() != 0 || strategy_h1.hypothesis() != 1)
    throw DomainError("run_trials: strategies must be bound to hypotheses 0 and 1");
  std::optional<FixedLengthTest> fixed;
  Thresholds th;
  std::optional<HoeffdingSolution> solved;
  if (spec.kind() == TestKind::fixed_length) {
    const auto& f = spec.as<FixedLengthSpec>();
    if (f.n < 1) throw DomainError("run_trials: fixed-length n must be at least 1");
    if (!hoeffding) hoeffding = &solved.emplace(hardest_pair(inst.P, inst.Q, f.r));
    fixed = FixedLengthTest::from(*hoeffding, f.n);
    cfg.horizon = f.n;
  } else {
    th = thresholds(spec, inst);
    if (cfg.horizon == 0) cfg.horizon = default_horizon(spec, inst);
  }
  if (cfg.horizon < 1) throw DomainError("run_trials: horizon must be at least 1");

  const BoundAdversary a0(strategy_h0, inst);
  const BoundAdversary a1(strategy_h1, inst);
  const FixedLengthTest* rule = fixed ? &*fixed : nullptr;
  const auto o0 = detail::run_hypothesis(inst, a0, th, rule, cfg, 0);
  const auto o1 = detail::run_hypothesis(inst, a1, th, rule, cfg, 1);

  SimulationResult r;
  r.kind = spec.kind();
  r.trials = cfg.trials;
  r.master_seed = cfg.master_seed;
  r.horizon = cfg.horizon;
  r.h0 = detail::summarize(o0, Decision::one, strategy_h0.id());
  r.h1 = detail::summarize(o1, Decision::zero, strategy_h1.id());
  r.truncation_rate = static_cast<double>(r.h0.truncated + r.h1.truncated) /
                      (2.0 * static_cast<double>(cfg.trials));
  r.empirical_E0 = empirical_exponent(spec, floored_rate(r.h0.errors, cfg.trials), r.h0.mean_tau);
  r.empirical_E1 = empirical_exponent(spec, floored_rate(r.h1.errors, cfg.trials), r.h1.mean_tau);
  return r;
}

// ---------------------------------------------------------------------------
// Exponent sweeps.

struct SweepParams {
  std::vector<std::pair<double, double>> alphas{{1.0, 1.0}};  // theorem1 (alpha0, alpha1)
  double delta = 0.1;                                        // theorem2
  double r = 0.1;                                            // fixed
};

struct SweepRow {
  Regime regime = Regime::theorem1;
  double n = 0.0;
  double alpha0 = 0.0, alpha1 = 0.0, delta = 0.0, beta = 0.0, r = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t horizon = 0;
  double err_h0 = 0.0, err_h1 = 0.0;  // worst over the strategy family
  double mean_tau_h0 = 0.0, mean_tau_h1 = 0.0;
  std::string worst_h0, worst_h1;  // strategy attaining the worst error
  double empirical_E0 = 0.0, empirical_E1 = 0.0;
};

/// Strategy family the sweep maximizes over. Monte Carlo over a finite family
/// gives a lower bound on the worst case, never the worst case itself.
inline std::vector<AdversaryStrategy::Kind> sweep_family() {
  return {OptimalPairForward{}, OptimalPairReverse{}, GreedyDrift{}};
}

inline TestSpec sweep_spec(Regime regime, double n, double alpha0, double alpha1,
                           const SweepParams& params) {
  switch (regime) {
    case Regime::theorem1: return ExpectationSpec{alpha0, alpha1, n};
    case Regime::theorem2: return ProbConstraintSpec{params.delta, n};
    case Regime::theorem3: return ErrorConstraintSpec{std::exp2(-n)};
    case Regime::fixed:
      return FixedLengthSpec{static_cast<std::uint64_t>(std::llround(n)), params.r};
  }
  throw DomainError("unknown regime");
}

/// One row per (n, parameter point). theorem3 uses beta = 2^-n.
inline std::vector<SweepRow> exponent_sweep(const ProblemInstance& inst, Regime regime,
                                            const std::vector<double>& n_ladder,
                                            const SweepParams& params, TrialConfig cfg) {
  if (n_ladder.empty()) throw DomainError("exponent_sweep: n ladder is empty");
  std::vector<std::pair<double, double>> points{{0.0, 0.0}};
  if (regime == Regime::theorem1) points = params.alphas;
  if (points.empty()) throw DomainError("exponent_sweep: alpha grid is empty");
  std::optional<HoeffdingSolution> hoeffding;
  if (regime == Regime::fixed) hoeffding = hardest_pair(inst.P, inst.Q, params.r);

  std::vector<SweepRow> rows;
  for (double n : n_ladder) {
    for (auto [a0, a1] : points) {
      const TestSpec spec = sweep_spec(regime, n, a0, a1, params);
      SweepRow row;
      row.regime = regime;
      row.n = n;
      row.alpha0 = a0;
      row.alpha1 = a1;
      if (regime == Regime::theorem2) row.delta = params.delta;
      if (regime == Regime::theorem3) row.beta = spec.as<ErrorConstraintSpec>().beta;
      if (regime == Regime::fixed) row.r = params.r;
      row.trials = cfg.trials;
      std::uint64_t worst_errors0 = 0, worst_errors1 = 0;
      bool first = true;
      for (const auto& kind : sweep_family()) {
        const auto res = run_trials(spec, inst, AdversaryStrategy(kind, 0),
                                    AdversaryStrategy(kind, 1), cfg,
                                    hoeffding ? &*hoeffding : nullptr);
        row.horizon = res.horizon;
        if (first || res.h0.errors > worst_errors0) {
          worst_errors0 = res.h0.errors;
          row.worst_h0 = res.h0.strategy;
        }
        if (first || res.h1.errors > worst_errors1) {
          worst_errors1 = res.h1.errors;
          row.worst_h1 = res.h1.strategy;
        }
        row.mean_tau_h0 = first ? res.h0.mean_tau : std::max(row.mean_tau_h0, res.h0.mean_tau);
        row.mean_tau_h1 = first ? res.h1.mean_tau : std::max(row.mean_tau_h1, res.h1.mean_tau);
        first = false;
      }
      row.err_h0 = static_cast<double>(worst_errors0) / static_cast<double>(cfg.trials);
      row.err_h1 = static_cast<double>(worst_errors1) / static_cast<double>(cfg.trials);
      row.empirical_E0 =
          empirical_exponent(spec, floored_rate(worst_errors0, cfg.trials), row.mean_tau_h0);
      row.empirical_E1 =
          empirical_exponent(spec, floored_rate(worst_errors1, cfg.trials), row.mean_tau_h1);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace advseq
