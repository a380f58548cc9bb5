#pragma once

// Exact worst-case values over all adaptive adversaries, by backward
// induction on the type lattice.
//
// Two facts make this exact:
//  * every test statistic and every payoff depends on the history only
//    through its type, so the value function does too;
//  * the conditional expectation of the continuation value is linear in the
//    adversary's per-step distribution, so some vertex attains the optimum.
//
// The type-sufficiency reduction is a property of this construction, not of
// the underlying theory: tests that look at the order of observations would
// need history-level recursion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advseq/defaults.hpp"
#include "advseq/error.hpp"
#include "advseq/geometry.hpp"
#include "advseq/lattice.hpp"
#include "advseq/prob.hpp"
#include "advseq/sequential_test.hpp"

namespace advseq {

enum class Objective {
  error_prob,            // P(decided wrong by the horizon)
  error_or_truncation,   // P(decided wrong or still running at the horizon)
  expected_tau,          // E[tau ^ horizon]
  exp_moment_s1,         // E[2^{s1 at tau ^ horizon}]
  exp_moment_s0,         // E[2^{s0 at tau ^ horizon}]
  stop_prob_exceeds_n,   // P(tau > horizon)
};

inline const char* to_string(Objective o) noexcept {
  switch (o) {
    case Objective::error_prob: return "error_prob";
    case Objective::error_or_truncation: return "error_or_truncation";
    case Objective::expected_tau: return "expected_tau";
    case Objective::exp_moment_s1: return "exp_moment_s1";
    case Objective::exp_moment_s0: return "exp_moment_s0";
    case Objective::stop_prob_exceeds_n: return "stop_prob_exceeds_n";
  }
  return "?";
}

struct DPResult {
  Objective objective = Objective::error_prob;
  int hypothesis = 0;
  std::uint64_t horizon = 0;
  double value = 0.0;
  std::shared_ptr<const PolicyTable> policy;  // maximizing vertex per type
  std::size_t states = 0;
};

namespace detail {

inline void check_budget(std::size_t k, std::uint64_t horizon, std::size_t budget) {
  const double states = TypeLattice::total_states(k, horizon);
  if (states > static_cast<double>(budget))
    throw ResourceError("type lattice too large for the state budget",
                        static_cast<std::size_t>(states), budget);
}

inline double linear_stat(std::span<const std::uint32_t> counts, std::span<const double> table) {
  CompensatedSum s;
  for (std::size_t x = 0; x < counts.size(); ++x)
    s.add(static_cast<double>(counts[x]) * table[x]);
  return s.value();
}

// Backward induction over types of length 0..horizon.
//   absorb(counts, t) -> optional payoff if the type is a stopped state
//   at_horizon(counts) -> payoff of an unstopped type of length horizon
// With `fixed` set, the adversary follows that table instead of maximizing.
template <class Absorb, class AtHorizon>
DPResult solve_lattice(const ConvexSet& choices, std::uint64_t horizon, Absorb&& absorb,
                       AtHorizon&& at_horizon, std::size_t budget,
                       const PolicyTable* fixed = nullptr) {
  const std::size_t k = choices.alphabet_size();
  const std::size_t m = choices.vertex_count();
  check_budget(k, horizon, budget);
  TypeLattice lattice(k, horizon);
  std::vector<std::vector<std::uint16_t>> policy(static_cast<std::size_t>(horizon));
  std::vector<double> next_values;
  std::size_t states = 0;
  for (std::uint64_t t = horizon + 1; t-- > 0;) {
    const auto types = lattice.enumerate(t);
    const std::size_t count = types.size() / k;
    states += count;
    std::vector<double> values(count, 0.0);
    if (t < horizon) policy[t].assign(count, 0);
    std::vector<std::uint32_t> c(k);
    std::vector<double> child(k);
    for (std::size_t s = 0; s < count; ++s) {
      std::copy_n(types.begin() + static_cast<std::ptrdiff_t>(s * k), k, c.begin());
      if (auto payoff = absorb(std::span<const std::uint32_t>(c), t)) {
        values[s] = *payoff;
        continue;
      }
      if (t == horizon) {
        values[s] = at_horizon(std::span<const std::uint32_t>(c));
        continue;
      }
      for (std::size_t x = 0; x < k; ++x) {
        ++c[x];
        child[x] = next_values[lattice.rank(c)];
        --c[x];
      }
      auto continuation = [&](std::size_t i) {
        CompensatedSum e;
        for (std::size_t x = 0; x < k; ++x) e.add(choices.vertex(i)[x] * child[x]);
        return e.value();
      };
      std::size_t best = 0;
      double best_value;
      if (fixed) {
        best = fixed->lookup(c);
        best_value = continuation(best);
      } else {
        best_value = continuation(0);
        for (std::size_t i = 1; i < m; ++i) {
          const double v = continuation(i);
          if (v > best_value) {
            best_value = v;
            best = i;
          }
        }
      }
      values[s] = best_value;
      policy[t][s] = static_cast<std::uint16_t>(best);
    }
    next_values = std::move(values);
  }
  DPResult out;
  out.horizon = horizon;
  out.value = next_values.at(0);
  out.policy = std::make_shared<const PolicyTable>(std::move(lattice), std::move(policy));
  out.states = states;
  return out;
}

inline DPResult solve_sequential(const TestSpec& spec, const ProblemInstance& inst, int hypothesis,
                          Objective objective, std::uint64_t horizon, std::size_t budget,
                          const PolicyTable* fixed) {
  if (!spec.sequential())
    throw KindError("dp_worst_case: fixed_length tests go through dp_fixed_length_error");
  if (hypothesis != 0 && hypothesis != 1) throw DomainError("hypothesis must be 0 or 1");
  if (horizon < 1) throw DomainError("dp horizon must be at least 1");
  const Thresholds th = thresholds(spec, inst);
  const auto& fwd = inst.fwd_table.values;
  const auto& rev = inst.rev_table.values;
  const Decision wrong = hypothesis == 0 ? Decision::one : Decision::zero;

  auto absorb = [&](std::span<const std::uint32_t> c, std::uint64_t t) -> std::optional<double> {
    if (t == 0) return std::nullopt;
    const double s0 = linear_stat(c, fwd);
    const double s1 = linear_stat(c, rev);
    const Verdict v = check_stop(s0, s1, t, th);
    if (!v.stopped()) return std::nullopt;
    switch (objective) {
      case Objective::error_prob:
      case Objective::error_or_truncation: return v.decision == wrong ? 1.0 : 0.0;
      case Objective::expected_tau: return static_cast<double>(t);
      case Objective::exp_moment_s1: return std::exp2(s1);
      case Objective::exp_moment_s0: return std::exp2(s0);
      case Objective::stop_prob_exceeds_n: return 0.0;
    }
    return std::nullopt;
  };
  auto at_horizon = [&](std::span<const std::uint32_t> c) -> double {
    switch (objective) {
      case Objective::error_prob: return 0.0;
      case Objective::error_or_truncation: return 1.0;
      case Objective::expected_tau: return static_cast<double>(horizon);
      case Objective::exp_moment_s1: return std::exp2(linear_stat(c, rev));
      case Objective::exp_moment_s0: return std::exp2(linear_stat(c, fwd));
      case Objective::stop_prob_exceeds_n: return 1.0;
    }
    return 0.0;
  };
  DPResult r = solve_lattice(inst.set_for(hypothesis), horizon, absorb, at_horizon, budget, fixed);
  r.objective = objective;
  r.hypothesis = hypothesis;
  return r;
}

}  // namespace detail

/// sup over adaptive adversaries of `objective` for a sequential test, with
/// the run truncated at `horizon` observations.
inline DPResult dp_worst_case(const TestSpec& spec, const ProblemInstance& inst, int hypothesis,
                              Objective objective, std::uint64_t horizon,
                              std::size_t budget = defaults::kStateBudget) {
  return detail::solve_sequential(spec, inst, hypothesis, objective, horizon,
                                                budget, nullptr);
}

/// Value of `objective` when the adversary follows `policy` instead of maximizing.
inline double evaluate_policy(const TestSpec& spec, const ProblemInstance& inst, int hypothesis,
                              Objective objective, const PolicyTable& policy,
                              std::size_t budget = defaults::kStateBudget) {
  return detail::solve_sequential(spec, inst, hypothesis, objective,
                                                policy.horizon(), budget, &policy)
      .value;
}

/// Worst-case error of the n-sample likelihood-ratio test on the hardest pair:
/// hypothesis 0 gives sup P(decide 1), hypothesis 1 gives sup Q(decide 0).
inline DPResult dp_fixed_length_error(const HoeffdingSolution& sol, const ProblemInstance& inst,
                                      int hypothesis, std::uint64_t n,
                                      std::size_t budget = defaults::kStateBudget) {
  if (hypothesis != 0 && hypothesis != 1) throw DomainError("hypothesis must be 0 or 1");
  if (n < 1) throw DomainError("fixed-length test needs n >= 1");
  const auto test = FixedLengthTest::from(sol, n);
  const Decision wrong = hypothesis == 0 ? Decision::one : Decision::zero;
  auto absorb = [](std::span<const std::uint32_t>, std::uint64_t) -> std::optional<double> {
    return std::nullopt;
  };
  auto at_horizon = [&](std::span<const std::uint32_t> c) {
    return test.decide_counts(c) == wrong ? 1.0 : 0.0;
  };
  DPResult r = detail::solve_lattice(inst.set_for(hypothesis), n, absorb, at_horizon, budget);
  r.objective = Objective::error_prob;
  r.hypothesis = hypothesis;
  return r;
}

struct TauBoundCheck {
  double worst_tau = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool truncation_dominated = false;  // bound reaches the horizon; not a real certificate
};

/// sup E[tau ^ horizon] against (theta + c) / D, the expected-stopping-time
/// bound through the overshoot constant of the statistic that must cross.
inline TauBoundCheck dp_expected_tau_bound_check(const TestSpec& spec, const ProblemInstance& inst,
                                                 int hypothesis, std::uint64_t horizon,
                                                 std::size_t budget = defaults::kStateBudget) {
  const Thresholds th = thresholds(spec, inst);
  const DPResult r = dp_worst_case(spec, inst, hypothesis, Objective::expected_tau, horizon, budget);
  const double bound = hypothesis == 0 ? (th.theta0 + inst.c_fwd) / inst.d_fwd()
                                       : (th.theta1 + inst.c_rev) / inst.d_rev();
  return {r.value, bound, bound - r.value, bound >= static_cast<double>(horizon)};
}

struct StopProbCheck {
  double worst_prob = 0.0;
  double azuma_bound = 0.0;
};

/// sup P(tau > n) for a prob_constraint test against exp(-n delta^2 / (8 c^2)).
inline StopProbCheck dp_stop_prob_exceeds_n(const TestSpec& spec, const ProblemInstance& inst,
                                            int hypothesis,
                                            std::size_t budget = defaults::kStateBudget) {
  const auto& p = spec.as<ProbConstraintSpec>();
  const auto n = static_cast<std::uint64_t>(std::llround(p.n));
  if (n < 1) throw DomainError("dp_stop_prob_exceeds_n: n must be at least 1");
  const DPResult r =
      dp_worst_case(spec, inst, hypothesis, Objective::stop_prob_exceeds_n, n, budget);
  const double c = hypothesis == 0 ? inst.c_fwd : inst.c_rev;
  const double azuma = std::exp(-static_cast<double>(n) * p.delta * p.delta / (8.0 * c * c));
  return {r.value, azuma};
}

/// Exhaustive minimum of the closest-pair objective over a weight grid.
inline ClosestPairResult brute_force_closest_pair(const ConvexSet& P, const ConvexSet& Q,
                                                  Direction direction, double grid_step,
                                                  std::size_t budget =
                                                      defaults::kBruteForceBudget) {
  if (P.alphabet_size() != Q.alphabet_size())
    throw DimensionError("brute_force_closest_pair: alphabet mismatch");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw DomainError("grid_step must lie in (0, 1]");
  const auto divisions = static_cast<std::uint64_t>(std::llround(1.0 / grid_step));
  // weight grid points: compositions of `divisions` into vertex_count parts
  const double p_points = TypeLattice::total_states(P.vertex_count() - 1, divisions);
  const double q_points = TypeLattice::total_states(Q.vertex_count() - 1, divisions);
  if (p_points * q_points > static_cast<double>(budget))
    throw ResourceError("closest-pair grid too large",
                        static_cast<std::size_t>(p_points * q_points), budget);

  auto grid = [&](const ConvexSet& set) {
    std::vector<std::vector<double>> weights;
    if (set.vertex_count() == 1) {
      weights.push_back({1.0});
      return weights;
    }
    TypeLattice lattice(set.vertex_count(), divisions);
    const auto comps = lattice.enumerate(divisions);
    const std::size_t m = set.vertex_count();
    for (std::size_t i = 0; i < comps.size(); i += m) {
      std::vector<double> w(m);
      for (std::size_t j = 0; j < m; ++j)
        w[j] = static_cast<double>(comps[i + j]) / static_cast<double>(divisions);
      weights.push_back(std::move(w));
    }
    return weights;
  };
  const auto pw = grid(P);
  const auto qw = grid(Q);
  std::vector<std::vector<double>> pm, qm;
  for (const auto& w : pw) pm.push_back(detail::mix_raw(P, w));
  for (const auto& w : qw) qm.push_back(detail::mix_raw(Q, w));

  const bool fwd = direction == Direction::forward;
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < pm.size(); ++i)
    for (std::size_t j = 0; j < qm.size(); ++j) {
      const double d = fwd ? detail::kl_raw(pm[i], qm[j]) : detail::kl_raw(qm[j], pm[i]);
      if (d < best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  Distribution p = mix(P, pw[bi]);
  Distribution q = mix(Q, qw[bj]);
  const double divergence = fwd ? kl_divergence(p, q) : kl_divergence(q, p);
  return {std::move(p), std::move(q), pw[bi], qw[bj], divergence, direction, true, 0, {}};
}

/// One-step drift slack of the centred statistic at a vertex:
/// hypothesis 0: E_v[log2(p0*/q0*)] - D(p0*||q0*) for v in P;
/// hypothesis 1: E_v[log2(q1*/p1*)] - D(q1*||p1*) for v in Q.
inline double check_submartingale_step(const ProblemInstance& inst, int hypothesis,
                                       std::size_t vertex_index) {
  if (hypothesis == 0) return check_pythagorean(inst, inst.P.vertex(vertex_index));
  if (hypothesis == 1) return check_pythagorean_reverse(inst, inst.Q.vertex(vertex_index));
  throw DomainError("hypothesis must be 0 or 1");
}

}  // namespace advseq
