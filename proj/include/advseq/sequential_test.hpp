#pragma once

// The four test families as deterministic state machines:
//   expectation       stop when s0 >= alpha0 n or s1 >= alpha1 n
//   prob_constraint   thresholds n(D(p0*||q0*) - delta) and n(D(q1*||p1*) - delta)
//   error_constraint  both thresholds -log2(beta)
//   fixed_length      n-sample likelihood-ratio test on the hardest pair
//
// One statistic convention serves all sequential kinds: s0 sums
// log2(p0*/q0*) and crossing theta0 decides 0; s1 sums log2(q1*/p1*) and
// crossing theta1 decides 1. A simultaneous crossing decides 1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "advseq/defaults.hpp"
#include "advseq/error.hpp"
#include "advseq/geometry.hpp"
#include "advseq/prob.hpp"

namespace advseq {

using Symbol = std::uint32_t;

struct SequentialState {
  std::uint64_t t = 0;
  double s0 = 0.0;
  double s1 = 0.0;

  friend bool operator==(const SequentialState&, const SequentialState&) = default;
};

struct ExpectationSpec {
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double n = 1.0;
};

struct ProbConstraintSpec {
  double delta = 0.1;
  double n = 1.0;
};

struct ErrorConstraintSpec {
  double beta = 0.5;
};

struct FixedLengthSpec {
  std::uint64_t n = 1;
  double r = 0.0;
};

enum class TestKind { expectation, prob_constraint, error_constraint, fixed_length };

inline const char* to_string(TestKind k) noexcept {
  switch (k) {
    case TestKind::expectation: return "expectation";
    case TestKind::prob_constraint: return "prob_constraint";
    case TestKind::error_constraint: return "error_constraint";
    case TestKind::fixed_length: return "fixed_length";
  }
  return "?";
}

class TestSpec {
 public:
  using Params = std::variant<ExpectationSpec, ProbConstraintSpec, ErrorConstraintSpec,
                              FixedLengthSpec>;

  TestSpec(ExpectationSpec s) : params_(s) {}
  TestSpec(ProbConstraintSpec s) : params_(s) {}
  TestSpec(ErrorConstraintSpec s) : params_(s) {}
  TestSpec(FixedLengthSpec s) : params_(s) {}

  TestKind kind() const noexcept { return static_cast<TestKind>(params_.index()); }
  bool sequential() const noexcept { return kind() != TestKind::fixed_length; }
  const Params& params() const noexcept { return params_; }

  template <class T>
  const T& as() const {
    if (const T* p = std::get_if<T>(&params_)) return *p;
    throw KindError(std::string("test spec is of kind ") + to_string(kind()));
  }

 private:
  Params params_;
};

struct Thresholds {
  double theta0 = 0.0;  // applied to s0, decides 0
  double theta1 = 0.0;  // applied to s1, decides 1
};

inline Thresholds thresholds(const TestSpec& spec, const ProblemInstance& inst) {
  Thresholds th;
  switch (spec.kind()) {
    case TestKind::expectation: {
      const auto& e = spec.as<ExpectationSpec>();
      if (!(e.alpha0 > 0.0 && e.alpha1 > 0.0 && e.n > 0.0))
        throw InfeasibleSpecError("expectation spec needs alpha0, alpha1, n > 0");
      th = {e.alpha0 * e.n, e.alpha1 * e.n};
      break;
    }
    case TestKind::prob_constraint: {
      const auto& p = spec.as<ProbConstraintSpec>();
      if (!(p.delta > 0.0 && p.n > 0.0))
        throw InfeasibleSpecError("prob_constraint spec needs delta > 0 and n > 0");
      if (p.delta >= inst.d_fwd() || p.delta >= inst.d_rev())
        throw InfeasibleSpecError("prob_constraint: delta " + std::to_string(p.delta) +
                                  " must be below both divergences (" +
                                  std::to_string(inst.d_fwd()) + ", " +
                                  std::to_string(inst.d_rev()) + ")");
      th = {p.n * (inst.d_fwd() - p.delta), p.n * (inst.d_rev() - p.delta)};
      break;
    }
    case TestKind::error_constraint: {
      const auto& b = spec.as<ErrorConstraintSpec>();
      if (!(b.beta > 0.0 && b.beta < 1.0))
        throw InfeasibleSpecError("error_constraint spec needs beta in (0, 1)");
      th = {-std::log2(b.beta), -std::log2(b.beta)};
      break;
    }
    case TestKind::fixed_length:
      throw KindError("thresholds: fixed_length tests have no sequential thresholds");
  }
  return th;
}

enum class Decision { zero, one, undecided };

enum class Cause { running, s0_crossed, s1_crossed, both_crossed, horizon_truncated, fixed_length };

inline const char* to_string(Decision d) noexcept {
  switch (d) {
    case Decision::zero: return "0";
    case Decision::one: return "1";
    case Decision::undecided: return "undecided";
  }
  return "?";
}

inline const char* to_string(Cause c) noexcept {
  switch (c) {
    case Cause::running: return "running";
    case Cause::s0_crossed: return "s0_crossed";
    case Cause::s1_crossed: return "s1_crossed";
    case Cause::both_crossed: return "both_crossed";
    case Cause::horizon_truncated: return "horizon_truncated";
    case Cause::fixed_length: return "fixed_length";
  }
  return "?";
}

struct Verdict {
  Decision decision = Decision::undecided;
  std::optional<std::uint64_t> stopped_at;
  Cause cause = Cause::running;

  bool stopped() const noexcept { return decision != Decision::undecided; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline SequentialState init_state() noexcept { return {}; }

inline SequentialState step(const SequentialState& state, Symbol symbol,
                            const ProblemInstance& inst) {
  if (symbol >= inst.alphabet_size())
    throw DomainError("step: symbol " + std::to_string(symbol) + " outside alphabet of size " +
                      std::to_string(inst.alphabet_size()));
  return {state.t + 1, state.s0 + inst.fwd_table[symbol], state.s1 + inst.rev_table[symbol]};
}

inline bool crossed(double statistic, double threshold) noexcept {
  return statistic >= threshold - defaults::kCrossingSlack;
}

/// Stopping and decision rule against precomputed thresholds.
inline Verdict check_stop(double s0, double s1, std::uint64_t t, const Thresholds& th) noexcept {
  const bool c0 = crossed(s0, th.theta0);
  const bool c1 = crossed(s1, th.theta1);
  if (c1) return {Decision::one, t, c0 ? Cause::both_crossed : Cause::s1_crossed};
  if (c0) return {Decision::zero, t, Cause::s0_crossed};
  return {};
}

inline Verdict check_stop(const SequentialState& state, const Thresholds& th) noexcept {
  return check_stop(state.s0, state.s1, state.t, th);
}

inline Verdict check_stop(const SequentialState& state, const TestSpec& spec,
                          const ProblemInstance& inst) {
  if (!spec.sequential()) throw KindError("check_stop: fixed_length spec is not sequential");
  return check_stop(state, thresholds(spec, inst));
}

/// Replays a whole observation stream, stopping at the first crossing or at
/// `horizon` observations, whichever comes first.
inline Verdict run_sequential(const TestSpec& spec, const ProblemInstance& inst,
                              std::span<const Symbol> observations, std::uint64_t horizon) {
  const Thresholds th = thresholds(spec, inst);
  SequentialState state = init_state();
  for (Symbol x : observations) {
    if (state.t >= horizon) break;
    state = step(state, x, inst);
    if (Verdict v = check_stop(state, th); v.stopped()) return v;
  }
  if (state.t >= horizon) return {Decision::undecided, std::nullopt, Cause::horizon_truncated};
  return {};
}

// ---------------------------------------------------------------------------
// Fixed-length likelihood-ratio test on the hardest pair.

struct FixedLengthTest {
  std::uint64_t n = 0;
  std::vector<double> log_ratio;  // log2(p_H(x) / q_H(x))
  double threshold = 0.0;         // n (r - s*)

  static FixedLengthTest from(const HoeffdingSolution& sol, std::uint64_t n) {
    auto table = log_ratio_table(sol.p_H, sol.q_H);
    return {n, std::move(table.values), static_cast<double>(n) * (sol.r - sol.s_star)};
  }

  /// Decides from the type (symbol counts) of the sample, so the verdict is
  /// invariant to observation order.
  Decision decide_counts(std::span<const std::uint32_t> counts) const noexcept {
    CompensatedSum sum;
    for (std::size_t x = 0; x < counts.size(); ++x)
      sum.add(static_cast<double>(counts[x]) * log_ratio[x]);
    return sum.value() > threshold + defaults::kCrossingSlack ? Decision::zero : Decision::one;
  }
};

/// Decides 0 iff sum_i log2(p_H(x_i)/q_H(x_i)) > n (r - s*), else 1.
inline Verdict fixed_length_decide(const HoeffdingSolution& sol, std::uint64_t n,
                                   std::span<const Symbol> observations) {
  if (observations.size() != n)
    throw DomainError("fixed_length_decide: expected " + std::to_string(n) +
                      " observations, got " + std::to_string(observations.size()));
  const auto test = FixedLengthTest::from(sol, n);
  std::vector<std::uint32_t> counts(sol.p_H.size(), 0);
  for (Symbol x : observations) {
    if (x >= counts.size()) throw DomainError("fixed_length_decide: symbol outside alphabet");
    ++counts[x];
  }
  return {test.decide_counts(counts), n, Cause::fixed_length};
}

// ---------------------------------------------------------------------------
// Achievable exponent regions.

enum class Regime { theorem1, theorem2, theorem3, fixed };

inline const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::theorem1: return "theorem1";
    case Regime::theorem2: return "theorem2";
    case Regime::theorem3: return "theorem3";
    case Regime::fixed: return "fixed";
  }
  return "?";
}

/// theorem1: {E0 E1 <= product_bound}, hyperbola boundary, `corner` is its alpha0 = alpha1 point;
/// theorem2/3: rectangle below `corner`.
struct RegionDescriptor {
  Regime regime = Regime::theorem1;
  double product_bound = 0.0;
  std::pair<double, double> corner{0.0, 0.0};  // (E0, E1) extremes

  /// Membership after scaling the region by (1 + inflation) along each axis.
  bool contains(double e0, double e1, double inflation = 0.0) const noexcept {
    const double scale = 1.0 + inflation;
    if (regime == Regime::theorem1) return e0 * e1 <= product_bound * scale * scale;
    return e0 <= corner.first * scale && e1 <= corner.second * scale;
  }
};

inline RegionDescriptor exponent_region(const ProblemInstance& inst, Regime regime) {
  RegionDescriptor r;
  r.regime = regime;
  r.product_bound = inst.d_rev() * inst.d_fwd();
  switch (regime) {
    case Regime::theorem1: r.corner = {inst.d_fwd(), inst.d_rev()}; break;  // alpha0 = alpha1
    case Regime::theorem2: r.corner = {inst.d_rev(), inst.d_fwd()}; break;
    case Regime::theorem3: r.corner = {inst.d_fwd(), inst.d_rev()}; break;
    case Regime::fixed:
      throw KindError("exponent_region: the fixed-length tradeoff depends on r; see hardest_pair");
  }
  return r;
}

}  // namespace advseq
