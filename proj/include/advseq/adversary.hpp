#pragma once

// Adaptive adversaries: rules mapping the observation history to the
// distribution of the next sample, drawn from P under H0 and Q under H1.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "advseq/error.hpp"
#include "advseq/geometry.hpp"
#include "advseq/lattice.hpp"
#include "advseq/prob.hpp"
#include "advseq/sequential_test.hpp"

namespace advseq {

struct StaticVertex {
  std::size_t index = 0;
};
struct StaticMixture {
  std::vector<double> weights;
};
struct OptimalPairForward {};  // p0* under H0, q0* under H1
struct OptimalPairReverse {};  // p1* under H0, q1* under H1
struct GreedyDrift {};         // vertex pushing the opposing statistic hardest
struct DpPolicy {
  std::shared_ptr<const PolicyTable> table;
};

class AdversaryStrategy {
 public:
  using Kind = std::variant<StaticVertex, StaticMixture, OptimalPairForward, OptimalPairReverse,
                            GreedyDrift, DpPolicy>;

  AdversaryStrategy(Kind kind, int hypothesis) : kind_(std::move(kind)), hypothesis_(hypothesis) {
    if (hypothesis != 0 && hypothesis != 1) throw DomainError("hypothesis must be 0 or 1");
  }

  const Kind& kind() const noexcept { return kind_; }
  int hypothesis() const noexcept { return hypothesis_; }

  std::string id() const {
    struct Namer {
      std::string operator()(const StaticVertex& s) const {
        return "static_vertex(" + std::to_string(s.index) + ")";
      }
      std::string operator()(const StaticMixture&) const { return "static_mixture"; }
      std::string operator()(const OptimalPairForward&) const { return "optimal_pair_forward"; }
      std::string operator()(const OptimalPairReverse&) const { return "optimal_pair_reverse"; }
      std::string operator()(const GreedyDrift&) const { return "greedy_drift"; }
      std::string operator()(const DpPolicy&) const { return "dp_policy"; }
    };
    return std::visit(Namer{}, kind_);
  }

 private:
  Kind kind_;
  int hypothesis_;
};

/// Index of the vertex maximizing the one-step expected increment of the
/// statistic that leads to a wrong decision: s1 under H0, s0 under H1.
/// Ties go to the lowest index.
inline std::size_t greedy_drift_vertex(const ProblemInstance& inst, int hypothesis) {
  const ConvexSet& set = inst.set_for(hypothesis);
  const auto& table = hypothesis == 0 ? inst.rev_table.values : inst.fwd_table.values;
  std::size_t best = 0;
  double best_drift = expectation(set.vertex(0), table);
  for (std::size_t i = 1; i < set.vertex_count(); ++i) {
    const double d = expectation(set.vertex(i), table);
    if (d > best_drift) {
      best_drift = d;
      best = i;
    }
  }
  return best;
}

/// A strategy resolved against one instance, ready for repeated queries.
/// History enters only through its type (symbol counts).
class BoundAdversary {
 public:
  BoundAdversary(AdversaryStrategy strategy, const ProblemInstance& inst)
      : strategy_(std::move(strategy)), set_(&inst.set_for(strategy_.hypothesis())) {
    const int h = strategy_.hypothesis();
    struct Resolver {
      BoundAdversary& self;
      const ProblemInstance& inst;
      int h;
      void operator()(const StaticVertex& s) {
        if (s.index >= self.set_->vertex_count())
          throw DomainError("static_vertex index " + std::to_string(s.index) + " out of range");
        self.fixed_ = self.set_->vertex(s.index);
      }
      void operator()(const StaticMixture& s) { self.fixed_ = mix(*self.set_, s.weights); }
      void operator()(const OptimalPairForward&) {
        self.fixed_ = h == 0 ? inst.forward_pair.p_star : inst.forward_pair.q_star;
      }
      void operator()(const OptimalPairReverse&) {
        self.fixed_ = h == 0 ? inst.reverse_pair.p_star : inst.reverse_pair.q_star;
      }
      void operator()(const GreedyDrift&) {
        self.fixed_ = self.set_->vertex(greedy_drift_vertex(inst, h));
      }
      void operator()(const DpPolicy& s) {
        if (!s.table) throw DomainError("dp_policy strategy without a policy table");
        if (s.table->lattice().alphabet_size() != inst.alphabet_size())
          throw DomainError("dp_policy table alphabet does not match the instance");
        self.policy_ = s.table;
      }
    };
    std::visit(Resolver{*this, inst, h}, strategy_.kind());
  }

  const AdversaryStrategy& strategy() const noexcept { return strategy_; }

  /// Distribution of the next sample given the type of the history so far.
  const Distribution& next(std::span<const std::uint32_t> counts) const {
    if (policy_) return set_->vertex(policy_->lookup(counts));
    return *fixed_;
  }

 private:
  AdversaryStrategy strategy_;
  const ConvexSet* set_;
  std::optional<Distribution> fixed_;
  std::shared_ptr<const PolicyTable> policy_;
};

inline Distribution choose(const AdversaryStrategy& strategy, std::span<const Symbol> history,
                           const ProblemInstance& inst) {
  BoundAdversary bound(strategy, inst);
  std::vector<std::uint32_t> counts(inst.alphabet_size(), 0);
  for (Symbol x : history) {
    if (x >= counts.size()) throw DomainError("choose: history symbol outside alphabet");
    ++counts[x];
  }
  return bound.next(counts);
}

}  // namespace advseq
