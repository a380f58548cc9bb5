#pragma once

// Sequence types: the vector of symbol counts of a sample. Both test
// statistics are linear in the counts, so the type lattice is the natural
// state space for exact worst-case computations.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advseq/error.hpp"

namespace advseq {

/// Compositions of t into k non-negative parts, for t = 0..horizon, ranked
/// lexicographically within each level.
class TypeLattice {
 public:
  TypeLattice(std::size_t k, std::uint64_t horizon) : k_(k), horizon_(horizon) {
    if (k < 1) throw DomainError("type lattice needs k >= 1");
    const std::size_t rows = static_cast<std::size_t>(horizon) + k + 1;
    binom_.assign(rows * (k + 1), 0.0);
    for (std::size_t n = 0; n < rows; ++n) {
      binom(n, 0) = 1.0;
      for (std::size_t r = 1; r <= k && r <= n; ++r)
        binom(n, r) = binom(n - 1, r - 1) + (r <= n - 1 ? binom(n - 1, r) : 0.0);
    }
  }

  std::size_t alphabet_size() const noexcept { return k_; }
  std::uint64_t horizon() const noexcept { return horizon_; }

  /// Number of types of length t.
  std::size_t level_size(std::uint64_t t) const noexcept {
    return static_cast<std::size_t>(choose(t + k_ - 1, k_ - 1));
  }

  /// Number of types of every length 0..horizon, without building the table.
  static double total_states(std::size_t k, std::uint64_t horizon) {
    // C(horizon + k, k)
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
      c = c * static_cast<double>(horizon + i) / static_cast<double>(i);
    return c;
  }

  /// Lexicographic rank of `counts` among the types of length sum(counts).
  std::size_t rank(std::span<const std::uint32_t> counts) const noexcept {
    std::uint64_t remaining = 0;
    for (auto c : counts) remaining += c;
    double r = 0.0;
    for (std::size_t i = 0; i + 1 < k_; ++i) {
      const std::size_t j = k_ - i - 1;  // parts after position i
      r += choose(remaining + j, j) - choose(remaining - counts[i] + j, j);
      remaining -= counts[i];
    }
    return static_cast<std::size_t>(r);
  }

  /// All types of length t, flattened (level_size(t) rows of k counts) in rank order.
  std::vector<std::uint32_t> enumerate(std::uint64_t t) const {
    std::vector<std::uint32_t> out;
    out.reserve(level_size(t) * k_);
    std::vector<std::uint32_t> cur(k_, 0);
    fill(0, static_cast<std::uint32_t>(t), cur, out);
    return out;
  }

 private:
  double& binom(std::size_t n, std::size_t r) { return binom_[n * (k_ + 1) + r]; }
  double choose(std::uint64_t n, std::size_t r) const noexcept {
    if (r > n) return 0.0;
    return binom_[static_cast<std::size_t>(n) * (k_ + 1) + r];
  }

  void fill(std::size_t pos, std::uint32_t remaining, std::vector<std::uint32_t>& cur,
            std::vector<std::uint32_t>& out) const {
    if (pos + 1 == k_) {
      cur[pos] = remaining;
      out.insert(out.end(), cur.begin(), cur.end());
      return;
    }
    for (std::uint32_t v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      fill(pos + 1, remaining - v, cur, out);
    }
  }

  std::size_t k_;
  std::uint64_t horizon_;
  std::vector<double> binom_;
};

/// Vertex index chosen by the adversary at every non-terminal type of length
/// < horizon.
class PolicyTable {
 public:
  PolicyTable(TypeLattice lattice, std::vector<std::vector<std::uint16_t>> choices)
      : lattice_(std::move(lattice)), choices_(std::move(choices)) {}

  const TypeLattice& lattice() const noexcept { return lattice_; }
  std::uint64_t horizon() const noexcept { return lattice_.horizon(); }

  std::uint16_t lookup(std::span<const std::uint32_t> counts) const {
    if (counts.size() != lattice_.alphabet_size())
      throw PolicyDomainError("policy lookup: type has wrong alphabet size");
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    if (t >= lattice_.horizon())
      throw PolicyDomainError("policy lookup: history length " + std::to_string(t) +
                              " is at or beyond the policy horizon " +
                              std::to_string(lattice_.horizon()));
    return choices_[t][lattice_.rank(counts)];
  }

 private:
  TypeLattice lattice_;
  std::vector<std::vector<std::uint16_t>> choices_;  // [t][rank]
};

}  // namespace advseq
