#pragma once

// Finite-alphabet probability primitives. All logarithms are base 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "advseq/defaults.hpp"
#include "advseq/error.hpp"

namespace advseq {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Probability vector over {0, ..., k-1}, k >= 2, with every mass >= kMinMass.
///
/// Validated once at construction: a vector whose sum is within kSumTolerance
/// of one is renormalized, anything else is rejected. Zero or sub-floor masses
/// are rejected rather than clipped, since every pair of distributions must be
/// mutually absolutely continuous.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) { validate(); }
  Distribution(std::initializer_list<double> probs) : probs_(probs) { validate(); }

  /// Bern(theta) as the vector (1 - theta, theta).
  static Distribution bernoulli(double theta) { return Distribution({1.0 - theta, theta}); }

  static Distribution uniform(std::size_t k) {
    return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t x) const noexcept { return probs_[x]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  void validate() {
    if (probs_.size() < 2)
      throw ValidationError("distribution needs an alphabet of at least 2 symbols");
    CompensatedSum sum;
    for (std::size_t x = 0; x < probs_.size(); ++x) {
      const double v = probs_[x];
      if (!std::isfinite(v) || v < defaults::kMinMass) {
        std::ostringstream os;
        os << "entry " << x << " = " << v << " is below min_mass " << defaults::kMinMass
           << " (distributions must be mutually absolutely continuous)";
        throw ValidationError(os.str());
      }
      sum.add(v);
    }
    const double s = sum.value();
    if (std::abs(s - 1.0) > defaults::kSumTolerance) {
      std::ostringstream os;
      os.precision(12);
      os << "entries sum to " << s << ", expected 1 within " << defaults::kSumTolerance;
      throw ValidationError(os.str());
    }
    for (double& v : probs_) v /= s;
  }

  std::vector<double> probs_;
};

inline void require_same_alphabet(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size())
    throw DimensionError("alphabet mismatch: " + std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()));
}

/// Polytope of distributions given by its vertices.
class ConvexSet {
 public:
  explicit ConvexSet(std::vector<Distribution> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.empty()) throw ValidationError("convex set needs at least one vertex");
    for (const auto& v : vertices_) require_same_alphabet(vertices_.front(), v);
  }
  ConvexSet(std::initializer_list<Distribution> vertices)
      : ConvexSet(std::vector<Distribution>(vertices)) {}

  std::size_t alphabet_size() const noexcept { return vertices_.front().size(); }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  const Distribution& vertex(std::size_t i) const { return vertices_.at(i); }
  std::span<const Distribution> vertices() const noexcept { return vertices_; }

 private:
  std::vector<Distribution> vertices_;
};

/// D(p||q) in bits.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  require_same_alphabet(p, q);
  CompensatedSum sum;
  for (std::size_t x = 0; x < p.size(); ++x) sum.add(p[x] * std::log2(p[x] / q[x]));
  return std::max(0.0, sum.value());
}

/// psi_lambda(p||q) = log2 sum_x p(x)^(1-lambda) q(x)^lambda, for lambda in [0, 1].
inline double renyi_psi(const Distribution& p, const Distribution& q, double lambda) {
  require_same_alphabet(p, q);
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw DomainError("renyi_psi: lambda must lie in [0, 1], got " + std::to_string(lambda));
  CompensatedSum sum;
  for (std::size_t x = 0; x < p.size(); ++x)
    sum.add(std::pow(p[x], 1.0 - lambda) * std::pow(q[x], lambda));
  return std::log2(sum.value());
}

struct LogRatioTable {
  Distribution numerator;
  Distribution denominator;
  std::vector<double> values;  // log2(numerator[x] / denominator[x])
  double max_abs = 0.0;        // support constant, bits

  double operator[](std::size_t x) const noexcept { return values[x]; }
};

inline LogRatioTable log_ratio_table(const Distribution& num, const Distribution& den) {
  require_same_alphabet(num, den);
  std::vector<double> values(num.size());
  double max_abs = 0.0;
  for (std::size_t x = 0; x < num.size(); ++x) {
    values[x] = std::log2(num[x] / den[x]);
    max_abs = std::max(max_abs, std::abs(values[x]));
  }
  return {num, den, std::move(values), max_abs};
}

/// Validates a weight vector over `count` vertices; throws DomainError.
inline void validate_weights(std::span<const double> weights, std::size_t count) {
  if (weights.size() != count)
    throw DomainError("mixture weights: expected " + std::to_string(count) + " weights, got " +
                      std::to_string(weights.size()));
  CompensatedSum sum;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("mixture weights must be non-negative");
    sum.add(w);
  }
  if (std::abs(sum.value() - 1.0) > defaults::kSumTolerance)
    throw DomainError("mixture weights must sum to 1");
}

/// Convex combination sum_i weights[i] * vertex_i.
inline Distribution mix(const ConvexSet& set, std::span<const double> weights) {
  validate_weights(weights, set.vertex_count());
  std::vector<double> out(set.alphabet_size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < weights.size(); ++i) sum.add(weights[i] * set.vertex(i)[x]);
    out[x] = sum.value();
  }
  return Distribution(std::move(out));
}

inline Distribution mix(const ConvexSet& set, std::initializer_list<double> weights) {
  return mix(set, std::span<const double>(weights.begin(), weights.size()));
}

/// E_p[f(X)] for a table of per-symbol values.
inline double expectation(const Distribution& p, std::span<const double> f) {
  CompensatedSum sum;
  for (std::size_t x = 0; x < p.size(); ++x) sum.add(p[x] * f[x]);
  return sum.value();
}

}  // namespace advseq
