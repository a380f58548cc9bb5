#pragma once

// KL closest pairs between two vertex polytopes, the problem instance built
// from them, and the fixed-length Hoeffding machinery (psi-based exponent,
// hardest pair). Also hosts the inequality checks that only need
// solved pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advseq/defaults.hpp"
#include "advseq/error.hpp"
#include "advseq/prob.hpp"

namespace advseq {

enum class Direction { forward, reverse };

inline const char* to_string(Direction d) noexcept {
  return d == Direction::forward ? "forward" : "reverse";
}

struct ClosestPairResult {
  Distribution p_star;
  Distribution q_star;
  std::vector<double> p_weights;
  std::vector<double> q_weights;
  double divergence = 0.0;  // D(p*||q*) forward, D(q*||p*) reverse
  Direction direction = Direction::forward;
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // objective after each outer iteration
};

namespace detail {

inline std::vector<double> mix_raw(const ConvexSet& set, std::span<const double> w) {
  std::vector<double> out(set.alphabet_size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    CompensatedSum s;
    for (std::size_t i = 0; i < w.size(); ++i) s.add(w[i] * set.vertex(i)[x]);
    out[x] = s.value();
  }
  return out;
}

inline double kl_raw(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t x = 0; x < a.size(); ++x) s.add(a[x] * std::log2(a[x] / b[x]));
  return s.value();
}

inline std::vector<double> unit_weights(std::size_t n, std::size_t i) {
  std::vector<double> w(n, 0.0);
  w[i] = 1.0;
  return w;
}

inline void renormalize(std::vector<double>& w) {
  double s = 0.0;
  for (double& v : w) {
    v = std::max(v, 0.0);
    s += v;
  }
  for (double& v : w) v /= s;
}

// Root of a non-decreasing function on [0, hi], assuming fn(0) < 0.
template <class Fn>
double monotone_root(Fn&& fn, double hi) {
  if (fn(hi) <= 0.0) return hi;
  double lo = 0.0;
  for (int it = 0; it < defaults::kLineSearchIterations && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fn(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimization of a unimodal function on [lo, hi].
template <class Fn>
std::pair<double, double> golden_minimize(Fn&& fn, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < defaults::kGoldenIterations && b - a > 1e-12; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  double best_x = fc <= fd ? c : d;
  double best_f = std::min(fc, fd);
  // The endpoints are often the optimum on a simplex edge.
  for (double x : {lo, hi}) {
    const double fx = fn(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  return {best_x, best_f};
}

// One pairwise Frank-Wolfe pass budget on one block of
//   min_{a in hull A, b in hull B} D(a || b)
// with the other block held fixed. `numerator_block` selects which weights move.
inline void frank_wolfe_block(const ConvexSet& moving, std::vector<double>& w,
                              std::vector<double>& a, std::vector<double>& b,
                              bool numerator_block) {
  const std::size_t k = a.size();
  const std::size_t m = w.size();
  if (m < 2) return;
  std::vector<double> grad(m);
  for (int it = 0; it < defaults::kMaxInnerIterations; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      CompensatedSum g;
      for (std::size_t x = 0; x < k; ++x) {
        const double v = moving.vertex(i)[x];
        g.add(numerator_block ? v * std::log2(a[x] / b[x]) : -a[x] * v / b[x]);
      }
      grad[i] = g.value();
    }
    std::size_t fw = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (grad[i] < grad[fw]) fw = i;
    std::size_t away = m;
    for (std::size_t i = 0; i < m; ++i)
      if (w[i] > 0.0 && (away == m || grad[i] > grad[away])) away = i;
    if (away == m || away == fw || grad[away] - grad[fw] <= 1e-15) return;

    std::vector<double> delta(k);
    for (std::size_t x = 0; x < k; ++x)
      delta[x] = moving.vertex(fw)[x] - moving.vertex(away)[x];
    std::vector<double>& moved = numerator_block ? a : b;
    auto slope = [&](double gamma) {
      CompensatedSum s;
      for (std::size_t x = 0; x < k; ++x) {
        const double mx = moved[x] + gamma * delta[x];
        if (numerator_block)
          s.add(delta[x] * std::log2(mx / b[x]));
        else
          s.add(-a[x] * delta[x] / mx);
      }
      return s.value();
    };
    const double gamma = monotone_root(slope, w[away]);
    if (gamma <= 0.0) return;

    const double before = kl_raw(a, b);
    std::vector<double> trial_moved(k);
    for (std::size_t x = 0; x < k; ++x) trial_moved[x] = moved[x] + gamma * delta[x];
    const double after = numerator_block ? kl_raw(trial_moved, b) : kl_raw(a, trial_moved);
    if (!(after <= before)) return;

    w[fw] += gamma;
    w[away] = (gamma == w[away]) ? 0.0 : w[away] - gamma;
    renormalize(w);
    moved = mix_raw(moving, w);
  }
}

struct HullKlSolution {
  std::vector<double> a_weights;
  std::vector<double> b_weights;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;
};

// min over a in hull(A), b in hull(B) of D(a || b) by alternating minimization.
inline HullKlSolution minimize_kl_between_hulls(const ConvexSet& A, const ConvexSet& B,
                                                double tol) {
  HullKlSolution sol;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < A.vertex_count(); ++i)
    for (std::size_t j = 0; j < B.vertex_count(); ++j) {
      const double d = kl_divergence(A.vertex(i), B.vertex(j));
      if (d < best) {
        best = d;
        sol.a_weights = unit_weights(A.vertex_count(), i);
        sol.b_weights = unit_weights(B.vertex_count(), j);
      }
    }
  std::vector<double> a = mix_raw(A, sol.a_weights);
  std::vector<double> b = mix_raw(B, sol.b_weights);
  double objective = kl_raw(a, b);
  for (int outer = 1; outer <= defaults::kMaxOuterIterations; ++outer) {
    frank_wolfe_block(A, sol.a_weights, a, b, true);
    frank_wolfe_block(B, sol.b_weights, a, b, false);
    const double next = kl_raw(a, b);
    sol.trace.push_back(next);
    sol.iterations = outer;
    const double improvement = objective - next;
    objective = std::min(objective, next);
    if (improvement < tol / 10.0) {
      sol.converged = true;
      break;
    }
  }
  sol.objective = objective;
  return sol;
}

}  // namespace detail

/// Forward: argmin D(p||q); reverse: argmin D(q||p); over p in hull(P), q in hull(Q).
inline ClosestPairResult closest_pair(const ConvexSet& P, const ConvexSet& Q, Direction direction,
                                      double tol = defaults::kSolverTolerance) {
  if (P.alphabet_size() != Q.alphabet_size())
    throw DimensionError("closest_pair: P and Q live on different alphabets");
  const bool fwd = direction == Direction::forward;
  auto sol = fwd ? detail::minimize_kl_between_hulls(P, Q, tol)
                 : detail::minimize_kl_between_hulls(Q, P, tol);
  std::vector<double> pw = fwd ? sol.a_weights : sol.b_weights;
  std::vector<double> qw = fwd ? sol.b_weights : sol.a_weights;
  Distribution p = mix(P, pw);
  Distribution q = mix(Q, qw);
  const double divergence = fwd ? kl_divergence(p, q) : kl_divergence(q, p);
  if (divergence <= tol)
    throw SetsOverlapError(std::string("closest_pair: ") + to_string(direction) +
                           " divergence " + std::to_string(divergence) +
                           " does not exceed tolerance; P and Q must be disjoint");
  return {std::move(p), std::move(q), std::move(pw), std::move(qw), divergence, direction,
          sol.converged, sol.iterations, std::move(sol.trace)};
}

/// (P, Q) with both solved closest pairs and their support constants.
///
/// s0 accumulates fwd_table = log2(p0*/q0*) and s1 accumulates
/// rev_table = log2(q1*/p1*).
struct ProblemInstance {
  ConvexSet P;
  ConvexSet Q;
  ClosestPairResult forward_pair;  // (p0*, q0*)
  ClosestPairResult reverse_pair;  // (p1*, q1*)
  LogRatioTable fwd_table;
  LogRatioTable rev_table;
  double c_fwd = 0.0;
  double c_rev = 0.0;

  std::size_t alphabet_size() const noexcept { return P.alphabet_size(); }
  double d_fwd() const noexcept { return forward_pair.divergence; }  // D(p0*||q0*)
  double d_rev() const noexcept { return reverse_pair.divergence; }  // D(q1*||p1*)
  const ConvexSet& set_for(int hypothesis) const noexcept { return hypothesis == 0 ? P : Q; }

  /// Assembles an instance from already-solved pairs. No disjointness check:
  /// this is how degenerate self-test instances are built.
  static ProblemInstance from_pairs(ConvexSet P, ConvexSet Q, ClosestPairResult fwd,
                                    ClosestPairResult rev) {
    auto ft = log_ratio_table(fwd.p_star, fwd.q_star);
    auto rt = log_ratio_table(rev.q_star, rev.p_star);
    const double cf = ft.max_abs, cr = rt.max_abs;
    return {std::move(P), std::move(Q), std::move(fwd), std::move(rev),
            std::move(ft), std::move(rt), cf, cr};
  }
};

inline ProblemInstance build_instance(const ConvexSet& P, const ConvexSet& Q,
                                      double tol = defaults::kSolverTolerance) {
  auto fwd = closest_pair(P, Q, Direction::forward, tol);
  auto rev = closest_pair(P, Q, Direction::reverse, tol);
  return ProblemInstance::from_pairs(P, Q, std::move(fwd), std::move(rev));
}

// ---------------------------------------------------------------------------
// Fixed-length (Hoeffding) machinery.

struct HoeffdingPair {
  double lambda_star = 0.0;
  double s = 0.0;
};

namespace detail {

inline double psi_raw(std::span<const double> p, std::span<const double> q, double lambda) {
  CompensatedSum s;
  for (std::size_t x = 0; x < p.size(); ++x)
    s.add(std::pow(p[x], 1.0 - lambda) * std::pow(q[x], lambda));
  return std::log2(s.value());
}

inline HoeffdingPair hoeffding_raw(std::span<const double> p, std::span<const double> q,
                                   double r) {
  if (r == 0.0) return {1.0, std::max(0.0, kl_raw(q, p))};
  if (r >= kl_raw(p, q)) return {0.0, 0.0};
  constexpr double eps = defaults::kLambdaEpsilon;
  auto neg_objective = [&](double lambda) {
    return -((-lambda * r - psi_raw(p, q, lambda)) / (1.0 - lambda));
  };
  auto [lambda, neg_value] = golden_minimize(neg_objective, eps, 1.0 - eps);
  if (-neg_value <= 0.0) return {0.0, 0.0};
  return {lambda, -neg_value};
}

}  // namespace detail

/// sup_{0<=lambda<=1} (-lambda r - psi_lambda(p||q)) / (1 - lambda) and its maximizer.
inline HoeffdingPair hoeffding_exponent_pair(const Distribution& p, const Distribution& q,
                                             double r) {
  require_same_alphabet(p, q);
  if (!(r >= 0.0) || !std::isfinite(r))
    throw DomainError("hoeffding_exponent_pair: r must be a finite non-negative number");
  return detail::hoeffding_raw(p.probs(), q.probs(), r);
}

struct HoeffdingSolution {
  double r = 0.0;
  Distribution p_H;
  Distribution q_H;
  std::vector<double> p_weights;
  std::vector<double> q_weights;
  double lambda_star = 0.0;
  double s_star = 0.0;
  bool converged = false;
};

/// Pair in hull(P) x hull(Q) minimizing the Hoeffding exponent at floor r.
/// Coordinate descent over both weight vectors, multi-started from every
/// vertex pair; ties between starts keep the lowest start index.
inline HoeffdingSolution hardest_pair(const ConvexSet& P, const ConvexSet& Q, double r,
                                      double tol = defaults::kSolverTolerance) {
  if (P.alphabet_size() != Q.alphabet_size())
    throw DimensionError("hardest_pair: P and Q live on different alphabets");
  if (!(r >= 0.0) || !std::isfinite(r))
    throw DomainError("hardest_pair: r must be a finite non-negative number");
  // Disjointness is a precondition of the whole construction.
  (void)closest_pair(P, Q, Direction::forward, tol);

  auto evaluate = [&](const std::vector<double>& w, const std::vector<double>& v) {
    auto p = detail::mix_raw(P, w);
    auto q = detail::mix_raw(Q, v);
    return detail::hoeffding_raw(p, q, r).s;
  };

  // Coordinate move: shift mass t from vertex j to vertex i of one block.
  auto descend_block = [&](std::vector<double>& moving, const std::function<double()>& f) {
    const std::size_t m = moving.size();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        const double wi = moving[i], wj = moving[j];
        if (wi + wj <= 0.0) continue;
        const double current = f();
        auto along = [&](double t) {
          moving[i] = t;
          moving[j] = wi + wj - t;
          return f();
        };
        auto [t, value] = detail::golden_minimize(along, 0.0, wi + wj);
        if (value < current) {
          moving[i] = t;
          moving[j] = wi + wj - t;
        } else {
          moving[i] = wi;
          moving[j] = wj;
        }
      }
  };

  std::optional<HoeffdingSolution> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < P.vertex_count(); ++i)
    for (std::size_t j = 0; j < Q.vertex_count(); ++j) {
      auto w = detail::unit_weights(P.vertex_count(), i);
      auto v = detail::unit_weights(Q.vertex_count(), j);
      double value = evaluate(w, v);
      bool converged = false;
      for (int outer = 0; outer < defaults::kMaxOuterIterations; ++outer) {
        descend_block(w, [&] { return evaluate(w, v); });
        descend_block(v, [&] { return evaluate(w, v); });
        const double next = evaluate(w, v);
        const double improvement = value - next;
        value = std::min(value, next);
        if (improvement < tol / 10.0) {
          converged = true;
          break;
        }
      }
      if (value < best_value) {
        best_value = value;
        detail::renormalize(w);
        detail::renormalize(v);
        Distribution p = mix(P, w);
        Distribution q = mix(Q, v);
        auto h = hoeffding_exponent_pair(p, q, r);
        best = HoeffdingSolution{r, std::move(p), std::move(q), std::move(w), std::move(v),
                                 h.lambda_star, h.s, converged};
      }
    }
  return *best;
}

// ---------------------------------------------------------------------------
// Inequality checks on solved instances.

/// E_p[log2(p0*/q0*)] - D(p0*||q0*); non-negative for every p in P.
inline double check_pythagorean(const ProblemInstance& inst, const Distribution& p) {
  require_same_alphabet(p, inst.forward_pair.p_star);
  return expectation(p, inst.fwd_table.values) - inst.d_fwd();
}

/// E_q[log2(q1*/p1*)] - D(q1*||p1*); non-negative for every q in Q.
inline double check_pythagorean_reverse(const ProblemInstance& inst, const Distribution& q) {
  require_same_alphabet(q, inst.reverse_pair.q_star);
  return expectation(q, inst.rev_table.values) - inst.d_rev();
}

/// Side 0: E_q[p0*(X)/q0*(X)] at vertex q of Q. Side 1: E_p[q1*(X)/p1*(X)] at
/// vertex p of P. Both are at most 1.
inline double check_likelihood_ratio_bound(const ProblemInstance& inst, int side,
                                           std::size_t vertex_index) {
  if (side != 0 && side != 1) throw DomainError("side must be 0 or 1");
  const auto& pair = side == 0 ? inst.forward_pair : inst.reverse_pair;
  const Distribution& v = side == 0 ? inst.Q.vertex(vertex_index) : inst.P.vertex(vertex_index);
  CompensatedSum s;
  for (std::size_t x = 0; x < v.size(); ++x)
    s.add(side == 0 ? v[x] * pair.p_star[x] / pair.q_star[x]
                    : v[x] * pair.q_star[x] / pair.p_star[x]);
  return s.value();
}

/// Side 0 (set = Q): 2^psi - sum_x v(x) (p_H/q_H)^(1-lambda*).
/// Side 1 (set = P): 2^psi - sum_x v(x) (q_H/p_H)^lambda*.
inline double check_hoeffding_vertex_inequality(const HoeffdingSolution& sol,
                                                const ConvexSet& set, int side,
                                                std::size_t vertex_index) {
  if (side != 0 && side != 1) throw DomainError("side must be 0 or 1");
  const Distribution& v = set.vertex(vertex_index);
  require_same_alphabet(v, sol.p_H);
  const double lambda = sol.lambda_star;
  CompensatedSum s;
  for (std::size_t x = 0; x < v.size(); ++x)
    s.add(side == 0 ? v[x] * std::pow(sol.p_H[x] / sol.q_H[x], 1.0 - lambda)
                    : v[x] * std::pow(sol.q_H[x] / sol.p_H[x], lambda));
  return std::exp2(renyi_psi(sol.p_H, sol.q_H, lambda)) - s.value();
}

}  // namespace advseq
