#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "advseq/geometry.hpp"

using namespace advseq;

namespace {

double kl_bern(double a, double b) {
  return a * std::log2(a / b) + (1 - a) * std::log2((1 - a) / (1 - b));
}

// Parameter-grid minimum of D(Bern(a)||Bern(b)) (forward) or D(Bern(b)||Bern(a))
// (reverse) over a in [a_lo, a_hi], b in [b_lo, b_hi].
double bernoulli_grid_min(double a_lo, double a_hi, double b_lo, double b_hi, bool forward,
                          double step) {
  double best = std::numeric_limits<double>::infinity();
  const int na = static_cast<int>(std::lround((a_hi - a_lo) / step));
  const int nb = static_cast<int>(std::lround((b_hi - b_lo) / step));
  for (int i = 0; i <= na; ++i)
    for (int j = 0; j <= nb; ++j) {
      const double a = a_lo + i * step, b = b_lo + j * step;
      best = std::min(best, forward ? kl_bern(a, b) : kl_bern(b, a));
    }
  return best;
}

ConvexSet bern_set(double lo, double hi) {
  return ConvexSet({Distribution::bernoulli(lo), Distribution::bernoulli(hi)});
}

ConvexSet interval_P() { return bern_set(0.1, 0.3); }
ConvexSet interval_Q() { return bern_set(0.6, 0.8); }

// min D(u||p) over u with D(u||q) <= r, by a grid over the simplex.
double hoeffding_primal_grid(const std::vector<double>& p, const std::vector<double>& q, double r,
                             double step) {
  auto kl = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > 0) s += a[i] * std::log2(a[i] / b[i]);
    return s;
  };
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::lround(1.0 / step));
  if (p.size() == 2) {
    for (int i = 0; i <= n; ++i) {
      std::vector<double> u{1.0 - i * step, i * step};
      if (kl(u, q) <= r) best = std::min(best, kl(u, p));
    }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        std::vector<double> u{i * step, j * step, 1.0 - (i + j) * step};
        if (u[2] < 0) u[2] = 0;
        if (kl(u, q) <= r) best = std::min(best, kl(u, p));
      }
  }
  return best;
}

}  // namespace

TEST(ClosestPair, SingletonSetsForceThePair) {
  ConvexSet P({Distribution::bernoulli(0.2)}), Q({Distribution::bernoulli(0.8)});
  auto r = closest_pair(P, Q, Direction::forward);
  EXPECT_EQ(r.p_star, Distribution::bernoulli(0.2));
  EXPECT_EQ(r.q_star, Distribution::bernoulli(0.8));
  EXPECT_NEAR(r.divergence, 0.2 * std::log2(0.25) + 0.8 * std::log2(4.0), 1e-12);
  EXPECT_NEAR(r.divergence, 1.2, 1e-12);
}

TEST(ClosestPair, BernoulliIntervalForward) {
  auto r = closest_pair(interval_P(), interval_Q(), Direction::forward);
  EXPECT_NEAR(r.p_star[1], 0.3, 1e-6);
  EXPECT_NEAR(r.q_star[1], 0.6, 1e-6);
  EXPECT_NEAR(r.divergence, 0.265148, 1e-4);
  EXPECT_NEAR(r.divergence, bernoulli_grid_min(0.1, 0.3, 0.6, 0.8, true, 1e-3), 1e-3);
  EXPECT_EQ(r.direction, Direction::forward);
}

TEST(ClosestPair, BernoulliIntervalReverse) {
  auto r = closest_pair(interval_P(), interval_Q(), Direction::reverse);
  EXPECT_NEAR(r.p_star[1], 0.3, 1e-6);
  EXPECT_NEAR(r.q_star[1], 0.6, 1e-6);
  EXPECT_NEAR(r.divergence, kl_bern(0.6, 0.3), 1e-9);
  EXPECT_NEAR(r.divergence, 0.277058, 1e-4);
  EXPECT_NEAR(r.divergence, bernoulli_grid_min(0.1, 0.3, 0.6, 0.8, false, 1e-3), 1e-3);
}

TEST(ClosestPair, ResultInvariants) {
  for (auto dir : {Direction::forward, Direction::reverse}) {
    auto r = closest_pair(interval_P(), interval_Q(), dir);
    EXPECT_EQ(r.p_star, mix(interval_P(), r.p_weights));
    EXPECT_EQ(r.q_star, mix(interval_Q(), r.q_weights));
    const double d = dir == Direction::forward ? kl_divergence(r.p_star, r.q_star)
                                               : kl_divergence(r.q_star, r.p_star);
    EXPECT_DOUBLE_EQ(r.divergence, d);
    EXPECT_GT(r.divergence, 0.0);
    EXPECT_TRUE(r.converged);
  }
}

TEST(ClosestPair, RandomBernoulliIntervalsMatchGrid) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  int checked = 0;
  while (checked < 40) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    if (!(b + 0.02 < c || d + 0.02 < a)) continue;  // keep the intervals disjoint
    a = std::round(a * 1000) / 1000;
    b = std::round(b * 1000) / 1000;
    c = std::round(c * 1000) / 1000;
    d = std::round(d * 1000) / 1000;
    for (bool fwd : {true, false}) {
      auto r = closest_pair(bern_set(a, b), bern_set(c, d),
                            fwd ? Direction::forward : Direction::reverse);
      const double grid = bernoulli_grid_min(a, b, c, d, fwd, 1e-3);
      EXPECT_NEAR(r.divergence, grid, 1e-3) << a << " " << b << " " << c << " " << d;
      EXPECT_LE(r.divergence, grid + 1e-12);
    }
    ++checked;
  }
}

TEST(ClosestPair, ObjectiveTraceIsMonotone) {
  ConvexSet P({Distribution({0.6, 0.3, 0.1}), Distribution({0.5, 0.2, 0.3}),
               Distribution({0.7, 0.1, 0.2})});
  ConvexSet Q({Distribution({0.2, 0.3, 0.5}), Distribution({0.1, 0.5, 0.4})});
  for (auto dir : {Direction::forward, Direction::reverse}) {
    auto r = closest_pair(P, Q, dir);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1] + 1e-15);
  }
}

TEST(ClosestPair, TernaryNoWorseThanAnyGridPoint) {
  ConvexSet P({Distribution({0.6, 0.3, 0.1}), Distribution({0.5, 0.2, 0.3}),
               Distribution({0.7, 0.1, 0.2})});
  ConvexSet Q({Distribution({0.2, 0.3, 0.5}), Distribution({0.1, 0.5, 0.4})});
  const double step = 0.02;
  const int n = 50;
  for (auto dir : {Direction::forward, Direction::reverse}) {
    auto r = closest_pair(P, Q, dir);
    double grid = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j)
        for (int l = 0; l <= n; ++l) {
          auto p = mix(P, {i * step, j * step, std::max(0.0, 1 - (i + j) * step)});
          auto q = mix(Q, {l * step, 1 - l * step});
          grid = std::min(grid, dir == Direction::forward ? kl_divergence(p, q)
                                                          : kl_divergence(q, p));
        }
    EXPECT_LE(r.divergence, grid + 1e-12);
    EXPECT_NEAR(r.divergence, grid, 5e-3);
  }
}

TEST(ClosestPair, OverlappingSetsRejected) {
  ConvexSet U({Distribution::uniform(3)});
  EXPECT_THROW(closest_pair(U, U, Direction::forward), SetsOverlapError);
  EXPECT_THROW(build_instance(U, U), SetsOverlapError);
  EXPECT_THROW(build_instance(bern_set(0.1, 0.5), bern_set(0.4, 0.8)), SetsOverlapError);
}

TEST(ClosestPair, AlphabetMismatch) {
  EXPECT_THROW(closest_pair(ConvexSet({Distribution::uniform(2)}),
                            ConvexSet({Distribution::uniform(3)}), Direction::forward),
               DimensionError);
}

TEST(BuildInstance, SupportConstants) {
  auto inst = build_instance(interval_P(), interval_Q());
  EXPECT_NEAR(inst.c_fwd, 1.0, 1e-6);
  EXPECT_NEAR(inst.c_rev, 1.0, 1e-6);
  auto single = build_instance(ConvexSet({Distribution::bernoulli(0.2)}),
                               ConvexSet({Distribution::bernoulli(0.8)}));
  EXPECT_NEAR(single.c_fwd, 2.0, 1e-12);
  EXPECT_NEAR(single.c_rev, 2.0, 1e-12);
  EXPECT_NEAR(single.d_fwd(), 1.2, 1e-12);
  EXPECT_NEAR(single.d_rev(), 1.2, 1e-12);
}

TEST(HoeffdingPair, EdgeCases) {
  auto p = Distribution::bernoulli(0.2), q = Distribution::bernoulli(0.8);
  auto z = hoeffding_exponent_pair(p, q, 0.0);
  EXPECT_NEAR(z.s, kl_divergence(q, p), 1e-12);
  auto big = hoeffding_exponent_pair(p, q, kl_divergence(p, q));
  EXPECT_EQ(big.s, 0.0);
  EXPECT_EQ(hoeffding_exponent_pair(p, q, 5.0).s, 0.0);
  EXPECT_THROW(hoeffding_exponent_pair(p, q, -0.1), DomainError);
}

TEST(HoeffdingPair, DualMatchesPrimalGridBinary) {
  auto p = Distribution::bernoulli(0.2), q = Distribution::bernoulli(0.8);
  for (double r : {0.05, 0.1, 0.3, 0.6, 1.0}) {
    const double dual = hoeffding_exponent_pair(p, q, r).s;
    const double primal = hoeffding_primal_grid({0.8, 0.2}, {0.2, 0.8}, r, 1e-4);
    EXPECT_NEAR(dual, primal, 1e-3) << "r=" << r;
  }
  auto a = Distribution::bernoulli(0.3), b = Distribution::bernoulli(0.6);
  for (double r : {0.02, 0.1, 0.2}) {
    EXPECT_NEAR(hoeffding_exponent_pair(a, b, r).s,
                hoeffding_primal_grid({0.7, 0.3}, {0.4, 0.6}, r, 1e-4), 1e-3);
  }
}

TEST(HoeffdingPair, DualMatchesPrimalGridTernary) {
  Distribution p({0.6, 0.3, 0.1}), q({0.2, 0.3, 0.5});
  for (double r : {0.1, 0.3, 0.5}) {
    const double dual = hoeffding_exponent_pair(p, q, r).s;
    const double primal = hoeffding_primal_grid({0.6, 0.3, 0.1}, {0.2, 0.3, 0.5}, r, 1e-3);
    EXPECT_NEAR(dual, primal, 1e-3) << "r=" << r;
  }
}

TEST(HoeffdingPair, GoldenSectionAgreesWithLambdaGrid) {
  std::vector<std::pair<Distribution, Distribution>> pairs{
      {Distribution::bernoulli(0.2), Distribution::bernoulli(0.8)},
      {Distribution::bernoulli(0.3), Distribution::bernoulli(0.6)},
      {Distribution({0.6, 0.3, 0.1}), Distribution({0.2, 0.3, 0.5})}};
  for (const auto& [p, q] : pairs)
    for (double frac : {0.1, 0.4, 0.7}) {
      const double r = frac * kl_divergence(p, q);
      const auto h = hoeffding_exponent_pair(p, q, r);
      double best = -std::numeric_limits<double>::infinity(), best_l = 0;
      for (int i = 0; i < 10000; ++i) {
        const double l = i * 1e-4;
        const double f = (-l * r - renyi_psi(p, q, l)) / (1 - l);
        if (f > best) {
          best = f;
          best_l = l;
        }
      }
      EXPECT_NEAR(h.lambda_star, best_l, 1e-4);
      EXPECT_GE(h.s, best - 1e-12);
      EXPECT_NEAR(h.s, best, 1e-4);
    }
}

TEST(HardestPair, SingletonsForceThePair) {
  auto p = Distribution::bernoulli(0.2), q = Distribution::bernoulli(0.8);
  auto sol = hardest_pair(ConvexSet({p}), ConvexSet({q}), 0.3);
  EXPECT_EQ(sol.p_H, p);
  EXPECT_EQ(sol.q_H, q);
  const auto h = hoeffding_exponent_pair(p, q, 0.3);
  EXPECT_DOUBLE_EQ(sol.s_star, h.s);
  EXPECT_DOUBLE_EQ(sol.lambda_star, h.lambda_star);
}

TEST(HardestPair, BernoulliIntervalMatchesNestedGrid) {
  const double r = 0.05;
  auto sol = hardest_pair(interval_P(), interval_Q(), r);
  double grid = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j)
      grid = std::min(grid, hoeffding_exponent_pair(Distribution::bernoulli(0.1 + i * 1e-3),
                                                    Distribution::bernoulli(0.6 + j * 1e-3), r)
                                .s);
  EXPECT_NEAR(sol.s_star, grid, 1e-3);
  EXPECT_LE(sol.s_star, grid + 1e-9);
  // Invariant: s* is the dual value at (p_H, q_H, lambda*).
  EXPECT_NEAR(sol.s_star,
              (-sol.lambda_star * r - renyi_psi(sol.p_H, sol.q_H, sol.lambda_star)) /
                  (1 - sol.lambda_star),
              1e-12);
}

TEST(HardestPair, ZeroFloorIsTheReverseClosestPair) {
  auto sol = hardest_pair(interval_P(), interval_Q(), 0.0);
  auto rev = closest_pair(interval_P(), interval_Q(), Direction::reverse);
  EXPECT_NEAR(sol.s_star, rev.divergence, 1e-9);
}

TEST(HardestPair, RejectsOverlap) {
  ConvexSet U({Distribution::uniform(2)});
  EXPECT_THROW(hardest_pair(U, U, 0.1), SetsOverlapError);
}

TEST(InequalityChecks, Pythagorean) {
  auto inst = build_instance(interval_P(), interval_Q());
  EXPECT_NEAR(check_pythagorean(inst, inst.forward_pair.p_star), 0.0, 1e-9);
  for (const auto& v : inst.P.vertices()) EXPECT_GE(check_pythagorean(inst, v), -1e-9);
  const double expected = (0.1 * -1.0 + 0.9 * std::log2(0.7 / 0.4)) - kl_bern(0.3, 0.6);
  EXPECT_NEAR(check_pythagorean(inst, Distribution::bernoulli(0.1)), expected, 1e-9);
  EXPECT_NEAR(check_pythagorean(inst, Distribution::bernoulli(0.1)), 0.361471, 1e-5);
  EXPECT_NEAR(check_pythagorean_reverse(inst, inst.reverse_pair.q_star), 0.0, 1e-9);
  for (const auto& v : inst.Q.vertices()) EXPECT_GE(check_pythagorean_reverse(inst, v), -1e-9);
}

TEST(InequalityChecks, LikelihoodRatioBound) {
  auto inst = build_instance(interval_P(), interval_Q());
  // Vertex 1 of Q is Bern(0.8); vertex 0 of P is Bern(0.1).
  EXPECT_NEAR(check_likelihood_ratio_bound(inst, 0, 1), 0.8 * 0.5 + 0.2 * 0.7 / 0.4, 1e-9);
  EXPECT_NEAR(check_likelihood_ratio_bound(inst, 0, 1), 0.75, 1e-9);
  EXPECT_NEAR(check_likelihood_ratio_bound(inst, 1, 0), 0.714286, 1e-6);
  for (int side : {0, 1})
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_LE(check_likelihood_ratio_bound(inst, side, i), 1 + 1e-9);
  // At q = q0* the expectation is sum_x p0*(x) = 1.
  ConvexSet Qs({inst.forward_pair.q_star});
  auto at_q = ProblemInstance::from_pairs(inst.P, Qs, inst.forward_pair, inst.reverse_pair);
  EXPECT_NEAR(check_likelihood_ratio_bound(at_q, 0, 0), 1.0, 1e-12);
  EXPECT_THROW(check_likelihood_ratio_bound(inst, 2, 0), DomainError);
}

TEST(InequalityChecks, HoeffdingVertexInequality) {
  auto sol = hardest_pair(interval_P(), interval_Q(), 0.05);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GE(check_hoeffding_vertex_inequality(sol, interval_Q(), 0, i), -1e-6);
    EXPECT_GE(check_hoeffding_vertex_inequality(sol, interval_P(), 1, i), -1e-6);
  }
  EXPECT_NEAR(check_hoeffding_vertex_inequality(sol, ConvexSet({sol.q_H}), 0, 0), 0.0, 1e-9);
  EXPECT_NEAR(check_hoeffding_vertex_inequality(sol, ConvexSet({sol.p_H}), 1, 0), 0.0, 1e-9);

  auto p = Distribution::bernoulli(0.2), q = Distribution::bernoulli(0.8);
  auto single = hardest_pair(ConvexSet({p}), ConvexSet({q}), 0.3);
  EXPECT_NEAR(check_hoeffding_vertex_inequality(single, ConvexSet({q}), 0, 0), 0.0, 1e-9);
}
