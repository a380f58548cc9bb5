#pragma once

// Every numeric default used by the library and the CLI. The CLI exposes the
// ones marked (flag) as overridable options.

#include <cstddef>
#include <string_view>

namespace advseq::defaults {

// Distribution ingestion.
inline constexpr double kMinMass = 1e-9;
inline constexpr double kSumTolerance = 1e-9;

// Closest-pair and Hoeffding solvers.
inline constexpr double kSolverTolerance = 1e-12;  // (flag) --tol
inline constexpr int kMaxOuterIterations = 10000;
inline constexpr int kMaxInnerIterations = 50;
inline constexpr int kLineSearchIterations = 200;
inline constexpr int kGoldenIterations = 200;
inline constexpr double kLambdaEpsilon = 1e-6;

// Sequential tests. A statistic within this distance below its threshold
// counts as crossed, so incremental sums and count-based sums agree.
inline constexpr double kCrossingSlack = 1e-9;

// Exact oracle.
inline constexpr std::size_t kStateBudget = 5'000'000;          // (flag) --state-budget
inline constexpr std::size_t kBruteForceBudget = 50'000'000;    // grid pair evaluations

// Monte Carlo.
inline constexpr double kHorizonFactor = 20.0;  // horizon = ceil(20 n / min divergence)
inline constexpr double kWilsonZ = 1.959963984540054;
inline constexpr std::string_view kRngName = "splitmix64-counter";

// Certificate slacks.
inline constexpr double kCertSlack = 1e-9;
inline constexpr double kTauSlack = 1e-6;
inline constexpr double kHoeffdingVertexSlack = 1e-6;

}  // namespace advseq::defaults
