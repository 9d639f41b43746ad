#pragma once

#include <cstdint>

#include "ibot/solver.hpp"

namespace ibot::ba {

struct BaConfig {
  double beta = 1.0;              // fixed multiplier (slope)
  int max_iter = 5000;
  double tol = 1e-12;             // successive I(X;T) change
  double jitter_scale = 1e-2;     // same seeded init scheme as the GAS solver
  std::uint64_t rng_seed = 1;
  Eigen::Index bottleneck_size = 0;  // 0: use the problem's N
};

/// Self-consistent Blahut-Arimoto iterates for the fixed-multiplier IB
/// Lagrangian.
struct BaState {
  Eigen::MatrixXd u;     // M x N, row (i) = P(T | x_i)
  Eigen::VectorXd r;     // N, P(T)
  Eigen::MatrixXd py_t;  // K x N, column (j) = P(Y | t_j)
  double beta = 0.0;
};

BaState init_state(const IbProblem& problem, const BaConfig& cfg);

/// One BA pass: r from u, decoder P(Y|T) from u, then the exponential-tilt
/// encoder update with explicit row normalization.
void ba_step(BaState& state, const IbProblem& problem);

SolverReport ba_solve(const IbProblem& problem, const BaConfig& cfg,
                      BaState* final_state = nullptr);

struct SlopeSearchConfig {
  double tol = 1e-4;      // |relevance - target| acceptance
  int max_trials = 80;    // BA solves allowed
  double beta_max = 1e5;
  BaConfig ba;
};

struct SlopeSearchResult {
  bool found = false;     // false: SearchFailed (e.g. constant-slope segment)
  double beta = 0.0;
  SolverReport report;
  int trials = 0;
};

/// Bisection on beta over an expanding bracket until the converged relevance
/// pins target_I. Requires 0 < target_I < I(X;Y).
SlopeSearchResult slope_search(const IbProblem& problem, double target_I,
                               const SlopeSearchConfig& cfg);

}  // namespace ibot::ba
