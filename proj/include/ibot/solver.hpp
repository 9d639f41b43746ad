#pragma once

#include <stdexcept>
#include <string>

#include "ibot/prob.hpp"

namespace ibot {

/// An IB instance: a joint, a relevance threshold I (nats), and the
/// bottleneck cardinality N. i_hat() is the shifted threshold
/// I + sum_k q_k log q_k used by the constraint.
class IbProblem {
public:
  /// bottleneck_size 0 selects the default N = M.
  IbProblem(JointDistribution joint, double threshold, Eigen::Index bottleneck_size = 0);

  const JointDistribution& joint() const { return joint_; }
  double threshold() const { return threshold_; }
  double i_hat() const { return i_hat_; }
  Eigen::Index bottleneck_size() const { return bottleneck_size_; }

private:
  JointDistribution joint_;
  double threshold_;
  double i_hat_;
  Eigen::Index bottleneck_size_;
};

enum class SolverStatus { Converged, MaxIterations, Infeasible, NumericalFailure };

const char* to_string(SolverStatus s);

struct Residuals {
  double marginal = 0.0;     // max_i |sum_j w_ij r_j - p_i|
  double constraint = 0.0;   // |I(T;Y) - I| when the constraint is active
  double rate_change = 0.0;  // last successive-objective change
};

struct SolverReport {
  double rate = 0.0;       // I(X;T), nats
  double relevance = 0.0;  // I(T;Y), nats
  double objective = 0.0;  // sum w r log w, nats
  double zeta = 0.0;       // final dual (slope); BA reports beta here
  int iterations = 0;
  SolverStatus status = SolverStatus::NumericalFailure;
  Residuals residuals;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ibot
