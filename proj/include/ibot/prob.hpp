#pragma once

#include <Eigen/Dense>

namespace ibot {

// Tolerance accepted on simplex sums at construction. Inputs within it are
// renormalized exactly; anything further off is rejected.
inline constexpr double kSimplexTol = 1e-12;

/// Discrete probability distribution on a finite support.
/// Entries are nonnegative and sum to one after construction.
class Distribution {
public:
  explicit Distribution(Eigen::VectorXd mass);

  const Eigen::VectorXd& mass() const { return mass_; }
  Eigen::Index size() const { return mass_.size(); }
  double operator[](Eigen::Index i) const { return mass_[i]; }

private:
  Eigen::VectorXd mass_;
};

/// Column-stochastic kernel: entry (k, i) = P(y_k | x_i).
class ConditionalKernel {
public:
  explicit ConditionalKernel(Eigen::MatrixXd matrix);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::Index num_outputs() const { return matrix_.rows(); }  // K
  Eigen::Index num_inputs() const { return matrix_.cols(); }   // M

private:
  Eigen::MatrixXd matrix_;
};

/// Validated M x K joint P(X, Y) with cached marginals and the conditional
/// P(Y | X). Immutable after construction.
class JointDistribution {
public:
  explicit JointDistribution(Eigen::MatrixXd pxy);

  static JointDistribution from_marginal_and_kernel(const Distribution& px,
                                                    const ConditionalKernel& s);

  const Eigen::MatrixXd& pxy() const { return pxy_; }
  const Distribution& px() const { return px_; }
  const Distribution& qy() const { return qy_; }
  const ConditionalKernel& s() const { return s_; }

  Eigen::Index num_x() const { return pxy_.rows(); }  // M
  Eigen::Index num_y() const { return pxy_.cols(); }  // K

private:
  JointDistribution(Eigen::MatrixXd pxy, Distribution px, Distribution qy,
                    ConditionalKernel s);
  static JointDistribution build(Eigen::MatrixXd pxy);

  Eigen::MatrixXd pxy_;
  Distribution px_;
  Distribution qy_;
  ConditionalKernel s_;
};

/// Shannon entropy in nats, with the 0 log 0 = 0 convention.
double entropy(const Distribution& d);

/// Binary entropy -u log u - (1-u) log(1-u) in nats. Throws std::domain_error
/// for u outside [0, 1].
double binary_entropy(double u);

/// Mutual information I(X;Y) of a joint in nats; zero-mass cells are skipped.
double mutual_information(const JointDistribution& j);

/// KL divergence sum a_k log(a_k / b_k) in nats. Returns +infinity when b has
/// a zero where a has mass. Throws std::invalid_argument on length mismatch.
double kl_divergence(const Distribution& a, const Distribution& b);

}  // namespace ibot
