#include "ibot/prob.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ibot {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Distribution::Distribution(Eigen::VectorXd mass) : mass_(std::move(mass)) {
  require(mass_.size() > 0, "Distribution: empty support");
  require((mass_.array() >= 0.0).all(), "Distribution: negative entry");
  const double total = mass_.sum();
  require(std::abs(total - 1.0) <= kSimplexTol, "Distribution: mass does not sum to 1");
  mass_ /= total;
}

ConditionalKernel::ConditionalKernel(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  require(matrix_.rows() > 0 && matrix_.cols() > 0, "ConditionalKernel: empty matrix");
  require((matrix_.array() >= 0.0).all(), "ConditionalKernel: negative entry");
  for (Eigen::Index i = 0; i < matrix_.cols(); ++i) {
    const double total = matrix_.col(i).sum();
    require(std::abs(total - 1.0) <= kSimplexTol, "ConditionalKernel: column does not sum to 1");
    matrix_.col(i) /= total;
  }
}

JointDistribution::JointDistribution(Eigen::MatrixXd pxy, Distribution px, Distribution qy,
                                     ConditionalKernel s)
    : pxy_(std::move(pxy)), px_(std::move(px)), qy_(std::move(qy)), s_(std::move(s)) {}

JointDistribution JointDistribution::build(Eigen::MatrixXd pxy) {
  require(pxy.rows() > 0 && pxy.cols() > 0, "JointDistribution: empty matrix");
  require((pxy.array() >= 0.0).all(), "JointDistribution: negative entry");
  const double total = pxy.sum();
  require(std::abs(total - 1.0) <= kSimplexTol, "JointDistribution: mass does not sum to 1");
  pxy /= total;

  Distribution px(pxy.rowwise().sum());
  Distribution qy(pxy.colwise().sum().transpose());
  // P(Y|X) columns; zero-mass x rows get a uniform column so the kernel stays
  // column-stochastic.
  Eigen::MatrixXd s(pxy.cols(), pxy.rows());
  for (Eigen::Index i = 0; i < pxy.rows(); ++i) {
    const double pi = px[i];
    if (pi > 0.0) {
      s.col(i) = pxy.row(i).transpose() / pi;
    } else {
      s.col(i).setConstant(1.0 / static_cast<double>(pxy.cols()));
    }
  }
  return JointDistribution(std::move(pxy), std::move(px), std::move(qy),
                           ConditionalKernel(std::move(s)));
}

JointDistribution::JointDistribution(Eigen::MatrixXd pxy)
    : JointDistribution(build(std::move(pxy))) {}

JointDistribution JointDistribution::from_marginal_and_kernel(const Distribution& px,
                                                              const ConditionalKernel& s) {
  require(px.size() == s.num_inputs(), "from_marginal_and_kernel: size mismatch");
  Eigen::MatrixXd pxy = s.matrix().transpose();  // M x K
  pxy.array().colwise() *= px.mass().array();
  return JointDistribution(std::move(pxy));
}

double entropy(const Distribution& d) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double p = d[i];
    if (p > 0.0) h -= p * std::log(p);
  }
  return h < 0.0 ? 0.0 : h;
}

double binary_entropy(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("binary_entropy: u outside [0,1]");
  double h = 0.0;
  if (u > 0.0) h -= u * std::log(u);
  if (u < 1.0) h -= (1.0 - u) * std::log(1.0 - u);
  return h < 0.0 ? 0.0 : h;
}

double mutual_information(const JointDistribution& j) {
  const auto& pxy = j.pxy();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < pxy.rows(); ++i) {
    for (Eigen::Index k = 0; k < pxy.cols(); ++k) {
      const double p = pxy(i, k);
      if (p > 0.0) mi += p * std::log(p / (j.px()[i] * j.qy()[k]));
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

double kl_divergence(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) throw std::invalid_argument("kl_divergence: length mismatch");
  double d = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double ak = a[k];
    if (ak == 0.0) continue;
    if (b[k] == 0.0) return std::numeric_limits<double>::infinity();
    d += ak * std::log(ak / b[k]);
  }
  return d < 0.0 ? 0.0 : d;
}

}  // namespace ibot
