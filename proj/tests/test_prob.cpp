#include <doctest.h>

#include <cmath>
#include <limits>

#include "ibot/prob.hpp"

using namespace ibot;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("Distribution renormalizes inputs within the simplex tolerance") {
  Distribution d(vec({0.5, 0.5 + 5e-13}));
  CHECK(d.mass().sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.size() == 2);
}

TEST_CASE("Distribution rejects off-simplex and negative inputs") {
  CHECK_THROWS_AS(Distribution(vec({0.5, 0.6})), std::invalid_argument);
  CHECK_THROWS_AS(Distribution(vec({1.2, -0.2})), std::invalid_argument);
  CHECK_THROWS_AS(Distribution(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("ConditionalKernel requires column-stochastic input") {
  Eigen::MatrixXd good(2, 2);
  good << 0.3, 1.0, 0.7, 0.0;
  ConditionalKernel k(good);
  CHECK(k.num_outputs() == 2);
  CHECK(k.matrix().colwise().sum().isApproxToConstant(1.0, 1e-15));

  Eigen::MatrixXd bad = good;
  bad(0, 0) = 0.4;
  CHECK_THROWS_AS(ConditionalKernel{bad}, std::invalid_argument);
}

TEST_CASE("JointDistribution marginals and conditional are consistent") {
  Eigen::MatrixXd pxy(2, 2);
  pxy << 0.4, 0.1, 0.2, 0.3;
  JointDistribution j(pxy);
  CHECK(j.px()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(j.qy()[0] == doctest::Approx(0.6).epsilon(1e-15));
  // pxy(i, k) = s(k, i) * px(i)
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index k = 0; k < 2; ++k)
      CHECK(j.s().matrix()(k, i) * j.px()[i] == doctest::Approx(pxy(i, k)).epsilon(1e-14));
}

TEST_CASE("entropy of the uniform distribution is log n") {
  Distribution u(vec({0.25, 0.25, 0.25, 0.25}));
  CHECK(entropy(u) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  Distribution point(vec({1.0, 0.0}));
  CHECK(entropy(point) == 0.0);
}

TEST_CASE("binary_entropy endpoints and symmetry") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(binary_entropy(0.2) == doctest::Approx(binary_entropy(0.8)).epsilon(1e-14));
  CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("mutual information of product and identity joints") {
  Eigen::MatrixXd prod(2, 2);
  prod << 0.18, 0.42, 0.12, 0.28;  // px = (0.6, 0.4) times qy = (0.3, 0.7)
  CHECK(mutual_information(JointDistribution(prod)) == doctest::Approx(0.0).epsilon(1e-14));

  Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(3, 3) / 3.0;
  CHECK(mutual_information(JointDistribution(ident)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("kl_divergence basics") {
  Distribution a(vec({0.3, 0.7}));
  Distribution b(vec({0.5, 0.5}));
  CHECK(kl_divergence(a, a) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(kl_divergence(a, b) > 0.0);

  Distribution c(vec({1.0, 0.0}));
  CHECK(kl_divergence(a, c) == std::numeric_limits<double>::infinity());
  CHECK(kl_divergence(c, a) == doctest::Approx(std::log(1.0 / 0.3)).epsilon(1e-14));

  Distribution wrong(vec({1.0}));
  CHECK_THROWS_AS(kl_divergence(a, wrong), std::invalid_argument);
}
