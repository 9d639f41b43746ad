#include <doctest.h>

#include <cmath>
#include <set>
#include <utility>

#include "ibot/ba.hpp"
#include "ibot/oracles.hpp"
#include "ibot/problems.hpp"

using namespace ibot;

TEST_CASE("ba_solve at a Table I slope lands on the Bernoulli curve") {
  IbProblem pb(bernoulli_joint(0.15), 0.0);
  ba::BaConfig cfg;
  cfg.beta = 2.3299;
  const SolverReport rep = ba::ba_solve(pb, cfg);
  CHECK(rep.status == SolverStatus::Converged);
  CHECK(rep.rate == doctest::Approx(bernoulli_R(rep.relevance, 0.15)).epsilon(1e-5));
}

TEST_CASE("encoder rows stay normalized and the rate is non-increasing") {
  IbProblem pb(bernoulli_joint(0.15), 0.0);
  ba::BaConfig cfg;
  cfg.beta = 2.0;
  ba::BaState st = ba::init_state(pb, cfg);
  const auto rate_of = [&] {
    const auto& p = pb.joint().px().mass();
    double mi = 0.0;
    for (Eigen::Index i = 0; i < st.u.rows(); ++i)
      for (Eigen::Index j = 0; j < st.u.cols(); ++j)
        if (st.u(i, j) > 0.0 && st.r[j] > 0.0)
          mi += p[i] * st.u(i, j) * std::log(st.u(i, j) / st.r[j]);
    return mi;
  };
  ba::ba_step(st, pb);
  double prev = rate_of();
  for (int k = 0; k < 50; ++k) {
    ba::ba_step(st, pb);
    CHECK((st.u.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    const double rate = rate_of();
    CHECK(rate <= prev + 1e-9);
    prev = rate;
  }
}

TEST_CASE("beta sweep on the constant-slope joint collapses to two points") {
  IbProblem pb(constant_slope_joint(), 0.0);
  std::set<std::pair<long, long>> clusters;
  for (int k = 0; k < 50; ++k) {
    ba::BaConfig cfg;
    cfg.beta = 0.5 + k * (5.0 - 0.5) / 49.0;
    const SolverReport rep = ba::ba_solve(pb, cfg);
    clusters.insert({std::lround(rep.relevance * 1000.0), std::lround(rep.rate * 1000.0)});
  }
  CHECK(clusters.size() <= 2);
}

TEST_CASE("slope_search pins strictly concave targets") {
  IbProblem pb(bernoulli_joint(0.15), 0.0);
  const ba::SlopeSearchResult res = ba::slope_search(pb, 0.1308, ba::SlopeSearchConfig{});
  CHECK(res.found);
  CHECK(res.trials <= 80);
  CHECK(res.beta == doctest::Approx(2.3299).epsilon(1e-2));
  CHECK(res.report.relevance == doctest::Approx(0.1308).epsilon(1e-3));
}

TEST_CASE("slope_search fails on the constant-slope segment") {
  IbProblem pb(constant_slope_joint(), 0.0);
  const ba::SlopeSearchResult res = ba::slope_search(pb, 0.35, ba::SlopeSearchConfig{});
  CHECK_FALSE(res.found);
  CHECK(res.trials <= 80);
}

TEST_CASE("slope_search validates the target range") {
  JointDistribution j = bernoulli_joint(0.15);
  IbProblem pb(j, 0.0);
  CHECK_THROWS_AS(ba::slope_search(pb, 0.0, ba::SlopeSearchConfig{}), std::domain_error);
  CHECK_THROWS_AS(ba::slope_search(pb, mutual_information(j) + 0.1, ba::SlopeSearchConfig{}),
                  std::domain_error);
}
