#include "ibot/ba.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ibot/prob.hpp"

namespace ibot::ba {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rate_of(const BaState& st, const IbProblem& pb) {
  const auto& p = pb.joint().px().mass();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < st.u.rows(); ++i)
    for (Eigen::Index j = 0; j < st.u.cols(); ++j) {
      const double u = st.u(i, j);
      if (u > 0.0 && st.r[j] > 0.0) mi += p[i] * u * std::log(u / st.r[j]);
    }
  return mi < 0.0 ? 0.0 : mi;
}

double relevance_of(const BaState& st, const IbProblem& pb) {
  const auto& q = pb.joint().qy();
  double mi = 0.0;
  for (Eigen::Index j = 0; j < st.py_t.cols(); ++j) {
    if (!(st.r[j] > 0.0)) continue;
    for (Eigen::Index k = 0; k < st.py_t.rows(); ++k) {
      const double v = st.py_t(k, j);
      if (v > 0.0 && q[k] > 0.0) mi += st.r[j] * v * std::log(v / q[k]);
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

}  // namespace

BaState init_state(const IbProblem& problem, const BaConfig& cfg) {
  const Eigen::Index m = problem.joint().num_x();
  const Eigen::Index n = cfg.bottleneck_size > 0 ? cfg.bottleneck_size : problem.bottleneck_size();

  BaState st;
  st.beta = cfg.beta;
  st.u = Eigen::MatrixXd::Constant(m, n, 1.0 / static_cast<double>(n));
  if (cfg.jitter_scale > 0.0) {
    std::mt19937_64 engine(cfg.rng_seed);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i) {
        const double u01 = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        st.u(i, j) *= 1.0 + cfg.jitter_scale * (2.0 * u01 - 1.0);
      }
    for (Eigen::Index i = 0; i < m; ++i) st.u.row(i) /= st.u.row(i).sum();
  }
  st.r = st.u.transpose() * problem.joint().px().mass();
  st.py_t = Eigen::MatrixXd::Constant(problem.joint().num_y(), n, 0.0);
  for (Eigen::Index j = 0; j < n; ++j)
    st.py_t.col(j) = problem.joint().qy().mass();
  return st;
}

void ba_step(BaState& state, const IbProblem& problem) {
  const auto& p = problem.joint().px().mass();
  const auto& s = problem.joint().s().matrix();  // K x M
  const Eigen::Index m = state.u.rows(), n = state.u.cols(), k = s.rows();

  state.r = state.u.transpose() * p;
  const Eigen::MatrixXd pyt_joint = s * p.asDiagonal() * state.u;  // K x N
  for (Eigen::Index j = 0; j < n; ++j)
    if (state.r[j] > 0.0) state.py_t.col(j) = pyt_joint.col(j) / state.r[j];
  // columns with r_j = 0 keep their previous decoder

  // KL(s_.i || py_t_.j); +infinity maps to zero encoder weight
  Eigen::MatrixXd div(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      double d = 0.0;
      for (Eigen::Index kk = 0; kk < k; ++kk) {
        const double ski = s(kk, i);
        if (ski == 0.0) continue;
        const double v = state.py_t(kk, j);
        if (v <= 0.0) {
          d = kInf;
          break;
        }
        d += ski * std::log(ski / v);
      }
      div(i, j) = d;
    }
  }

  // u_ij <- r_j exp(-beta div_ij), normalized per row in log domain
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::ArrayXd expo(n);
    for (Eigen::Index j = 0; j < n; ++j)
      expo[j] = state.r[j] > 0.0 ? std::log(state.r[j]) - state.beta * div(i, j) : -kInf;
    const double shift = expo.maxCoeff();
    if (!std::isfinite(shift)) {
      // every candidate cluster is infinitely bad; fall back to the prior
      state.u.row(i) = state.r.transpose();
      continue;
    }
    Eigen::ArrayXd weights = (expo - shift).exp();
    state.u.row(i) = (weights / weights.sum()).transpose();
  }
}

SolverReport ba_solve(const IbProblem& problem, const BaConfig& cfg, BaState* final_state) {
  BaState state = init_state(problem, cfg);
  SolverReport report;
  report.status = SolverStatus::MaxIterations;
  report.zeta = cfg.beta;

  double prev_rate = rate_of(state, problem);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    ba_step(state, problem);
    const double rate = rate_of(state, problem);
    report.iterations = it;
    report.residuals.rate_change = std::abs(rate - prev_rate);
    prev_rate = rate;
    if (report.residuals.rate_change <= cfg.tol) {
      report.status = SolverStatus::Converged;
      break;
    }
  }

  report.rate = rate_of(state, problem);
  report.relevance = relevance_of(state, problem);
  report.objective = report.rate - entropy(problem.joint().px());
  if (final_state) *final_state = std::move(state);
  return report;
}

SlopeSearchResult slope_search(const IbProblem& problem, double target_I,
                               const SlopeSearchConfig& cfg) {
  const double ixy = mutual_information(problem.joint());
  if (!(target_I > 0.0 && target_I < ixy))
    throw std::domain_error("slope_search: target outside (0, I(X;Y))");

  SlopeSearchResult result;
  BaConfig ba_cfg = cfg.ba;

  const auto run = [&](double beta) {
    ba_cfg.beta = beta;
    ++result.trials;
    return ba_solve(problem, ba_cfg);
  };

  double lo = 0.0;  // relevance 0 at beta = 0 by construction
  double hi = 1.0;
  SolverReport rep = run(hi);
  while (rep.relevance < target_I && result.trials < cfg.max_trials) {
    if (hi >= cfg.beta_max) return result;  // SearchFailed: bracket exhausted
    lo = hi;
    hi = std::min(hi * 2.0, cfg.beta_max);
    rep = run(hi);
  }

  double beta = hi;
  while (result.trials < cfg.max_trials) {
    // Only a converged solve pins a point on the curve; on constant-slope
    // segments BA stalls between the endpoints and must not count as a hit.
    if (rep.status == SolverStatus::Converged &&
        std::abs(rep.relevance - target_I) <= cfg.tol) {
      result.found = true;
      result.beta = beta;
      result.report = rep;
      return result;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) return result;  // relevance jump
    beta = 0.5 * (lo + hi);
    rep = run(beta);
    (rep.relevance < target_I ? lo : hi) = beta;
  }
  return result;  // SearchFailed: trial budget exhausted
}

}  // namespace ibot::ba
