#include "ibot/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ibot {

IbProblem::IbProblem(JointDistribution joint, double threshold, Eigen::Index bottleneck_size)
    : joint_(std::move(joint)), threshold_(threshold) {
  if (!(threshold_ >= 0.0)) throw std::domain_error("IbProblem: threshold must be >= 0");
  bottleneck_size_ = bottleneck_size > 0 ? bottleneck_size : joint_.num_x();
  double qlogq = 0.0;
  for (Eigen::Index k = 0; k < joint_.num_y(); ++k) {
    const double q = joint_.qy()[k];
    if (q > 0.0) qlogq += q * std::log(q);
  }
  i_hat_ = threshold_ + qlogq;
}

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "Converged";
    case SolverStatus::MaxIterations: return "MaxIterations";
    case SolverStatus::Infeasible: return "Infeasible";
    case SolverStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

}  // namespace ibot

namespace ibot::gas {

namespace {

constexpr double kDeadCluster = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Derived>
double lse(const Eigen::ArrayBase<Derived>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x - m).exp().sum());
}

// Uniform(-1, 1) stream with platform-independent output.
class JitterRng {
public:
  explicit JitterRng(std::uint64_t seed) : engine_(seed) {}
  double next() {
    const double u01 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return 2.0 * u01 - 1.0;
  }

private:
  std::mt19937_64 engine_;
};

Eigen::VectorXd safe_log(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? std::log(v[i]) : -kInf;
  return out;
}

// sum_i psi_j r_j phi_i exp(-b + zeta a_ij) |a_ij| and the same with a_ij^2,
// sharing a single exponential pass (Newton needs both per step). Stabilized
// mode shifts each column by its own max exponent before exponentiating.
struct GSums {
  double mag = 0.0;  // weight by |a_ij|: enters G
  double sq = 0.0;   // weight by a_ij^2: enters G'
};

GSums g_sums(double zeta, const GasState& st, const Kernel& k) {
  const Eigen::ArrayXXd expo =
      (zeta * k.a.array()).colwise() + (st.log_phi.array() - k.b);
  GSums out;
  for (Eigen::Index j = 0; j < k.a.cols(); ++j) {
    const double rj = st.r[j];
    if (!(rj > 0.0)) continue;
    const double shift = k.stabilized ? expo.col(j).maxCoeff() : 0.0;
    if (!std::isfinite(shift)) continue;  // empty column (all phi zero)
    const Eigen::ArrayXd e = (expo.col(j) - shift).exp();
    const double scale = std::exp(st.log_psi[j] + std::log(rj) + shift);
    out.mag += scale * (e * (-k.a.col(j).array())).sum();
    out.sq += scale * (e * k.a.col(j).array().square()).sum();
  }
  return out;
}

}  // namespace

GasState init_state(const IbProblem& problem, const GasConfig& cfg) {
  const Eigen::Index m = problem.joint().num_x();
  const Eigen::Index k = problem.joint().num_y();
  const Eigen::Index n = cfg.bottleneck_size > 0 ? cfg.bottleneck_size : problem.bottleneck_size();
  if (!(cfg.jitter_scale >= 0.0 && cfg.jitter_scale < 1.0))
    throw std::domain_error("GasConfig: jitter_scale outside [0, 1)");

  GasState st;
  st.log_phi = Eigen::VectorXd::Zero(m);
  st.log_psi = Eigen::VectorXd::Zero(n);
  st.lambda = -1.0;
  st.zeta = 1.0;
  st.eta = 1.0;
  st.r = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  st.w = Eigen::MatrixXd::Constant(m, n, 1.0 / static_cast<double>(m));
  if (cfg.jitter_scale > 0.0) {
    JitterRng rng(cfg.rng_seed);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < m; ++i) st.w(i, j) *= 1.0 + cfg.jitter_scale * rng.next();
    for (Eigen::Index j = 0; j < n; ++j) st.w.col(j) /= st.w.col(j).sum();
    // The loop only reads w through z, so the symmetry-breaking perturbation
    // must be reflected there; z then satisfies its defining constraint too.
    st.z = problem.joint().s().matrix() * st.w * st.r.asDiagonal();
  } else {
    st.z = Eigen::MatrixXd::Constant(k, n, 1.0 / static_cast<double>(k * n));
  }
  return st;
}

void rescale_kernel(Kernel& kernel, double zeta) {
  kernel.zeta = zeta;
  if (kernel.stabilized) return;  // log-domain path never materializes lam
  const double max_exp = -kernel.b + zeta * kernel.a.maxCoeff();
  if (max_exp > 709.0) throw NumericalError("kernel exponent overflow (run stabilized)");
  kernel.lam =
      (zeta * (kernel.a.rowwise() - kernel.zmax.transpose()).array() - kernel.b).exp().matrix();
}

Kernel compute_kernel(const GasState& state, const IbProblem& problem, const GasConfig& cfg) {
  Kernel k;
  k.b = state.lambda;  // columns of s sum to 1
  k.stabilized = cfg.stabilized;

  const double floor = std::exp(cfg.log_floor);
  const Eigen::MatrixXd logz = state.z.cwiseMax(floor).array().log().matrix();
  k.a = problem.joint().s().matrix().transpose() * logz;  // M x N

  k.zmax = cfg.stabilized ? Eigen::VectorXd(k.a.colwise().maxCoeff())
                          : Eigen::VectorXd::Zero(k.a.cols());
  rescale_kernel(k, state.zeta);
  return k;
}

void sinkhorn_step(GasState& state, const Kernel& kernel, const IbProblem& problem) {
  const Eigen::VectorXd& p = problem.joint().px().mass();
  const Eigen::Index m = kernel.a.rows(), n = kernel.a.cols();

  if (kernel.stabilized) {
    const Eigen::ArrayXXd za = kernel.zeta * kernel.a.array();
    const Eigen::ArrayXXd cols = za.colwise() + (state.log_phi.array() - kernel.b);
    for (Eigen::Index j = 0; j < n; ++j) state.log_psi[j] = -lse(cols.col(j));
    const Eigen::ArrayXd lr = safe_log(state.r).array();
    const Eigen::ArrayXXd rows =
        za.rowwise() + (state.log_psi.array() + lr - kernel.b).transpose();
    for (Eigen::Index i = 0; i < m; ++i)
      state.log_phi[i] = p[i] > 0.0 ? std::log(p[i]) - lse(rows.row(i)) : -kInf;
  } else {
    const Eigen::VectorXd phi = state.phi();
    const Eigen::VectorXd colsum = kernel.lam.transpose() * phi;
    if (!(colsum.array() > 0.0).all() || !colsum.allFinite())
      throw NumericalError("sinkhorn psi update not finite");
    const Eigen::VectorXd psi = colsum.cwiseInverse();
    const Eigen::VectorXd rowsum = kernel.lam * psi.cwiseProduct(state.r);
    Eigen::VectorXd new_phi(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (p[i] > 0.0 && !(rowsum[i] > 0.0 && std::isfinite(rowsum[i])))
        throw NumericalError("sinkhorn phi update not finite");
      new_phi[i] = p[i] > 0.0 ? p[i] / rowsum[i] : 0.0;
    }
    state.log_psi = safe_log(psi);
    state.log_phi = safe_log(new_phi);
  }
}

namespace {

double g_constant(const GasState& state, const IbProblem& problem) {
  double rlogr = 0.0;
  for (Eigen::Index j = 0; j < state.r.size(); ++j)
    if (state.r[j] > 0.0) rlogr += state.r[j] * std::log(state.r[j]);
  return -(rlogr + problem.i_hat());
}

double checked_g(double c, const GSums& sums, bool stabilized) {
  const double g = c - sums.mag;
  if (std::isnan(g)) throw NumericalError("G(zeta) is NaN");
  if (!stabilized && !std::isfinite(g)) throw NumericalError("G(zeta) overflow");
  return g;
}

}  // namespace

double g_value(double zeta, const GasState& state, const Kernel& kernel,
               const IbProblem& problem) {
  return checked_g(g_constant(state, problem), g_sums(zeta, state, kernel), kernel.stabilized);
}

double g_derivative(double zeta, const GasState& state, const Kernel& kernel,
                    const IbProblem& problem) {
  (void)problem;
  const double gp = g_sums(zeta, state, kernel).sq;
  if (std::isnan(gp)) throw NumericalError("G'(zeta) is NaN");
  return gp;
}

double solve_zeta(const GasState& state, const Kernel& kernel, const IbProblem& problem,
                  const GasConfig& cfg) {
  const double c = g_constant(state, problem);
  const auto g = [&](double x) {
    return checked_g(c, g_sums(x, state, kernel), kernel.stabilized);
  };

  if (g(0.0) >= 0.0) return 0.0;  // constraint slack

  double lo = 0.0;
  double hi = std::max(1.0, state.zeta);
  while (!(g(hi) >= 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cfg.zeta_cap) throw InfeasibleError("relevance threshold unreachable");
  }

  double x = std::clamp(state.zeta, lo, hi);  // warm start
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int step = 0; step < cfg.newton_max_steps; ++step) {
    const GSums sums = g_sums(x, state, kernel);
    const double gx = checked_g(c, sums, kernel.stabilized);
    if (std::isfinite(gx) && std::abs(gx) <= cfg.newton_tol) return x;
    (gx < 0.0 ? lo : hi) = x;

    double cand = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(gx) && std::isfinite(sums.sq) && sums.sq > 0.0) cand = x - gx / sums.sq;
    if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    if (cand == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi))
      return cand;
    x = cand;
  }
  return 0.5 * (lo + hi);
}

void update_w(GasState& state, const Kernel& kernel) {
  const Eigen::ArrayXXd logw = ((kernel.zeta * kernel.a.array()).colwise() +
                                (state.log_phi.array() - kernel.b))
                                   .rowwise() +
                               state.log_psi.transpose().array();
  for (Eigen::Index j = 0; j < kernel.a.cols(); ++j) {
    if (state.r[j] < kDeadCluster) continue;  // dead cluster kept as-is
    state.w.col(j) = logw.col(j).exp().matrix();
  }
  if (!state.w.allFinite()) throw NumericalError("w update not finite");
}

void update_lambda(GasState& state) { state.lambda = -state.zeta; }

void update_z(GasState& state, const IbProblem& problem) {
  state.z = problem.joint().s().matrix() * state.w * state.r.asDiagonal();
}

void update_r(GasState& state, const IbProblem& problem, const GasConfig& cfg) {
  const Eigen::Index n = state.w.cols();
  const double floor = std::exp(cfg.log_floor);
  const Eigen::MatrixXd logz = state.z.cwiseMax(floor).array().log().matrix();
  const Eigen::MatrixXd sz = problem.joint().s().matrix().transpose() * logz;  // M x N

  const Eigen::VectorXd alpha = state.alpha();
  const Eigen::VectorXd beta = state.beta();
  const double zeta_eff = std::max(state.zeta, cfg.zeta_floor);

  const Eigen::ArrayXXd warr = state.w.array();
  const Eigen::ArrayXd wlogw =
      (warr > 0.0).select(warr * warr.log(), 0.0).colwise().sum().transpose();
  const Eigen::ArrayXd wsz = (warr * sz.array()).colwise().sum().transpose();
  const Eigen::ArrayXd walpha = (state.w.transpose() * alpha).array();
  const Eigen::ArrayXd colsum = warr.colwise().sum().transpose();

  Eigen::ArrayXd log_rt(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double a_j = wlogw[j] - state.zeta * wsz[j] + walpha[j] + beta[j] * colsum[j] +
                       state.lambda * colsum[j] - beta[j];
    if (!std::isfinite(a_j)) throw NumericalError("r update not finite");
    log_rt[j] = -a_j / zeta_eff - 1.0;
  }

  const double norm = lse(log_rt);
  state.eta = state.zeta * norm;
  state.r = (log_rt - norm).exp().matrix();
  state.r /= state.r.sum();

  // Keep z consistent with its defining sum under the new r.
  update_z(state, problem);
}

double objective_value(const GasState& state) {
  double obj = 0.0;
  for (Eigen::Index j = 0; j < state.w.cols(); ++j) {
    const double rj = state.r[j];
    if (!(rj > 0.0)) continue;
    for (Eigen::Index i = 0; i < state.w.rows(); ++i) {
      const double w = state.w(i, j);
      if (w > 0.0) obj += w * rj * std::log(w);
    }
  }
  return obj;
}

double relevance_value(const GasState& state, const IbProblem& problem) {
  const auto& q = problem.joint().qy();
  double rel = 0.0;
  for (Eigen::Index j = 0; j < state.z.cols(); ++j) {
    const double rj = state.r[j];
    if (!(rj > 0.0)) continue;
    for (Eigen::Index k = 0; k < state.z.rows(); ++k) {
      const double z = state.z(k, j);
      if (z > 0.0 && q[k] > 0.0) rel += z * std::log(z / (rj * q[k]));
    }
  }
  return rel;
}

double marginal_residual(const GasState& state, const IbProblem& problem) {
  const Eigen::VectorXd model_px = state.w * state.r;
  return (model_px - problem.joint().px().mass()).cwiseAbs().maxCoeff();
}

IterationDiag iterate(GasState& state, const IbProblem& problem, const GasConfig& cfg) {
  Kernel kernel = compute_kernel(state, problem, cfg);
  sinkhorn_step(state, kernel, problem);
  state.zeta = solve_zeta(state, kernel, problem, cfg);
  rescale_kernel(kernel, state.zeta);  // z and lambda unchanged: a, b, zmax still valid
  // Refresh the scalings against the new-zeta kernel before assembling w.
  // Idempotent at any fixed point, and it keeps the transport marginals
  // consistent with the kernel w is actually built from, which damps the
  // zeta/scaling feedback loop at small thresholds.
  sinkhorn_step(state, kernel, problem);
  update_w(state, kernel);
  update_lambda(state);
  update_z(state, problem);
  update_r(state, problem, cfg);

  IterationDiag diag;
  diag.objective = objective_value(state);
  diag.relevance = relevance_value(state, problem);
  diag.marginal_residual = marginal_residual(state, problem);
  diag.zeta = state.zeta;
  return diag;
}

namespace {

// Geometric extrapolation of the slow multiplier mode. The zeta iterates creep
// toward their limit roughly geometrically on hard (high-slope) instances;
// sampling zeta every `period` iterations and applying Aitken's delta-squared
// under a trust region shortcuts that creep. A jump that destabilizes the loop
// (iterate throws, or zeta falls back below the jump origin) is rolled back
// and the trust region shrinks; a jump that sticks grows it.
class ZetaAccelerator {
public:
  explicit ZetaAccelerator(int period) : period_(period) {}

  // Called after each successful iterate; may jump state.zeta / state.lambda.
  // `constraint` is the current |I(T;Y) - I| residual, used to grade jumps.
  void observe(int it, GasState& state, double constraint) {
    if (period_ <= 0 || it % period_ != 0) return;
    if (pending_) grade(state, constraint);
    if (count_ < 3) {
      hist_[count_++] = state.zeta;
    } else {
      hist_[0] = hist_[1];
      hist_[1] = hist_[2];
      hist_[2] = state.zeta;
    }
    if (count_ < 3) return;
    const double d1 = hist_[1] - hist_[0];
    const double d2 = hist_[2] - hist_[1];
    if (!(d1 > 0.0 && d2 > 0.0)) return;
    const double ratio = d2 / d1;
    if (!(ratio > 0.0 && ratio < 0.9999)) return;
    double target = hist_[2] + d2 * ratio / (1.0 - ratio);
    target = std::min(target, hist_[2] + trust_ * d2);
    if (!(target > hist_[2] * (1.0 + 1e-12))) return;
    saved_ = state;
    constraint_at_jump_ = constraint;
    state.zeta = target;
    state.lambda = -target;
    pending_ = true;
    count_ = 0;
  }

  // Called when iterate throws; true when the failure is absorbed by undoing
  // the most recent jump.
  bool rollback(GasState& state) {
    if (!pending_) return false;
    state = saved_;
    trust_ = std::max(1.0, trust_ / 2.0);
    pending_ = false;
    count_ = 0;
    return true;
  }

private:
  void grade(GasState& state, double constraint) {
    if (constraint > constraint_at_jump_) {
      state = saved_;  // overshot; resume from the pre-jump state
      trust_ = std::max(1.0, trust_ / 2.0);
    } else {
      trust_ = std::min(256.0, trust_ * 2.0);
    }
    pending_ = false;
  }

  int period_;
  double hist_[3] = {0.0, 0.0, 0.0};
  int count_ = 0;
  double trust_ = 8.0;
  bool pending_ = false;
  double constraint_at_jump_ = 0.0;
  GasState saved_;
};

}  // namespace

SolverReport solve(const IbProblem& problem, const GasConfig& cfg, GasState* final_state,
                   std::vector<IterationDiag>* trace) {
  SolverReport report;
  const double ixy = mutual_information(problem.joint());
  if (problem.threshold() >= ixy - 1e-9) {
    report.status = SolverStatus::Infeasible;
    return report;
  }

  GasState state = init_state(problem, cfg);
  double prev_obj = objective_value(state);
  report.status = SolverStatus::MaxIterations;
  ZetaAccelerator accel(cfg.accel_period);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    IterationDiag diag;
    try {
      diag = iterate(state, problem, cfg);
    } catch (const InfeasibleError&) {
      if (accel.rollback(state)) continue;
      report.status = SolverStatus::Infeasible;
      break;
    } catch (const NumericalError&) {
      if (accel.rollback(state)) continue;
      report.status = SolverStatus::NumericalFailure;
      break;
    }
    if (trace) trace->push_back(diag);
    report.iterations = it;
    report.residuals.rate_change = std::abs(diag.objective - prev_obj);
    report.residuals.constraint =
        state.zeta > 0.0 ? std::abs(diag.relevance - problem.threshold()) : 0.0;
    prev_obj = diag.objective;
    if (report.residuals.rate_change <= cfg.rate_tol &&
        (state.zeta == 0.0 || report.residuals.constraint <= cfg.constraint_tol)) {
      report.status = SolverStatus::Converged;
      break;
    }
    accel.observe(it, state, std::abs(diag.relevance - problem.threshold()));
  }

  // Transport polish: with zeta, lambda, r and the kernel frozen, alternate
  // the scalings until both transport marginals are satisfied to machine
  // precision. At a fixed point of the loop this is a no-op; after a
  // max-iterations stop it removes the one-iteration lag the r update leaves
  // in w's marginals.
  if (report.status == SolverStatus::Converged ||
      report.status == SolverStatus::MaxIterations) {
    try {
      const Kernel kernel = compute_kernel(state, problem, cfg);
      for (int pass = 0; pass < 200; ++pass) {
        sinkhorn_step(state, kernel, problem);
        update_w(state, kernel);
        double col = 0.0;
        for (Eigen::Index j = 0; j < state.w.cols(); ++j)
          if (state.r[j] >= kDeadCluster)
            col = std::max(col, std::abs(state.w.col(j).sum() - 1.0));
        if (col <= 1e-13 && marginal_residual(state, problem) <= 1e-13) break;
      }
      // Dead clusters carry no mass but their columns still represent
      // P(X | t_j); keep them on the simplex.
      for (Eigen::Index j = 0; j < state.w.cols(); ++j) {
        const double sum = state.w.col(j).sum();
        if (state.r[j] < kDeadCluster && sum > 0.0) state.w.col(j) /= sum;
      }
      update_z(state, problem);
    } catch (const NumericalError&) {
      // keep the unpolished iterate; the report below reflects it
    }
    if (report.status == SolverStatus::Converged && state.zeta > 0.0)
      report.residuals.constraint = std::abs(relevance_value(state, problem) - problem.threshold());
  }

  report.objective = objective_value(state);
  report.rate = report.objective + entropy(problem.joint().px());
  report.relevance = relevance_value(state, problem);
  report.zeta = state.zeta;
  report.residuals.marginal = marginal_residual(state, problem);
  if (final_state) *final_state = std::move(state);
  return report;
}

}  // namespace ibot::gas
