#pragma once

#include <cstdint>
#include <vector>

#include "ibot/solver.hpp"

namespace ibot::gas {

struct GasConfig {
  Eigen::Index bottleneck_size = 0;  // 0: use the problem's N
  int max_iter = 1000;
  double rate_tol = 1e-10;        // successive-objective stop
  double constraint_tol = 1e-8;   // |I(T;Y) - I| target when zeta > 0
  double newton_tol = 1e-11;      // residual on |G(zeta)|
  int newton_max_steps = 200;
  double zeta_cap = 1e6;          // upper bracket bound
  double log_floor = -700.0;      // minimum log z entering the kernel
  double zeta_floor = 1e-8;       // zeta used inside the r update when zeta = 0
  double jitter_scale = 1e-2;     // relative perturbation of the initial w
  std::uint64_t rng_seed = 1;
  bool stabilized = true;
  // Aitken extrapolation of the multiplier: every accel_period iterations the
  // zeta sequence is tested for geometric decay and, when it qualifies, zeta
  // (and lambda = -zeta) jumps to the extrapolated limit under an adaptive
  // trust region with rollback. 0 disables the acceleration.
  int accel_period = 50;
};

/// Primal/dual iterates of the alternating Sinkhorn loop. The lambda dual
/// matrix is constant-valued (every entry equals the scalar stored here), and
/// the scalings phi, psi are kept in log form so the stabilized path never
/// materializes out-of-range values.
struct GasState {
  Eigen::MatrixXd w;        // M x N, column (j) = P(X | t_j)
  Eigen::VectorXd r;        // N, P(T)
  Eigen::MatrixXd z;        // K x N, P(Y, T)
  Eigen::VectorXd log_phi;  // M
  Eigen::VectorXd log_psi;  // N
  double lambda = -1.0;     // common entry of the K x N dual matrix
  double zeta = 1.0;
  double eta = 1.0;

  Eigen::VectorXd phi() const { return log_phi.array().exp(); }
  Eigen::VectorXd psi() const { return log_psi.array().exp(); }
  Eigen::VectorXd alpha() const { return (-log_phi.array() - 0.5).matrix(); }
  Eigen::VectorXd beta() const { return (-log_psi.array() - 0.5).matrix(); }
};

/// Scaling kernel for one iteration: a_ij = sum_k s_ki log z_kj (floored),
/// b = common value of sum_k s_ki lambda_kj, per-column offsets zmax (zero
/// when unstabilized), and lam_ij = exp(-b + zeta*(a_ij - zmax_j)).
struct Kernel {
  Eigen::MatrixXd a;
  double b = 0.0;
  Eigen::VectorXd zmax;
  Eigen::MatrixXd lam;
  double zeta = 0.0;
  bool stabilized = false;
};

struct IterationDiag {
  double objective = 0.0;
  double relevance = 0.0;
  double marginal_residual = 0.0;
  double zeta = 0.0;
};

GasState init_state(const IbProblem& problem, const GasConfig& cfg);

Kernel compute_kernel(const GasState& state, const IbProblem& problem, const GasConfig& cfg);

/// Re-points an existing kernel at a new zeta; a, b and the column offsets do
/// not depend on zeta, so only the materialized lam (unstabilized mode) is
/// rebuilt.
void rescale_kernel(Kernel& kernel, double zeta);

/// One Sinkhorn pass: psi_j = 1 / sum_i Lam_ij phi_i, then
/// phi_i = p_i / sum_j Lam_ij psi_j r_j, in that order.
void sinkhorn_step(GasState& state, const Kernel& kernel, const IbProblem& problem);

/// Stationarity function of the information-constraint dual and its (strictly
/// positive) derivative, at candidate zeta with everything else fixed.
double g_value(double zeta, const GasState& state, const Kernel& kernel,
               const IbProblem& problem);
double g_derivative(double zeta, const GasState& state, const Kernel& kernel,
                    const IbProblem& problem);

/// Root of G on [0, inf): returns 0 when G(0) >= 0 (slack constraint),
/// otherwise the unique root by safeguarded Newton with a doubling bracket.
/// Throws InfeasibleError when G(zeta_cap) < 0.
double solve_zeta(const GasState& state, const Kernel& kernel, const IbProblem& problem,
                  const GasConfig& cfg);

void update_w(GasState& state, const Kernel& kernel);
void update_lambda(GasState& state);
void update_z(GasState& state, const IbProblem& problem);
void update_r(GasState& state, const IbProblem& problem, const GasConfig& cfg);

IterationDiag iterate(GasState& state, const IbProblem& problem, const GasConfig& cfg);

double objective_value(const GasState& state);
double relevance_value(const GasState& state, const IbProblem& problem);
double marginal_residual(const GasState& state, const IbProblem& problem);

SolverReport solve(const IbProblem& problem, const GasConfig& cfg,
                   GasState* final_state = nullptr,
                   std::vector<IterationDiag>* trace = nullptr);

}  // namespace ibot::gas
