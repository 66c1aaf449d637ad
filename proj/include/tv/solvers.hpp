#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "tv/linsolve.hpp"
#include "tv/prox.hpp"

namespace tv {

struct SolverConfig {
  double tol = 1e-3;     // zeta of the relative-change stopping rule; 0 disables
  long max_iter = 1000;
  bool monotone = false;  // report the best-Psi iterate seen
  bool record_trace = true;
  std::uint64_t seed = 0;
  double admm_rho = 0.0;  // 0 means: use beta
  SolveRoute route = SolveRoute::Auto;
  bool sam_explicit_step1 = false;  // solve step 1 at every k instead of extrapolating
  const Vec* snr_reference = nullptr;

  void validate() const {
    if (tol < 0 || tol >= 1) throw std::invalid_argument("SolverConfig: tol must be in [0, 1)");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (admm_rho < 0) throw std::invalid_argument("SolverConfig: rho must be >= 0");
  }
};

struct TraceRecord {
  int k = 0;
  double psi = 0.0;
  double phi = 0.0;
  double snr_db = 0.0;      // NaN when no reference
  double rel_change = 0.0;  // ||x_k - x_{k-1}|| / max{1, ||x_{k-1}||}
  double time_s = 0.0;      // cumulative wall seconds
  // not serialized; kept so multi-channel traces can be combined
  double err_sq = 0.0;
  double dx_sq = 0.0;
  double xprev_sq = 0.0;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  // header: iter,psi,phi,snr_db,rel_change,time_s ; snr_db empty without reference
  void write_csv(std::ostream& os) const;
};

// t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2, tau_k = (t_k - 1) / t_{k+1}
struct MomentumState {
  double t = 1.0;
  double t_prev = 1.0;
  int k = 1;

  static double next_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }
  double tau() const { return (t - 1.0) / next_t(t); }
};

MomentumState momentum_next(const MomentumState& s);

struct SolverResult {
  Vec x;
  GradField z;
  SolverTrace trace;
  long iterations = 0;
  bool converged = false;
  long normal_solves = 0;
  std::shared_ptr<const NormalSystem> system;
};

struct AmIterate {
  int k;
  const Vec& x;
  const GradField& z;
};

struct SamIterate {
  int k;
  const Vec& xbar;
  const GradField& z;
  const Vec& x;
  const GradField& zhat_used;  // the zhat consumed by step 1 of this iteration
  const GradField& zhat_next;
  double tau;
  long normal_solves;  // cumulative count after this iteration
};

struct AdmmIterate {
  int k;
  const Vec& x;
  const GradField& z;
  const GradField& multiplier;
};

using AmObserver = std::function<void(const AmIterate&)>;
using SamObserver = std::function<void(const SamIterate&)>;
using AdmmObserver = std::function<void(const AdmmIterate&)>;

// ||x_new - x_old|| / max{1, ||x_old||} < zeta (strict)
bool stop_check(const Vec& x_new, const Vec& x_old, double zeta);

// Algorithm: alternate shrink (z given x) and the normal-equation solve
// (x given z). Exact blockwise minimization, so Psi never increases.
SolverResult am_solve(const ObjectiveParams& params, const SolverConfig& config,
                      const AmObserver& observer = {});

// Symmetric accelerated variant: per iteration xbar -> z -> x with a
// momentum extrapolation of z. Step 1 needs a solve only at k = 1, 2; for
// k > 2 it is the extrapolation x_{k-1} + tau_{k-1} (x_{k-1} - x_{k-2}),
// so one normal solve per iteration suffices.
SolverResult sam_solve(const ObjectiveParams& params, const SolverConfig& config,
                       const SamObserver& observer = {});

// Scaled ADMM on the constrained form (z = Dx exactly); penalty rho
// defaults to beta.
SolverResult admm_solve(const ObjectiveParams& params, const SolverConfig& config,
                        const AdmmObserver& observer = {});

// beta = 32 C / eps^2 and the iteration bound
// max{ 16 sqrt(C) ||z0 - z*_beta|| / eps^1.5 - 1, 1 } that guarantees an
// eps-optimal point of the original objective.
struct BetaSchedule {
  double beta = 0.0;
  double iteration_bound = 0.0;
};
BetaSchedule beta_for_epsilon(double C, double eps, double z0_dist);

// Checks Psi(x_k, z_k) - Psi* <= 2 beta ||z0 - z*||_Q^2 / (k+1)^2 at every
// recorded iteration, with ||v||_Q^2 = ||v||^2 + <D^T v, W^{-1} D^T v>.
bool convergence_bound_check(const SolverTrace& trace, const GradField& z0,
                             const GradField& zstar, double psi_star, const NormalSystem& sys,
                             const AnalysisOp& D, double beta);

}  // namespace tv
