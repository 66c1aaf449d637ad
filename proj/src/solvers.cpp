#include "tv/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace tv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// x0 is the observation mapped into x-space: f itself when dimensions agree
// (deblurring), K^T f otherwise (recovery).
Vec initial_x(const ObjectiveParams& params) {
  if (params.f.size() == params.D->signal_dim()) return params.f;
  return params.K->apply_adjoint(params.f);
}

struct ObjectiveEval {
  double psi;
  double phi;
};

ObjectiveEval eval_objectives(const Vec& x, const GradField& z, const ObjectiveParams& params) {
  const GradField dx = params.D->apply(x);
  const Vec resid = params.K->apply(x) - params.f;
  const double fid = 0.5 * params.mu * resid.squaredNorm();
  double znorm = 0.0, dxnorm = 0.0;
  for (long i = 0; i < dx.n_groups; ++i) {
    znorm += z.group_norm(i);
    dxnorm += dx.group_norm(i);
  }
  const double couple = 0.5 * params.beta * (z.data - dx.data).squaredNorm();
  return {znorm + couple + fid, dxnorm + fid};
}

class TraceBuilder {
 public:
  TraceBuilder(const ObjectiveParams& params, const SolverConfig& config)
      : params_(params), config_(config), t0_(Clock::now()) {
    if (config.snr_reference) {
      const Vec& ref = *config.snr_reference;
      signal_sq_ = (ref.array() - ref.mean()).matrix().squaredNorm();
    }
  }

  void record(SolverTrace& trace, int k, const Vec& x, const GradField& z, const Vec& x_prev) {
    if (!config_.record_trace) return;
    TraceRecord rec;
    rec.k = k;
    const ObjectiveEval obj = eval_objectives(x, z, params_);
    rec.psi = obj.psi;
    rec.phi = obj.phi;
    rec.dx_sq = (x - x_prev).squaredNorm();
    rec.xprev_sq = x_prev.squaredNorm();
    rec.rel_change = std::sqrt(rec.dx_sq) / std::max(1.0, std::sqrt(rec.xprev_sq));
    if (config_.snr_reference) {
      rec.err_sq = (x - *config_.snr_reference).squaredNorm();
      rec.snr_db = std::sqrt(rec.err_sq) < 1e-15
                       ? 300.0
                       : 10.0 * std::log10(signal_sq_ / rec.err_sq);
    } else {
      rec.err_sq = kNaN;
      rec.snr_db = kNaN;
    }
    rec.time_s = seconds_since(t0_);
    trace.records.push_back(rec);
  }

 private:
  const ObjectiveParams& params_;
  const SolverConfig& config_;
  Clock::time_point t0_;
  double signal_sq_ = 0.0;
};

// best-Psi bookkeeping for the monotone variant
struct BestTracker {
  bool enabled = false;
  double best_psi = std::numeric_limits<double>::infinity();
  Vec x;
  GradField z;

  void consider(const ObjectiveParams& params, const Vec& cx, const GradField& cz) {
    if (!enabled) return;
    const double psi = objective_psi(cx, cz, params);
    if (psi < best_psi) {
      best_psi = psi;
      x = cx;
      z = cz;
    }
  }
};

}  // namespace

void SolverTrace::write_csv(std::ostream& os) const {
  os << "iter,psi,phi,snr_db,rel_change,time_s\n";
  char buf[256];
  for (const TraceRecord& r : records) {
    if (std::isnan(r.snr_db)) {
      std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,,%.12g,%.6g\n", r.k, r.psi, r.phi,
                    r.rel_change, r.time_s);
    } else {
      std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.6g\n", r.k, r.psi, r.phi,
                    r.snr_db, r.rel_change, r.time_s);
    }
    os << buf;
  }
}

MomentumState momentum_next(const MomentumState& s) {
  MomentumState n;
  n.t_prev = s.t;
  n.t = MomentumState::next_t(s.t);
  n.k = s.k + 1;
  return n;
}

bool stop_check(const Vec& x_new, const Vec& x_old, double zeta) {
  if (x_new.size() != x_old.size()) throw std::invalid_argument("stop_check: size mismatch");
  return (x_new - x_old).norm() / std::max(1.0, x_old.norm()) < zeta;
}

SolverResult am_solve(const ObjectiveParams& params, const SolverConfig& config,
                      const AmObserver& observer) {
  params.validate();
  config.validate();
  SolverResult res;
  res.system = std::make_shared<NormalSystem>(build_normal(params, config.route));
  const AnalysisOp& D = *params.D;
  const double thr = 1.0 / params.beta;

  TraceBuilder tb(params, config);
  BestTracker best;
  best.enabled = config.monotone;

  Vec x_prev = initial_x(params);
  Vec x;
  GradField z;
  for (long k = 1; k <= config.max_iter; ++k) {
    z = group_shrink(D.apply(x_prev), thr);
    x = res.system->solve(z);
    ++res.normal_solves;
    res.iterations = k;
    tb.record(res.trace, static_cast<int>(k), x, z, x_prev);
    best.consider(params, x, z);
    if (observer) observer(AmIterate{static_cast<int>(k), x, z});
    if (stop_check(x, x_prev, config.tol)) {
      res.converged = true;
      break;
    }
    x_prev = x;
  }
  res.x = best.enabled ? best.x : x;
  res.z = best.enabled ? best.z : z;
  return res;
}

SolverResult sam_solve(const ObjectiveParams& params, const SolverConfig& config,
                       const SamObserver& observer) {
  params.validate();
  config.validate();
  SolverResult res;
  res.system = std::make_shared<NormalSystem>(build_normal(params, config.route));
  const AnalysisOp& D = *params.D;
  const double thr = 1.0 / params.beta;

  TraceBuilder tb(params, config);
  BestTracker best;
  best.enabled = config.monotone;

  const Vec x_init = initial_x(params);
  GradField z_prev = D.apply(x_init);  // z0
  GradField zhat = z_prev;             // zhat_1 = z0
  MomentumState mom;                   // t_1 = 1
  double tau_prev = 0.0;
  Vec x_prev = x_init, x_prev2;
  Vec x, xbar;
  GradField z;

  for (long k = 1; k <= config.max_iter; ++k) {
    if (k <= 2 || config.sam_explicit_step1) {
      xbar = res.system->solve(zhat);
      ++res.normal_solves;
    } else {
      xbar = x_prev + tau_prev * (x_prev - x_prev2);
    }
    z = group_shrink(D.apply(xbar), thr);
    x = res.system->solve(z);
    ++res.normal_solves;

    const double tau = mom.tau();
    GradField zhat_next = z.like_zero();
    zhat_next.data = z.data + tau * (z.data - z_prev.data);
    mom = momentum_next(mom);

    res.iterations = k;
    tb.record(res.trace, static_cast<int>(k), x, z, x_prev);
    best.consider(params, x, z);
    if (observer)
      observer(SamIterate{static_cast<int>(k), xbar, z, x, zhat, zhat_next, tau,
                          res.normal_solves});

    const bool done = stop_check(x, x_prev, config.tol);
    x_prev2 = x_prev;
    x_prev = x;
    z_prev = z;
    zhat = std::move(zhat_next);
    tau_prev = tau;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.x = best.enabled ? best.x : x;
  res.z = best.enabled ? best.z : z;
  return res;
}

SolverResult admm_solve(const ObjectiveParams& params, const SolverConfig& config,
                        const AdmmObserver& observer) {
  params.validate();
  config.validate();
  const double rho = config.admm_rho > 0 ? config.admm_rho : params.beta;
  ObjectiveParams penalized = params;
  penalized.beta = rho;  // x-update system is D^T D + (mu/rho) K^T K

  SolverResult res;
  res.system = std::make_shared<NormalSystem>(build_normal(penalized, config.route));
  const AnalysisOp& D = *params.D;

  TraceBuilder tb(params, config);
  BestTracker best;
  best.enabled = config.monotone;

  Vec x = initial_x(params);
  GradField lambda(static_cast<int>(D.n_groups()), D.group_dim());
  GradField z = lambda.like_zero();
  GradField arg = lambda.like_zero();

  for (long k = 1; k <= config.max_iter; ++k) {
    arg.data = D.apply(x).data + lambda.data;
    z = group_shrink(arg, 1.0 / rho);
    arg.data = z.data - lambda.data;
    Vec x_new = res.system->solve(arg);
    ++res.normal_solves;
    lambda.data += D.apply(x_new).data - z.data;

    res.iterations = k;
    tb.record(res.trace, static_cast<int>(k), x_new, z, x);
    best.consider(params, x_new, z);
    if (observer) observer(AdmmIterate{static_cast<int>(k), x_new, z, lambda});

    const bool done = stop_check(x_new, x, config.tol);
    x = std::move(x_new);
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.x = best.enabled ? best.x : x;
  res.z = best.enabled ? best.z : z;
  return res;
}

BetaSchedule beta_for_epsilon(double C, double eps, double z0_dist) {
  if (C <= 0 || eps <= 0) throw std::invalid_argument("beta_for_epsilon: C and eps must be > 0");
  BetaSchedule s;
  s.beta = 32.0 * C / (eps * eps);
  s.iteration_bound =
      std::max(16.0 * std::sqrt(C) * z0_dist / std::pow(eps, 1.5) - 1.0, 1.0);
  return s;
}

bool convergence_bound_check(const SolverTrace& trace, const GradField& z0,
                             const GradField& zstar, double psi_star, const NormalSystem& sys,
                             const AnalysisOp& D, double beta) {
  GradField v = z0.like_zero();
  v.data = z0.data - zstar.data;
  const Vec dtv = D.apply_adjoint(v);
  const double qnorm_sq = v.data.squaredNorm() + dtv.dot(sys.solve_rhs(dtv));
  for (const TraceRecord& r : trace.records) {
    const double rhs = 2.0 * beta * qnorm_sq / (static_cast<double>(r.k + 1) * (r.k + 1));
    if (r.psi - psi_star > rhs) return false;
  }
  return true;
}

}  // namespace tv
