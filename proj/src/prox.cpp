#include "tv/prox.hpp"

#include <cmath>

#include "tv/linsolve.hpp"

namespace tv {

void ObjectiveParams::validate() const {
  if (mu <= 0 || beta <= 0) throw std::invalid_argument("ObjectiveParams: mu and beta must be > 0");
  if (!K || !D) throw std::invalid_argument("ObjectiveParams: missing operators");
  if (K->rows() != f.size()) throw std::invalid_argument("ObjectiveParams: f does not match K");
  if (K->cols() != D->signal_dim())
    throw std::invalid_argument("ObjectiveParams: K and D disagree on signal dimension");
}

GradField group_shrink(const GradField& g, double threshold) {
  GradField out(g.n_groups, g.group_dim);
  const long n = g.n_groups;
  if (g.group_dim == 1) {
    for (long i = 0; i < n; ++i) {
      const double v = g.data[i];
      const double m = std::abs(v) - threshold;
      out.data[i] = m > 0 ? (v < 0 ? -m : m) : 0.0;
    }
    return out;
  }
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.group_dim; ++j) {
      const double v = g.data[static_cast<long>(j) * n + i];
      s += v * v;
    }
    const double nrm = std::sqrt(s);
    if (nrm > threshold) {
      const double fac = (nrm - threshold) / nrm;
      for (int j = 0; j < g.group_dim; ++j)
        out.data[static_cast<long>(j) * n + i] = fac * g.data[static_cast<long>(j) * n + i];
    }
  }
  return out;
}

namespace {

double group_norm_sum(const GradField& z) {
  double s = 0.0;
  for (long i = 0; i < z.n_groups; ++i) s += z.group_norm(i);
  return s;
}

}  // namespace

double objective_phi(const Vec& x, const ObjectiveParams& params) {
  if (x.size() != params.D->signal_dim()) throw std::invalid_argument("objective_phi: size mismatch");
  const GradField dx = params.D->apply(x);
  const Vec resid = params.K->apply(x) - params.f;
  return group_norm_sum(dx) + 0.5 * params.mu * resid.squaredNorm();
}

double objective_psi(const Vec& x, const GradField& z, const ObjectiveParams& params) {
  if (x.size() != params.D->signal_dim()) throw std::invalid_argument("objective_psi: size mismatch");
  const GradField dx = params.D->apply(x);
  if (z.n_groups != dx.n_groups || z.group_dim != dx.group_dim)
    throw std::invalid_argument("objective_psi: field mismatch");
  const Vec resid = params.K->apply(x) - params.f;
  return group_norm_sum(z) + 0.5 * params.beta * (z.data - dx.data).squaredNorm() +
         0.5 * params.mu * resid.squaredNorm();
}

double kkt_residual(const Vec& x, const GradField& z, const GradField& zhat,
                    const ObjectiveParams& params, const NormalSystem& normal) {
  const AnalysisOp& D = *params.D;
  const double beta = params.beta;

  // primal: || W x - D^T z - b || / (1 + ||b||)
  const Vec dtz = D.apply_adjoint(z);
  const double primal =
      (normal.apply_W(x) - dtz - normal.b()).norm() / (1.0 + normal.b().norm());

  // r = (z - D x) + D W^{-1} D^T (z - zhat)
  GradField diff = z.like_zero();
  diff.data = z.data - zhat.data;
  const Vec corr = normal.solve_rhs(D.apply_adjoint(diff));
  GradField r = z.like_zero();
  r.data = (z.data - D.apply(x).data) + D.apply(corr).data;

  double dual = 0.0;
  const long n = z.n_groups;
  for (long i = 0; i < n; ++i) {
    const double zn = z.group_norm(i);
    if (zn > 0) {
      double s = 0.0;
      for (int j = 0; j < z.group_dim; ++j) {
        const double v = z.plane_at(j, i) / zn + beta * r.plane_at(j, i);
        s += v * v;
      }
      dual = std::max(dual, std::sqrt(s));
    } else {
      dual = std::max(dual, std::max(beta * r.group_norm(i) - 1.0, 0.0));
    }
  }
  return std::max(primal, dual);
}

}  // namespace tv
