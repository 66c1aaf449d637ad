#include "tv/linsolve.hpp"

#include <cmath>

#include "tv/fft.hpp"
#include "tv/rng.hpp"

namespace tv {

namespace {

// Eigenvalues of D^T D for periodic differences on an H x W grid, laid out
// column-major over frequencies (j along height, k along width):
//   4 sin^2(pi j / H) + 4 sin^2(pi k / W)
Vec dtd_eigs(int height, int width) {
  const double pi = 3.14159265358979323846;
  Vec e(static_cast<long>(height) * width);
  for (int c = 0; c < width; ++c) {
    const double sw = std::sin(pi * c / width);
    for (int r = 0; r < height; ++r) {
      const double sh = std::sin(pi * r / height);
      e[static_cast<long>(c) * height + r] = 4.0 * sh * sh + 4.0 * sw * sw;
    }
  }
  return e;
}

constexpr long kDenseCheckLimit = 2048;

// Dense assembly of W by applying it to basis vectors; used only for the
// nonsingularity check on the cg route at small sizes.
double min_eig_dense(const AnalysisOp& D, const LinearMap& K, double ratio, long n) {
  Eigen::MatrixXd w(n, n);
  Vec e = Vec::Zero(n);
  for (long j = 0; j < n; ++j) {
    e[j] = 1.0;
    w.col(j) = D.apply_adjoint(D.apply(e)) + ratio * K.apply_adjoint(K.apply(e));
    e[j] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

NormalSystem build_normal(const ObjectiveParams& params, SolveRoute route) {
  params.validate();
  NormalSystem sys;
  sys.ratio_ = params.mu / params.beta;
  sys.K_ = params.K;
  sys.D_ = params.D;
  sys.dim_ = params.D->signal_dim();
  sys.b_ = sys.ratio_ * params.K->apply_adjoint(params.f);

  const auto* circ = dynamic_cast<const CirculantOp*>(params.K.get());
  const bool tv_grid = params.D->variant() == AnalysisOp::Variant::TvPeriodic;
  const bool ortho_d = params.D->orthonormal_rows_times_cols();
  const bool dense_k = dynamic_cast<const DenseOp*>(params.K.get()) != nullptr;

  if (route == SolveRoute::Auto) {
    if (circ && tv_grid)
      route = SolveRoute::Spectral;
    else if (ortho_d && dense_k && params.K->rows() < params.K->cols())
      route = SolveRoute::Woodbury;
    else
      route = SolveRoute::Cg;
  }
  sys.route_ = route;

  switch (route) {
    case SolveRoute::Spectral: {
      if (!circ || !tv_grid)
        throw std::invalid_argument("spectral route requires circulant K on a difference grid");
      sys.height_ = circ->height();
      sys.width_ = circ->width();
      if (sys.height_ != params.D->height() || sys.width_ != params.D->width())
        throw std::invalid_argument("spectral route: K and D grids differ");
      const Vec lap = dtd_eigs(sys.height_, sys.width_);
      sys.eigs_w_ = lap + sys.ratio_ * circ->eigs().cwiseAbs2();
      sys.min_eig_ = sys.eigs_w_.minCoeff();
      sys.max_eig_ = sys.eigs_w_.maxCoeff();
      if (sys.min_eig_ <= 1e-14 * sys.max_eig_)
        throw std::invalid_argument(
            "build_normal: the normal operator is numerically singular; the null spaces of K "
            "and D must intersect only at zero");
      break;
    }
    case SolveRoute::Woodbury: {
      if (!ortho_d)
        throw std::invalid_argument("woodbury route requires an analysis operator with D^T D = I");
      const long m = params.K->rows();
      const auto* dense = dynamic_cast<const DenseOp*>(params.K.get());
      if (!dense) throw std::invalid_argument("woodbury route requires a dense K");
      Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(m, m) +
                             sys.ratio_ * (dense->matrix() * dense->matrix().transpose());
      sys.gram_llt_.emplace(gram);
      if (sys.gram_llt_->info() != Eigen::Success)
        throw std::invalid_argument("woodbury route: Gram complement factorization failed");
      // W = I + (mu/beta) K^T K, so it is positive definite outright
      sys.min_eig_ = 1.0;
      break;
    }
    case SolveRoute::Cg: {
      sys.cg_max_iter_ = 10 * sys.dim_;
      if (sys.dim_ <= kDenseCheckLimit) {
        const double mn = min_eig_dense(*params.D, *params.K, sys.ratio_, sys.dim_);
        if (mn <= 1e-14 * std::max(1.0, std::abs(mn)))
          throw std::invalid_argument(
              "build_normal: the normal operator is numerically singular; the null spaces of K "
              "and D must intersect only at zero");
        sys.min_eig_ = mn;
      }
      break;
    }
    case SolveRoute::Auto:
      break;
  }
  return sys;
}

const Vec& NormalSystem::eigs_W() const {
  if (route_ != SolveRoute::Spectral)
    throw std::logic_error("eigs_W: only available on the spectral route");
  return eigs_w_;
}

Vec NormalSystem::apply_W(const Vec& x) const {
  if (route_ == SolveRoute::Spectral) {
    const long n = dim_;
    CBuf buf(n), freq(n);
    for (long i = 0; i < n; ++i) buf[i] = {x[i], 0.0};
    fft2(buf.data(), freq.data(), height_, width_);
    for (long i = 0; i < n; ++i) freq[i] *= eigs_w_[i];
    ifft2(freq.data(), buf.data(), height_, width_);
    Vec out(n);
    for (long i = 0; i < n; ++i) out[i] = buf[i].real();
    return out;
  }
  return D_->apply_adjoint(D_->apply(x)) + ratio_ * K_->apply_adjoint(K_->apply(x));
}

Vec NormalSystem::solve_rhs(const Vec& rhs) const {
  if (rhs.size() != dim_) throw std::invalid_argument("solve_rhs: size mismatch");
  switch (route_) {
    case SolveRoute::Spectral: {
      const long n = dim_;
      CBuf buf(n), freq(n);
      for (long i = 0; i < n; ++i) buf[i] = {rhs[i], 0.0};
      fft2(buf.data(), freq.data(), height_, width_);
      for (long i = 0; i < n; ++i) freq[i] /= eigs_w_[i];
      ifft2(freq.data(), buf.data(), height_, width_);
      Vec out(n);
      for (long i = 0; i < n; ++i) out[i] = buf[i].real();
      return out;
    }
    case SolveRoute::Woodbury: {
      // (I + c K^T K)^{-1} r = r - c K^T (I + c K K^T)^{-1} K r
      const Vec kr = K_->apply(rhs);
      const Vec s = gram_llt_->solve(kr);
      return rhs - ratio_ * K_->apply_adjoint(s);
    }
    case SolveRoute::Cg: {
      Vec x = Vec::Zero(dim_);
      Vec r = rhs;
      Vec p = r;
      double rs = r.squaredNorm();
      const double target = cg_tol_ * rhs.norm();
      bool reached = std::sqrt(rs) <= target;
      for (long it = 0; !reached && it < cg_max_iter_; ++it) {
        const Vec wp = apply_W(p);
        const double alpha = rs / p.dot(wp);
        x += alpha * p;
        r -= alpha * wp;
        const double rs_new = r.squaredNorm();
        reached = std::sqrt(rs_new) <= target;
        p = r + (rs_new / rs) * p;
        rs = rs_new;
      }
      // the recursive residual can drift from the true one on ill-conditioned
      // systems; enforce the contract on the true residual
      const double true_res = (apply_W(x) - rhs).norm();
      if (!reached || true_res > 1e-9 * (1.0 + rhs.norm()))
        throw SolveError("cg did not reach the residual tolerance within 10n iterations",
                         true_res);
      return x;
    }
    case SolveRoute::Auto:
      break;
  }
  throw std::logic_error("unreachable");
}

Vec NormalSystem::solve(const GradField& z) const { return solve_rhs(D_->apply_adjoint(z) + b_); }

double opnorm_DWinvDT(const NormalSystem& sys, const AnalysisOp& D) {
  Rng rng(0x9d2c5680u);
  const int gd = D.group_dim();
  const long groups = D.n_groups();
  // the operator is symmetric PSD on the stacked coefficient space
  auto apply_m = [&](const Vec& u) {
    GradField g(static_cast<int>(groups), gd);
    g.data = u;
    const Vec w = sys.solve_rhs(D.apply_adjoint(g));
    return D.apply(w).data;
  };
  Vec vv(groups * gd);
  for (long i = 0; i < vv.size(); ++i) vv[i] = rng.normal();
  vv /= vv.norm();
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Vec mv = apply_m(vv);
    const double lam_new = vv.dot(mv);
    const double nrm = mv.norm();
    if (nrm == 0.0) return 0.0;
    vv = mv / nrm;
    if (it > 0 && std::abs(lam_new - lam) <= 1e-10 * std::abs(lam_new)) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
  }
  return lam;
}

}  // namespace tv
