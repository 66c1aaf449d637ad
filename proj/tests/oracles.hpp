#pragma once

// Independent reference implementations used to pin down expected values.
// Everything here is written directly from the defining formulas (explicit
// matrices, direct convolution sums, exhaustive search) with no reuse of the
// library's computational paths.

#include <Eigen/Dense>

#include "tv/image.hpp"
#include "tv/operators.hpp"
#include "tv/prox.hpp"
#include "tv/rng.hpp"

namespace oracle {

using tv::Vec;

// Difference matrix from the per-pixel case formulas, 1-based index i running
// down columns of an n1 x n2 grid. Rows [0, n) are the horizontal plane,
// rows [n, 2n) vertical.
inline Eigen::MatrixXd dense_grad_matrix(int n1, int n2) {
  const int n = n1 * n2;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, n);
  for (int i = 1; i <= n; ++i) {
    // horizontal: x_{i+n1} - x_i, wrapping past n1*(n2-1)
    if (i <= n1 * (n2 - 1)) {
      d(i - 1, i - 1 + n1) += 1;
    } else {
      d(i - 1, i - 1 - n1 * (n2 - 1)) += 1;
    }
    d(i - 1, i - 1) -= 1;
    // vertical: x_{i+1} - x_i, except multiples of n1 wrap to x_{i-n1+1}
    if (i % n1 == 0) {
      d(n + i - 1, i - n1) += 1;  // (i - n1 + 1) - 1
    } else {
      d(n + i - 1, i) += 1;  // (i + 1) - 1
    }
    d(n + i - 1, i - 1) -= 1;
  }
  return d;
}

// Direct periodic convolution sum matching the kernel-centered-at-origin
// convention: y(r,c) = sum_k kern(kr,kc) x((r - kr + cr) mod H, (c - kc + cc) mod W)
inline Vec direct_circular_conv(const Vec& x, const Eigen::MatrixXd& kern, int H, int W) {
  const int cr = static_cast<int>(kern.rows()) / 2;
  const int cc = static_cast<int>(kern.cols()) / 2;
  Vec y = Vec::Zero(static_cast<long>(H) * W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < kern.rows(); ++kr)
        for (int kc = 0; kc < kern.cols(); ++kc) {
          const int sr = ((r - (kr - cr)) % H + H) % H;
          const int sc = ((c - (kc - cc)) % W + W) % W;
          acc += kern(kr, kc) * x[static_cast<long>(sc) * H + sr];
        }
      y[static_cast<long>(c) * H + r] = acc;
    }
  return y;
}

// Materialize any LinearMap by applying it to basis vectors.
inline Eigen::MatrixXd dense_from_linmap(const tv::LinearMap& op) {
  Eigen::MatrixXd m(op.rows(), op.cols());
  Vec e = Vec::Zero(op.cols());
  for (long j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return m;
}

inline Eigen::MatrixXd dense_W(const Eigen::MatrixXd& Dmat, const Eigen::MatrixXd& Kmat,
                               double ratio) {
  return Dmat.transpose() * Dmat + ratio * Kmat.transpose() * Kmat;
}

// Objective of the per-group subproblem ||z|| + (beta/2) ||z - g||^2.
inline double shrink_objective(const Eigen::VectorXd& z, const Eigen::VectorXd& g, double beta) {
  return z.norm() + 0.5 * beta * (z - g).squaredNorm();
}

// Grid search plus local refinement for the 2-D shrinkage subproblem.
inline Eigen::Vector2d shrink_by_search(const Eigen::Vector2d& g, double beta) {
  Eigen::Vector2d best = Eigen::Vector2d::Zero();
  double best_obj = shrink_objective(best, g, beta);
  const double span = g.norm() + 1.0;
  double step = span / 40.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    for (int a = -40; a <= 40; ++a)
      for (int b = -40; b <= 40; ++b) {
        Eigen::Vector2d cand = center + step * Eigen::Vector2d(a, b);
        const double obj = shrink_objective(cand, g, beta);
        if (obj < best_obj) {
          best_obj = obj;
          best = cand;
          improved = true;
        }
      }
    center = best;
    step *= 0.5;
    if (!improved && step < 1e-14) break;
  }
  return best;
}

// Straightforward re-evaluation of Phi with nested loops (no Eigen reductions).
inline double phi_by_loops(const Vec& x, const tv::ObjectiveParams& params) {
  const tv::GradField dx = params.D->apply(x);
  double tv_part = 0.0;
  for (long i = 0; i < dx.n_groups; ++i) {
    double s = 0.0;
    for (int j = 0; j < dx.group_dim; ++j) {
      const double v = dx.data[static_cast<long>(j) * dx.n_groups + i];
      s += v * v;
    }
    tv_part += std::sqrt(s);
  }
  const Vec kx = params.K->apply(x);
  double fid = 0.0;
  for (long i = 0; i < kx.size(); ++i) {
    const double r = kx[i] - params.f[i];
    fid += r * r;
  }
  return tv_part + 0.5 * params.mu * fid;
}

inline Vec random_vec(long n, tv::Rng& rng) {
  Vec v(n);
  for (long i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace oracle
