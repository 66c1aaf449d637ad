#pragma once

#include <memory>

#include "tv/image.hpp"
#include "tv/operators.hpp"

namespace tv {

class NormalSystem;

// Problem data for
//   Phi(x)    = sum_i ||D_i x||_2 + (mu/2) ||K x - f||_2^2
//   Psi(x, z) = sum_i ||z_i||_2 + (beta/2) ||z - D x||_2^2 + (mu/2) ||K x - f||_2^2
struct ObjectiveParams {
  double mu = 1.0;
  double beta = 1.0;
  std::shared_ptr<const LinearMap> K;
  std::shared_ptr<const AnalysisOp> D;
  Vec f;

  void validate() const;
};

// Groupwise shrinkage: per group i,
//   out_i = max{ ||g_i|| - threshold, 0 } * g_i / ||g_i||      (0*(0/0) = 0).
// For group_dim = 1 this is scalar soft-thresholding. Exact minimizer of
// ||z_i|| + (beta/2)||z_i - g_i||^2 with threshold = 1/beta.
GradField group_shrink(const GradField& g, double threshold);

double objective_phi(const Vec& x, const ObjectiveParams& params);
double objective_psi(const Vec& x, const GradField& z, const ObjectiveParams& params);

// First-order optimality residual at (x, z, zhat). Returns the max of
//   (a) ||W x - D^T z - b|| / (1 + ||b||)
//   (b) per-group dual residual with r = (z - Dx) + D W^{-1} D^T (z - zhat):
//       nonzero group:  || z_i/||z_i|| + beta r_i ||
//       zero group:     max{ beta ||r_i|| - 1, 0 }
// Zero at the solver fixed point; stays at solve accuracy along the
// accelerated iteration, which certifies its equivalence with the momentum
// proximal-gradient recursion.
double kkt_residual(const Vec& x, const GradField& z, const GradField& zhat,
                    const ObjectiveParams& params, const NormalSystem& normal);

}  // namespace tv
