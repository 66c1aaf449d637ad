#pragma once

#include <Eigen/Cholesky>
#include <memory>
#include <optional>

#include "tv/prox.hpp"

namespace tv {

enum class SolveRoute { Auto, Spectral, Woodbury, Cg };

struct SolveError : std::runtime_error {
  SolveError(const std::string& what, double resid) : std::runtime_error(what), residual(resid) {}
  double residual = 0.0;
};

// The normal operator W = D^T D + (mu/beta) K^T K together with a solve
// strategy bound to the operator structure:
//   spectral : K circulant, D periodic differences — diagonal in Fourier space
//   woodbury : D^T D = I, K dense with m < n — m x m Cholesky complement
//   cg       : anything else — unpreconditioned conjugate gradients
// Immutable after build; solves are re-entrant.
class NormalSystem {
 public:
  SolveRoute route() const { return route_; }
  double ratio() const { return ratio_; }  // mu/beta
  const Vec& b() const { return b_; }      // (mu/beta) K^T f

  // Solve W x = D^T z + b (the x-update of the alternating schemes).
  Vec solve(const GradField& z) const;
  // Solve W x = rhs for an arbitrary right-hand side.
  Vec solve_rhs(const Vec& rhs) const;
  Vec apply_W(const Vec& x) const;

  // spectral route only
  const Vec& eigs_W() const;
  double min_eig_W() const { return min_eig_; }
  double max_eig_W() const { return max_eig_; }

  long dim() const { return dim_; }

 private:
  friend NormalSystem build_normal(const ObjectiveParams&, SolveRoute);

  SolveRoute route_ = SolveRoute::Cg;
  double ratio_ = 0.0;
  long dim_ = 0;
  Vec b_;
  std::shared_ptr<const LinearMap> K_;
  std::shared_ptr<const AnalysisOp> D_;

  // spectral
  int height_ = 0, width_ = 0;
  Vec eigs_w_;
  double min_eig_ = 0.0, max_eig_ = 0.0;

  // woodbury: factorization of I + (mu/beta) K K^T
  std::optional<Eigen::LLT<Eigen::MatrixXd>> gram_llt_;

  // cg
  double cg_tol_ = 1e-10;
  long cg_max_iter_ = 0;
};

// Builds the solve strategy for the given problem. Verifies that W is
// nonsingular (the null spaces of K and D intersect trivially) and throws
// std::invalid_argument otherwise.
NormalSystem build_normal(const ObjectiveParams& params, SolveRoute route = SolveRoute::Auto);

// Power-iteration estimate of || D W^{-1} D^T ||_2 (200 iterations or
// relative change < 1e-10). Always <= 1 for these systems.
double opnorm_DWinvDT(const NormalSystem& sys, const AnalysisOp& D);

}  // namespace tv
