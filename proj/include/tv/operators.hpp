#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>

#include "tv/image.hpp"

namespace tv {

// Abstract forward/adjoint pair acting on flat vectors.
class LinearMap {
 public:
  virtual ~LinearMap() = default;
  virtual long rows() const = 0;  // output dimension
  virtual long cols() const = 0;  // input dimension
  virtual Vec apply(const Vec& x) const = 0;
  virtual Vec apply_adjoint(const Vec& y) const = 0;
};

// ---------------------------------------------------------------------------
// Periodic finite differences on a single H x W channel (column-major).
// Plane 0: horizontal difference x(r, c+1 mod W) - x(r, c)  (offset H in the
// flat index). Plane 1: vertical difference x(r+1 mod H, c) - x(r, c).
GradField grad(const Vec& x, int height, int width);

// Exact adjoint of grad; requires group_dim = 2 and n_groups = H*W.
Vec div_adjoint(const GradField& z, int height, int width);

// ---------------------------------------------------------------------------
// Blur kernels

struct KernelSpec {
  enum class Type { Gaussian, Motion, Average, Delta };
  Type type = Type::Delta;
  int size = 1;        // gaussian/average: side; motion: segment length
  double param = 0.0;  // gaussian: sigma; motion: angle in degrees

  static KernelSpec gaussian(int size, double sigma);
  static KernelSpec motion(int len, double theta_deg);
  static KernelSpec average(int size);
  static KernelSpec delta();

  // grammar: "gaussian:SIZE:SIGMA" | "motion:LEN:THETA" | "average:SIZE" | "delta"
  static KernelSpec parse(const std::string& text);
  std::string str() const;
};

// Point-spread function: nonnegative, sums to 1, odd dimensions.
Eigen::MatrixXd make_kernel(const KernelSpec& spec);

// DFT eigenvalues of the circulant operator that convolves (periodically)
// with `kernel` on an H x W grid. The kernel center maps to index (0,0)
// with circular wrap, so a delta kernel gives the identity.
Eigen::VectorXcd circ_eigs(const Eigen::MatrixXd& kernel, int height, int width);

// Circular (periodic-boundary) convolution on one channel, applied
// spectrally. Immutable after construction.
class CirculantOp : public LinearMap {
 public:
  CirculantOp(const Eigen::MatrixXd& kernel, int height, int width);
  CirculantOp(const KernelSpec& spec, int height, int width);

  long rows() const override { return static_cast<long>(height_) * width_; }
  long cols() const override { return rows(); }
  Vec apply(const Vec& x) const override;
  Vec apply_adjoint(const Vec& y) const override;

  int height() const { return height_; }
  int width() const { return width_; }
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const Eigen::VectorXcd& eigs() const { return eigs_; }

 private:
  int height_, width_;
  Eigen::MatrixXd kernel_;
  Eigen::VectorXcd eigs_;
};

// Dense matrix operator.
class DenseOp : public LinearMap {
 public:
  explicit DenseOp(Eigen::MatrixXd entries) : m_(std::move(entries)) {}

  long rows() const override { return m_.rows(); }
  long cols() const override { return m_.cols(); }
  Vec apply(const Vec& x) const override { return m_ * x; }
  Vec apply_adjoint(const Vec& y) const override { return m_.transpose() * y; }

  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

// Identity on n-vectors (noise-free/denoising problems).
class IdentityOp : public LinearMap {
 public:
  explicit IdentityOp(long n) : n_(n) {}
  long rows() const override { return n_; }
  long cols() const override { return n_; }
  Vec apply(const Vec& x) const override { return x; }
  Vec apply_adjoint(const Vec& y) const override { return y; }

 private:
  long n_;
};

// m x n with i.i.d. standard normal entries and unit-norm columns.
DenseOp gen_gaussian_matrix(int m, int n, std::uint64_t seed);

// p x n (p >= n) with orthonormal columns: thin Q of a QR factorization of
// a p x n Gaussian matrix.
DenseOp gen_tight_frame(int p, int n, std::uint64_t seed);

// Orthonormal type-II DCT matrix, n x n.
DenseOp gen_dct(int n);

// ---------------------------------------------------------------------------
// Analysis operator: maps a signal to its stacked difference/analysis
// coefficients. tv-periodic produces groups of size 2 per pixel; the dense
// variants produce scalar groups.
class AnalysisOp {
 public:
  enum class Variant { TvPeriodic, TightFrame, Dct };

  static AnalysisOp tv_periodic(int height, int width);
  static AnalysisOp tight_frame(DenseOp d);
  static AnalysisOp dct(DenseOp d);

  Variant variant() const { return variant_; }
  int group_dim() const { return variant_ == Variant::TvPeriodic ? 2 : 1; }
  long n_groups() const;
  long signal_dim() const;
  bool orthonormal_rows_times_cols() const {  // D^T D = I
    return variant_ != Variant::TvPeriodic;
  }

  GradField apply(const Vec& x) const;
  Vec apply_adjoint(const GradField& z) const;

  int height() const { return height_; }
  int width() const { return width_; }
  const DenseOp* dense() const { return dense_ ? &*dense_ : nullptr; }

 private:
  AnalysisOp() = default;
  Variant variant_ = Variant::TvPeriodic;
  int height_ = 0, width_ = 0;
  std::shared_ptr<const DenseOp> dense_;
};

}  // namespace tv
