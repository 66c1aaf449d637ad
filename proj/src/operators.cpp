#include "tv/operators.hpp"

#include <cmath>
#include <sstream>

#include "tv/fft.hpp"
#include "tv/rng.hpp"

namespace tv {

GradField grad(const Vec& x, int height, int width) {
  const long n = static_cast<long>(height) * width;
  if (x.size() != n) throw std::invalid_argument("grad: size mismatch");
  GradField z(static_cast<int>(n), 2);
  for (int c = 0; c < width; ++c) {
    const int cr = (c + 1 == width) ? 0 : c + 1;
    const long col = static_cast<long>(c) * height;
    const long colr = static_cast<long>(cr) * height;
    for (int r = 0; r < height; ++r) {
      const int rd = (r + 1 == height) ? 0 : r + 1;
      const long i = col + r;
      z.data[i] = x[colr + r] - x[i];      // horizontal
      z.data[n + i] = x[col + rd] - x[i];  // vertical
    }
  }
  return z;
}

Vec div_adjoint(const GradField& z, int height, int width) {
  const long n = static_cast<long>(height) * width;
  if (z.group_dim != 2 || z.n_groups != n)
    throw std::invalid_argument("div_adjoint: field does not match grid");
  Vec out = Vec::Zero(n);
  for (int c = 0; c < width; ++c) {
    const int cl = (c == 0) ? width - 1 : c - 1;
    const long col = static_cast<long>(c) * height;
    const long coll = static_cast<long>(cl) * height;
    for (int r = 0; r < height; ++r) {
      const int ru = (r == 0) ? height - 1 : r - 1;
      const long i = col + r;
      out[i] += z.data[coll + r] - z.data[i];              // horizontal plane
      out[i] += z.data[n + col + ru] - z.data[n + i];      // vertical plane
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

KernelSpec KernelSpec::gaussian(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || sigma <= 0)
    throw std::invalid_argument("gaussian kernel: size must be odd >= 1, sigma > 0");
  KernelSpec s;
  s.type = Type::Gaussian;
  s.size = size;
  s.param = sigma;
  return s;
}

KernelSpec KernelSpec::motion(int len, double theta_deg) {
  if (len < 1) throw std::invalid_argument("motion kernel: len must be >= 1");
  KernelSpec s;
  s.type = Type::Motion;
  s.size = len;
  s.param = theta_deg;
  return s;
}

KernelSpec KernelSpec::average(int size) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("average kernel: size must be odd >= 1");
  KernelSpec s;
  s.type = Type::Average;
  s.size = size;
  return s;
}

KernelSpec KernelSpec::delta() { return KernelSpec{}; }

KernelSpec KernelSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw std::invalid_argument("empty kernel spec");
  const std::string& name = parts[0];
  try {
    if (name == "delta" && parts.size() == 1) return delta();
    if (name == "gaussian" && parts.size() == 3)
      return gaussian(std::stoi(parts[1]), std::stod(parts[2]));
    if (name == "motion" && parts.size() == 3)
      return motion(std::stoi(parts[1]), std::stod(parts[2]));
    if (name == "average" && parts.size() == 2) return average(std::stoi(parts[1]));
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed kernel spec: " + text);
  }
  throw std::invalid_argument("malformed kernel spec: " + text);
}

std::string KernelSpec::str() const {
  std::ostringstream os;
  switch (type) {
    case Type::Gaussian: os << "gaussian:" << size << ":" << param; break;
    case Type::Motion: os << "motion:" << size << ":" << param; break;
    case Type::Average: os << "average:" << size; break;
    case Type::Delta: os << "delta"; break;
  }
  return os.str();
}

namespace {

Eigen::MatrixXd motion_kernel(int len, double theta_deg) {
  const double th = theta_deg * 3.14159265358979323846 / 180.0;
  const double half = (len - 1) / 2.0;
  const double cx = std::cos(th), sx = std::sin(th);
  const int hw = static_cast<int>(std::ceil(std::abs(half * cx))) + 1;
  const int hh = static_cast<int>(std::ceil(std::abs(half * sx))) + 1;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * hh + 1, 2 * hw + 1);
  for (int r = 0; r < k.rows(); ++r) {
    for (int c = 0; c < k.cols(); ++c) {
      const double u = c - hw;
      const double v = -(r - hh);  // y axis points up
      const double t = u * cx + v * sx;
      const double d = std::abs(-u * sx + v * cx);
      if (std::abs(t) <= half + 0.5) {
        const double w = 1.0 - d;
        if (w > 1e-12) k(r, c) = w;  // sub-roundoff coverage is a trig artifact
      }
    }
  }
  // trim all-zero borders, keeping the kernel odd and centered
  int rext = 0, cext = 0;
  for (int r = 0; r < k.rows(); ++r)
    for (int c = 0; c < k.cols(); ++c)
      if (k(r, c) > 0) {
        rext = std::max(rext, std::abs(r - hh));
        cext = std::max(cext, std::abs(c - hw));
      }
  Eigen::MatrixXd trimmed =
      k.block(hh - rext, hw - cext, 2 * rext + 1, 2 * cext + 1);
  const double s = trimmed.sum();
  if (s <= 0) throw std::invalid_argument("motion kernel: degenerate rasterization");
  return trimmed / s;
}

}  // namespace

Eigen::MatrixXd make_kernel(const KernelSpec& spec) {
  switch (spec.type) {
    case KernelSpec::Type::Delta: {
      Eigen::MatrixXd k(1, 1);
      k(0, 0) = 1.0;
      return k;
    }
    case KernelSpec::Type::Average: {
      const int s = spec.size;
      return Eigen::MatrixXd::Constant(s, s, 1.0 / (static_cast<double>(s) * s));
    }
    case KernelSpec::Type::Gaussian: {
      const int s = spec.size;
      const double sig = spec.param;
      const int h = s / 2;
      Eigen::MatrixXd k(s, s);
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) {
          const double dr = r - h, dc = c - h;
          k(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * sig * sig));
        }
      return k / k.sum();
    }
    case KernelSpec::Type::Motion:
      return motion_kernel(spec.size, spec.param);
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXcd circ_eigs(const Eigen::MatrixXd& kernel, int height, int width) {
  if (kernel.rows() > height || kernel.cols() > width)
    throw std::invalid_argument("circ_eigs: kernel larger than grid");
  const long n = static_cast<long>(height) * width;
  CBuf padded(n, {0.0, 0.0});
  const int cr = static_cast<int>(kernel.rows()) / 2;
  const int cc = static_cast<int>(kernel.cols()) / 2;
  for (int r = 0; r < kernel.rows(); ++r) {
    for (int c = 0; c < kernel.cols(); ++c) {
      const int rr = ((r - cr) % height + height) % height;
      const int ww = ((c - cc) % width + width) % width;
      padded[static_cast<long>(ww) * height + rr] += kernel(r, c);
    }
  }
  CBuf freq(n);
  fft2(padded.data(), freq.data(), height, width);
  Eigen::VectorXcd eigs(n);
  for (long i = 0; i < n; ++i) eigs[i] = freq[i];
  return eigs;
}

CirculantOp::CirculantOp(const Eigen::MatrixXd& kernel, int height, int width)
    : height_(height), width_(width), kernel_(kernel), eigs_(circ_eigs(kernel, height, width)) {}

CirculantOp::CirculantOp(const KernelSpec& spec, int height, int width)
    : CirculantOp(make_kernel(spec), height, width) {}

namespace {

Vec spectral_apply(const Vec& x, const Eigen::VectorXcd& eigs, int height, int width, bool conj) {
  const long n = static_cast<long>(height) * width;
  CBuf buf(n), freq(n);
  for (long i = 0; i < n; ++i) buf[i] = {x[i], 0.0};
  fft2(buf.data(), freq.data(), height, width);
  if (conj) {
    for (long i = 0; i < n; ++i) freq[i] *= std::conj(eigs[i]);
  } else {
    for (long i = 0; i < n; ++i) freq[i] *= eigs[i];
  }
  ifft2(freq.data(), buf.data(), height, width);
  Vec out(n);
  for (long i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace

Vec CirculantOp::apply(const Vec& x) const {
  if (x.size() != rows()) throw std::invalid_argument("CirculantOp::apply: size mismatch");
  return spectral_apply(x, eigs_, height_, width_, false);
}

Vec CirculantOp::apply_adjoint(const Vec& y) const {
  if (y.size() != rows()) throw std::invalid_argument("CirculantOp::apply_adjoint: size mismatch");
  return spectral_apply(y, eigs_, height_, width_, true);
}

// ---------------------------------------------------------------------------

DenseOp gen_gaussian_matrix(int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gen_gaussian_matrix: bad dimensions");
  Rng rng(mix_seed(seed, 0x6d61747278ull));
  Eigen::MatrixXd a(m, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < m; ++r) a(r, c) = rng.normal();
  for (int c = 0; c < n; ++c) {
    const double nrm = a.col(c).norm();
    if (nrm > 0) a.col(c) /= nrm;
  }
  return DenseOp(std::move(a));
}

DenseOp gen_tight_frame(int p, int n, std::uint64_t seed) {
  if (p < n || n < 1) throw std::invalid_argument("gen_tight_frame: requires p >= n >= 1");
  Rng rng(mix_seed(seed, 0x6672616d65ull));
  Eigen::MatrixXd a(p, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < p; ++r) a(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, n);
  return DenseOp(std::move(q));
}

DenseOp gen_dct(int n) {
  if (n < 1) throw std::invalid_argument("gen_dct: n must be >= 1");
  Eigen::MatrixXd d(n, n);
  const double pi = 3.14159265358979323846;
  for (int j = 0; j < n; ++j) {
    const double s = (j == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) d(j, i) = s * std::cos(pi * (2.0 * i + 1.0) * j / (2.0 * n));
  }
  return DenseOp(std::move(d));
}

// ---------------------------------------------------------------------------

AnalysisOp AnalysisOp::tv_periodic(int height, int width) {
  if (height < 1 || width < 1) throw std::invalid_argument("AnalysisOp: bad grid");
  AnalysisOp op;
  op.variant_ = Variant::TvPeriodic;
  op.height_ = height;
  op.width_ = width;
  return op;
}

AnalysisOp AnalysisOp::tight_frame(DenseOp d) {
  AnalysisOp op;
  op.variant_ = Variant::TightFrame;
  op.dense_ = std::make_shared<DenseOp>(std::move(d));
  return op;
}

AnalysisOp AnalysisOp::dct(DenseOp d) {
  if (d.rows() != d.cols()) throw std::invalid_argument("AnalysisOp::dct: matrix must be square");
  AnalysisOp op;
  op.variant_ = Variant::Dct;
  op.dense_ = std::make_shared<DenseOp>(std::move(d));
  return op;
}

long AnalysisOp::n_groups() const {
  return variant_ == Variant::TvPeriodic ? static_cast<long>(height_) * width_ : dense_->rows();
}

long AnalysisOp::signal_dim() const {
  return variant_ == Variant::TvPeriodic ? static_cast<long>(height_) * width_ : dense_->cols();
}

GradField AnalysisOp::apply(const Vec& x) const {
  if (variant_ == Variant::TvPeriodic) return grad(x, height_, width_);
  GradField z(static_cast<int>(dense_->rows()), 1);
  z.data = dense_->apply(x);
  return z;
}

Vec AnalysisOp::apply_adjoint(const GradField& z) const {
  if (variant_ == Variant::TvPeriodic) return div_adjoint(z, height_, width_);
  if (z.group_dim != 1 || z.n_groups != dense_->rows())
    throw std::invalid_argument("AnalysisOp::apply_adjoint: field mismatch");
  return dense_->apply_adjoint(z.data);
}

}  // namespace tv
