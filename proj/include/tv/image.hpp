#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace tv {

using Vec = Eigen::VectorXd;

// Real-valued pixel grid, channel-planar, column-major within each channel:
// flat index of pixel (row r, column c) in channel ch is ch*H*W + c*H + r.
// Pixel index i therefore runs down columns first.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  Vec data;

  Image() = default;
  Image(int h, int w, int ch)
      : height(h), width(w), channels(ch), data(Vec::Zero(static_cast<long>(h) * w * ch)) {
    if (h <= 0 || w <= 0 || (ch != 1 && ch != 3))
      throw std::invalid_argument("Image: bad dimensions");
  }

  long pixels() const { return static_cast<long>(height) * width; }
  long size() const { return pixels() * channels; }

  double& at(int r, int c, int ch = 0) { return data[static_cast<long>(ch) * pixels() + static_cast<long>(c) * height + r]; }
  double at(int r, int c, int ch = 0) const { return data[static_cast<long>(ch) * pixels() + static_cast<long>(c) * height + r]; }

  auto channel(int ch) { return data.segment(static_cast<long>(ch) * pixels(), pixels()); }
  auto channel(int ch) const { return data.segment(static_cast<long>(ch) * pixels(), pixels()); }
};

// Stacked difference coefficients: d contiguous planes of n_groups values
// each; plane j holds coefficient j of every group. group(i) gathers the
// d values of group i.
struct GradField {
  int n_groups = 0;
  int group_dim = 0;
  Vec data;

  GradField() = default;
  GradField(int groups, int dim)
      : n_groups(groups), group_dim(dim), data(Vec::Zero(static_cast<long>(groups) * dim)) {
    if (groups <= 0 || dim <= 0) throw std::invalid_argument("GradField: bad dimensions");
  }

  double& plane_at(int j, long i) { return data[static_cast<long>(j) * n_groups + i]; }
  double plane_at(int j, long i) const { return data[static_cast<long>(j) * n_groups + i]; }

  auto plane(int j) { return data.segment(static_cast<long>(j) * n_groups, n_groups); }
  auto plane(int j) const { return data.segment(static_cast<long>(j) * n_groups, n_groups); }

  Eigen::VectorXd group(long i) const {
    Eigen::VectorXd g(group_dim);
    for (int j = 0; j < group_dim; ++j) g[j] = plane_at(j, i);
    return g;
  }

  double group_norm(long i) const {
    double s = 0.0;
    for (int j = 0; j < group_dim; ++j) {
      const double v = plane_at(j, i);
      s += v * v;
    }
    return std::sqrt(s);
  }

  GradField like_zero() const {
    GradField out(n_groups, group_dim);
    return out;
  }
};

}  // namespace tv
