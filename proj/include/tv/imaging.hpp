#pragma once

#include <string>
#include <utility>

#include "tv/image.hpp"
#include "tv/operators.hpp"

namespace tv {

// NetPBM binary input (P5 grayscale, P6 color; 8- or 16-bit big-endian).
// Loaded values are divided by maxval so pixels land in [0, 1].
Image load_image(const std::string& path);

// Clamps to [0, 1] and quantizes to maxval (255 or 65535). Round-trip error
// is at most 1/(2 maxval) per pixel.
void save_image(const Image& image, const std::string& path, int maxval = 255);

struct DegradationSpec {
  KernelSpec kernel;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Degraded {
  Image f;
  std::shared_ptr<CirculantOp> K;  // blur bound to the image dimensions
};

// f = K x + sigma * eta, periodic-boundary blur plus i.i.d. Gaussian noise,
// drawn per channel from a stream keyed by (seed, channel).
Degraded degrade(const Image& x, const DegradationSpec& spec);

// 20 log10( ||x_true - mean(x_true)|| / ||x_rec - x_true|| ), capped at
// 300 dB when the error norm is below 1e-15.
double snr_db(const Image& x_rec, const Image& x_true);
double snr_db(const Vec& x_rec, const Vec& x_true);

// mu = 0.05 / sigma^2; sigma = 0 has no finite answer, the caller must
// supply mu explicitly.
double mu_auto(double sigma);

// Deterministic piecewise-smooth test image (blocks, disks, gentle texture)
// with values in [0, 1].
Image make_phantom(int height, int width, int channels, std::uint64_t seed);

// Phantom with multi-scale texture and a smoothed noise field on top of the
// blocks, approximating natural-image statistics: restoration quality
// saturates instead of growing without bound.
Image make_textured_phantom(int height, int width, int channels, std::uint64_t seed);

}  // namespace tv
