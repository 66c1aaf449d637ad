#pragma once

#include <complex>
#include <vector>

namespace tv {

// 2-D complex DFT of a column-major H x W grid (flat index c*H + r).
// Forward is unnormalized; inverse divides by H*W. Plans are cached per
// shape and executed on caller buffers, so calls are re-entrant.
void fft2(const std::complex<double>* in, std::complex<double>* out, int height, int width);
void ifft2(const std::complex<double>* in, std::complex<double>* out, int height, int width);

using CBuf = std::vector<std::complex<double>>;

}  // namespace tv
