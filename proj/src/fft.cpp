#include "tv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace tv {
namespace {

// Plans are created once per (shape, direction) with FFTW_UNALIGNED so they
// can be executed on any caller buffer via fftw_execute_dft. Plan creation
// is serialized; execution is thread-safe by FFTW's contract.
class PlanCache {
 public:
  fftw_plan get(int height, int width, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = std::make_tuple(height, width, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // column-major H x W equals row-major W x H, so n0 = width, n1 = height
    std::vector<std::complex<double>> tmp(static_cast<size_t>(height) * width);
    fftw_plan p = fftw_plan_dft_2d(width, height,
                                   reinterpret_cast<fftw_complex*>(tmp.data()),
                                   reinterpret_cast<fftw_complex*>(tmp.data()),
                                   sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft2(const std::complex<double>* in, std::complex<double>* out, int height, int width) {
  fftw_plan p = cache().get(height, width, FFTW_FORWARD);
  fftw_execute_dft(p,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void ifft2(const std::complex<double>* in, std::complex<double>* out, int height, int width) {
  fftw_plan p = cache().get(height, width, FFTW_BACKWARD);
  fftw_execute_dft(p,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / (static_cast<double>(height) * width);
  const long n = static_cast<long>(height) * width;
  for (long i = 0; i < n; ++i) out[i] *= scale;
}

}  // namespace tv
