// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "gpvortex/grid.hpp"

namespace gpv {

/// Cached FFTW plans for one (nx, ny) transform size.
///
/// Plans are created once with FFTW_ESTIMATE (deterministic plan choice) and
/// FFTW_UNALIGNED so they can execute on any buffer via the new-array
/// interface. Transforms are unnormalized; callers divide by nx*ny after a
/// forward-backward round trip. Plan creation is serialized; execution is
/// re-entrant on distinct buffers.
class Fft2 {
public:
  static const Fft2& get(const GridSpec& g) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<Fft2>> cache;
    std::lock_guard lock(mtx);
    auto key = std::make_pair(g.nx, g.ny);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, std::unique_ptr<Fft2>(new Fft2(g.nx, g.ny))).first;
    return *it->second;
  }

  void forward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(fwd_,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  void backward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(bwd_,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

  ~Fft2() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

private:
  Fft2(int nx, int ny) {
    std::vector<std::complex<double>> a(static_cast<std::size_t>(nx) * ny);
    std::vector<std::complex<double>> b(a.size());
    // x1 is the fastest-varying index, so it is FFTW's last dimension.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(a.data()),
                            reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(a.data()),
                            reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD, flags);
  }

  fftw_plan fwd_;
  fftw_plan bwd_;
};

} // namespace gpv
