#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace nlslab {

using cplx = std::complex<double>;

namespace detail {

// One forward/backward pair of in-place plans for a given shape.  FFTW
// planning is not thread-safe, execution through fftw_execute_dft is, so
// plans live in a process-wide cache guarded by a mutex and are only ever
// executed on caller-owned buffers afterwards.
class FftPlanPair {
 public:
  FftPlanPair(int n0, int n1) {
    const int total = n0 * (n1 > 0 ? n1 : 1);
    std::vector<cplx> scratch(static_cast<std::size_t>(total));
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (n1 > 0) {
      forward_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, flags);
    } else {
      forward_ = fftw_plan_dft_1d(n0, buf, buf, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft_1d(n0, buf, buf, FFTW_BACKWARD, flags);
    }
  }
  FftPlanPair(const FftPlanPair&) = delete;
  FftPlanPair& operator=(const FftPlanPair&) = delete;
  ~FftPlanPair() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(std::span<cplx> data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(forward_, p, p);
  }
  void backward(std::span<cplx> data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(backward_, p, p);
  }

 private:
  fftw_plan forward_{};
  fftw_plan backward_{};
};

inline const FftPlanPair& fft_plans(int n0, int n1) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<FftPlanPair>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n0, n1}];
  if (!slot) slot = std::make_unique<FftPlanPair>(n0, n1);
  return *slot;
}

}  // namespace detail
}  // namespace nlslab
