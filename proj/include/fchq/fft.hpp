#pragma once

// Thin FFTW3 wrapper: in-place complex transforms over row-major arrays of
// rank 1..3. Plans are created once per (shape, direction) under a mutex
// (FFTW's planner is not reentrant) and executed through the new-array
// interface, which is safe to call concurrently on distinct buffers.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace fchq::fft {

using Complex = std::complex<double>;

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const std::vector<int>& shape, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const Key key{shape, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    auto* scratch = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }
  using Key = std::pair<std::vector<int>, int>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

inline void execute(std::vector<Complex>& data, int dim, int points_per_axis, int sign) {
  const std::vector<int> shape(static_cast<std::size_t>(dim), points_per_axis);
  fftw_plan plan = PlanCache::instance().get(shape, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace detail

/// Unnormalised forward transform, sum_j u_j exp(-2 pi i jk/n).
inline void forward(std::vector<Complex>& data, int dim, int points_per_axis) {
  detail::execute(data, dim, points_per_axis, FFTW_FORWARD);
}

/// Inverse transform including the 1/n^dim normalisation.
inline void inverse(std::vector<Complex>& data, int dim, int points_per_axis) {
  detail::execute(data, dim, points_per_axis, FFTW_BACKWARD);
  const double norm = 1.0 / static_cast<double>(data.size());
  for (auto& c : data) c *= norm;
}

}  // namespace fchq::fft
