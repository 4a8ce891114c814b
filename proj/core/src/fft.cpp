#include "gzk/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace gzk::fft {

namespace {

enum class Kind { kR2C, kC2R };

// FFTW's planner is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps plan selection, and therefore every result bit,
// independent of timing.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int n1, int n2) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(kind, n1, n2);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t nr = static_cast<std::size_t>(n1) * n2;
    const std::size_t nc = static_cast<std::size_t>(n1) * (n2 / 2 + 1);
    double* r = fftw_alloc_real(nr);
    fftw_complex* c = fftw_alloc_complex(nc);
    fftw_plan plan = kind == Kind::kR2C
                         ? fftw_plan_dft_r2c_2d(n1, n2, r, c, FFTW_ESTIMATE)
                         : fftw_plan_dft_c2r_2d(n1, n2, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Kind, int, int>, fftw_plan> plans_;
};

}  // namespace

void r2c(int n1, int n2, const double* in, Complex* out) {
  fftw_plan plan = PlanCache::instance().get(Kind::kR2C, n1, n2);
  fftw_execute_dft_r2c(plan, const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void c2r(int n1, int n2, Complex* in, double* out) {
  fftw_plan plan = PlanCache::instance().get(Kind::kC2R, n1, n2);
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in), out);
}

int good_size(int n) {
  for (int m = n + (n & 1);; m += 2) {
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

}  // namespace gzk::fft
