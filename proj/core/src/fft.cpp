#include "lantern/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace lantern {

namespace {

// Planning is not thread-safe in FFTW; execution with the new-array
// interface is. Plans live for the process lifetime.
class PlanCache {
 public:
  fftw_plan get(int nx, int ny, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(nx, ny, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch(static_cast<std::size_t>(nx) * ny);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    // FFTW takes dimensions slowest-first: rows are y, columns x.
    fftw_plan plan = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

template <typename Out, typename In>
Out transform(const In& in, int sign) {
  const Shape& s = in.shape();
  Out out(s, std::vector<Complex>(in.values().begin(), in.values().end()));
  fftw_plan plan = plan_cache().get(s.nx, s.ny, sign);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.frame_size()));
  for (int t = 0; t < s.nt; ++t) {
    auto frame = out.frame(t);
    auto* buf = reinterpret_cast<fftw_complex*>(frame.data());
    fftw_execute_dft(plan, buf, buf);
    for (auto& z : frame) z *= scale;
  }
  return out;
}

}  // namespace

KSpaceData fft_frames(const DynamicImage& x) { return transform<KSpaceData>(x, FFTW_FORWARD); }

DynamicImage ifft_frames(const KSpaceData& k) { return transform<DynamicImage>(k, FFTW_BACKWARD); }

}  // namespace lantern
