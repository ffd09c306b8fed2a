#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// SplitMix64; used to derive independent sub-seeds (per path, per component).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic standard normal stream. Box-Muller on top of xoshiro-style
// SplitMix64 output keeps results independent of the standard library's
// normal_distribution internals.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : state_(seed ? seed : 1) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double next_unit() {
    // (0,1]; never returns 0 so log() is safe
    std::uint64_t z = next();
    return (static_cast<double>(z >> 11) + 1.0) * 0x1.0p-53;
  }
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Runs body(i) for i in [0,n); work is chunked by index so any reduction
// indexed by i is deterministic regardless of the worker count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

inline int default_jobs() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

}  // namespace rstab
