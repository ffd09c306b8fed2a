#include "oracles.hpp"

#include <cmath>

namespace oracles {

double pvar_bruteforce(int i0, int i1, double p, const std::function<double(int, int)>& F) {
  const int interior = i1 - i0 - 1;
  if (interior < 0) return 0.0;
  if (interior > 20) throw std::invalid_argument("pvar_bruteforce window too large");
  double best = 0.0;
  const std::uint32_t masks = 1u << interior;
  std::vector<int> pts;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    pts.clear();
    pts.push_back(i0);
    for (int b = 0; b < interior; ++b)
      if (mask & (1u << b)) pts.push_back(i0 + 1 + b);
    pts.push_back(i1);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) sum += std::pow(F(pts[k], pts[k + 1]), p);
    if (sum > best) best = sum;
  }
  return std::pow(best, 1.0 / p);
}

rstab::rough::GridPath random_path(int n, int d, std::uint64_t seed, double dt) {
  rstab::GaussianStream gauss(rstab::split_seed(seed, 77));
  Mat vals(d, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < d; ++i) vals(i, k) = gauss();
  return rstab::rough::GridPath::uniform(0.0, dt, std::move(vals));
}

}  // namespace oracles
