#pragma once

#include "rstab/grid_path.hpp"

namespace rstab::rough {

// sup over partitions of [i0,i1] of (sum ||F(u_k,u_{k+1})||^p)^(1/p), computed
// exactly by the O(n^2) dynamic program V[k] = max_j (V[j] + F(j,k)^p).
// F(j,k) must be the norm of the two-parameter increment for j < k.
template <typename IncrFn>
double var_dp(int i0, int i1, double p, IncrFn&& F) {
  if (i1 < i0) throw std::domain_error("var_dp: window end precedes start");
  if (i1 == i0) return 0.0;
  const int n = i1 - i0 + 1;
  std::vector<double> V(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k < n; ++k) {
    double best = 0.0;
    for (int j = 0; j < k; ++j) {
      double inc = F(i0 + j, i0 + k);
      double cand = V[j] + std::pow(inc, p);
      if (cand > best) best = cand;
    }
    V[k] = best;
  }
  return std::pow(V[n - 1], 1.0 / p);
}

double pvar_norm(const GridPath& path, double p, int i0, int i1);
double pvar_norm(const GridPath& path, double p, double s, double t);

double qvar_area_norm(const RoughPathGrid& rp, double q, int i0, int i1);
double qvar_area_norm(const RoughPathGrid& rp, double q, double s, double t);

// |||x|||_{p-var} = (|||x|||^p_{p-var} + |||X|||^q_{q-var})^{1/p}, q = p/2.
// Requires p in (2,3).
double rough_norm(const RoughPathGrid& rp, double p, int i0, int i1);
double rough_norm(const RoughPathGrid& rp, double p, double s, double t);

// Incremental DP from a fixed left anchor: extending the window one grid
// point at a time costs O(window) per point, so a greedy stopping-time pass
// over [i0,i1] amortizes to O(n^2).
class RoughNormScanner {
 public:
  RoughNormScanner(const RoughPathGrid& rp, double p, int anchor);

  // Extends the scanned window to grid index k (k >= current end).
  void extend_to(int k);
  int end() const { return anchor_ + static_cast<int>(vp_.size()) - 1; }
  int anchor() const { return anchor_; }

  double path_power() const { return vp_.back(); }   // |||x|||^p
  double area_power() const { return wq_.back(); }   // |||X|||^q
  double rough() const { return std::pow(vp_.back() + wq_.back(), 1.0 / p_); }

 private:
  const RoughPathGrid& rp_;
  double p_, q_;
  int anchor_;
  std::vector<double> vp_, wq_;
};

}  // namespace rstab::rough
