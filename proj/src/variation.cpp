#include "rstab/variation.hpp"

#include <cmath>

namespace rstab::rough {

double pvar_norm(const GridPath& path, double p, int i0, int i1) {
  if (p < 1.0) throw std::domain_error("p-variation requires p >= 1");
  if (i0 < 0 || i1 >= path.size() || i0 > i1) throw std::domain_error("pvar window off grid");
  return var_dp(i0, i1, p, [&](int j, int k) { return path.increment(j, k).norm(); });
}

double pvar_norm(const GridPath& path, double p, double s, double t) {
  return pvar_norm(path, p, path.index_of(s), path.index_of(t));
}

double qvar_area_norm(const RoughPathGrid& rp, double q, int i0, int i1) {
  if (q < 1.0) throw std::domain_error("q-variation requires q >= 1");
  if (i0 < 0 || i1 >= rp.size() || i0 > i1) throw std::domain_error("qvar window off grid");
  return var_dp(i0, i1, q, [&](int j, int k) { return rp.chen(j, k).norm(); });
}

double qvar_area_norm(const RoughPathGrid& rp, double q, double s, double t) {
  return qvar_area_norm(rp, q, rp.index_of(s), rp.index_of(t));
}

double rough_norm(const RoughPathGrid& rp, double p, int i0, int i1) {
  if (!(p > 2.0 && p < 3.0)) throw std::domain_error("rough norm requires p in (2,3)");
  double vp = std::pow(pvar_norm(rp.base, p, i0, i1), p);
  double wq = std::pow(qvar_area_norm(rp, p / 2.0, i0, i1), p / 2.0);
  return std::pow(vp + wq, 1.0 / p);
}

double rough_norm(const RoughPathGrid& rp, double p, double s, double t) {
  return rough_norm(rp, p, rp.index_of(s), rp.index_of(t));
}

RoughNormScanner::RoughNormScanner(const RoughPathGrid& rp, double p, int anchor)
    : rp_(rp), p_(p), q_(p / 2.0), anchor_(anchor) {
  if (!(p > 2.0 && p < 3.0)) throw std::domain_error("rough norm requires p in (2,3)");
  if (anchor < 0 || anchor >= rp.size()) throw std::domain_error("anchor off grid");
  vp_.push_back(0.0);
  wq_.push_back(0.0);
}

void RoughNormScanner::extend_to(int k) {
  if (k >= rp_.size()) throw std::domain_error("scan extends past grid end");
  while (end() < k) {
    int t = end() + 1;
    double best_v = 0.0, best_w = 0.0;
    for (int j = anchor_; j < t; ++j) {
      double v = vp_[static_cast<std::size_t>(j - anchor_)] +
                 std::pow(rp_.base.increment(j, t).norm(), p_);
      if (v > best_v) best_v = v;
      double w = wq_[static_cast<std::size_t>(j - anchor_)] + std::pow(rp_.chen(j, t).norm(), q_);
      if (w > best_w) best_w = w;
    }
    vp_.push_back(best_v);
    wq_.push_back(best_w);
  }
}

}  // namespace rstab::rough
