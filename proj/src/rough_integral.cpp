#include "rstab/rough_integral.hpp"

namespace rstab::rough {

Mat rough_integral(const ControlledPath& ctrl, const RoughPathGrid& rp, int i0, int i1) {
  if (!same_grid(ctrl.path, rp.base))
    throw std::domain_error("controlled path and driver grids differ");
  if (i0 < 0 || i1 >= rp.size() || i0 > i1) throw std::domain_error("integral window off grid");
  const int d = ctrl.path.dim();
  const int m = rp.dim();
  Mat acc = Mat::Zero(d, m);
  for (int k = i0; k < i1; ++k) {
    acc += ctrl.path.value(k) * rp.base.increment(k, k + 1).transpose() +
           ctrl.gubinelli[static_cast<std::size_t>(k)] * rp.chen(k, k + 1);
  }
  return acc;
}

SewingGap sewing_gap(const ControlledPath& ctrl, const RoughPathGrid& rp, double p, double cp,
                     int i0, int i1) {
  const double q = p / 2.0;
  SewingGap gap;
  Mat integral = rough_integral(ctrl, rp, i0, i1);
  Mat germ = ctrl.path.value(i0) * rp.base.increment(i0, i1).transpose() +
             ctrl.gubinelli[static_cast<std::size_t>(i0)] * rp.chen(i0, i1);
  gap.lhs = (integral - germ).norm();
  double rx = pvar_norm(rp.base, p, i0, i1);
  double ry = var_dp(i0, i1, q, [&](int j, int k) { return ctrl.remainder(rp, j, k).norm(); });
  double gy = var_dp(i0, i1, p, [&](int j, int k) {
    return (ctrl.gubinelli[static_cast<std::size_t>(k)] - ctrl.gubinelli[static_cast<std::size_t>(j)]).norm();
  });
  double xq = qvar_area_norm(rp, q, i0, i1);
  gap.rhs = cp * (rx * ry + gy * xq);
  return gap;
}

}  // namespace rstab::rough
