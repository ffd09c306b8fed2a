#include "rstab/grid_path.hpp"

#include <cmath>

namespace rstab::rough {

namespace {

void validate_grid(const std::vector<double>& times, const Mat& values) {
  if (times.size() < 2) throw std::invalid_argument("grid needs at least 2 instants");
  if (static_cast<std::size_t>(values.cols()) != times.size())
    throw std::invalid_argument("values/times length mismatch");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw std::invalid_argument("grid instants must be strictly increasing");
  for (std::size_t k = 1; k < times.size(); ++k) {
    double dk = times[k] - times[k - 1];
    if (!(dk > 0.0)) throw std::invalid_argument("grid instants must be strictly increasing");
    if (std::abs(dk - dt) > 1e-12 * std::max(std::abs(dk), std::abs(dt)) + 1e-300)
      throw std::invalid_argument("grid step must be uniform (1e-12 relative)");
  }
}

}  // namespace

GridPath::GridPath(std::vector<double> t, Mat v) : times(std::move(t)), values(std::move(v)) {
  validate_grid(times, values);
}

GridPath GridPath::uniform(double t0, double dt, Mat v) {
  std::vector<double> t(static_cast<std::size_t>(v.cols()));
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = t0 + dt * static_cast<double>(k);
  return GridPath(std::move(t), std::move(v));
}

int GridPath::index_of(double t) const {
  const double dt = step();
  double rel = (t - times.front()) / dt;
  int k = static_cast<int>(std::lround(rel));
  if (k < 0 || k >= size() || std::abs(times.front() + dt * k - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw std::domain_error("instant is not on the grid");
  return k;
}

RoughPathGrid::RoughPathGrid(GridPath b, std::vector<Mat> a) : base(std::move(b)), area0(std::move(a)) {
  if (area0.size() != static_cast<std::size_t>(base.size()))
    throw std::invalid_argument("area sequence length mismatch");
  const int m = base.dim();
  if (area0.front().rows() != m || area0.front().cols() != m)
    throw std::invalid_argument("area dimension mismatch");
  if (area0.front().norm() != 0.0) throw std::invalid_argument("anchored area at t_0 must be zero");
}

Mat RoughPathGrid::chen(int i, int j) const {
  if (i > j) throw std::domain_error("chen: s > t");
  if (i == j) return Mat::Zero(dim(), dim());
  return area0[j] - area0[i] - base.increment(0, i) * base.increment(i, j).transpose();
}

Mat ControlledPath::remainder(const RoughPathGrid& rp, int i, int j) const {
  return path.increment(i, j) - gubinelli[static_cast<std::size_t>(i)] * rp.base.increment(i, j);
}

bool same_grid(const GridPath& a, const GridPath& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    double ta = a.times[k], tb = b.times[k];
    if (std::abs(ta - tb) > 1e-12 * std::max({1.0, std::abs(ta), std::abs(tb)})) return false;
  }
  return true;
}

RoughPathGrid lift_piecewise_linear(const GridPath& path) {
  const int m = path.dim();
  const int n = path.size();
  std::vector<Mat> areas(static_cast<std::size_t>(n));
  areas[0] = Mat::Zero(m, m);
  for (int k = 0; k + 1 < n; ++k) {
    Vec inc = path.increment(k, k + 1);
    // A_{k+1} = A_k + x_{0,k} (x) x_{k,k+1} + (1/2) x_{k,k+1} (x) x_{k,k+1}
    areas[k + 1] = areas[k] + path.increment(0, k) * inc.transpose() + 0.5 * inc * inc.transpose();
  }
  return RoughPathGrid(path, std::move(areas));
}

RoughPathGrid coarsen(const RoughPathGrid& rp, int stride) {
  if (stride <= 0) throw std::domain_error("stride must be positive");
  const int steps = rp.size() - 1;
  if (steps % stride != 0) throw std::domain_error("stride must divide the number of fine steps");
  const int nc = steps / stride + 1;
  Mat vals(rp.dim(), nc);
  std::vector<double> times(static_cast<std::size_t>(nc));
  std::vector<Mat> areas(static_cast<std::size_t>(nc));
  for (int k = 0; k < nc; ++k) {
    int src = k * stride;
    vals.col(k) = rp.base.values.col(src);
    times[static_cast<std::size_t>(k)] = rp.base.times[static_cast<std::size_t>(src)];
    areas[static_cast<std::size_t>(k)] = rp.area0[static_cast<std::size_t>(src)];
  }
  return RoughPathGrid(GridPath(std::move(times), std::move(vals)), std::move(areas));
}

}  // namespace rstab::rough
