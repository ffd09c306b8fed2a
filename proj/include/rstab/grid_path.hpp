#pragma once

#include "rstab/common.hpp"

namespace rstab::rough {

// A vector-valued path sampled on a uniform grid. values is dim x n,
// one column per instant.
struct GridPath {
  std::vector<double> times;
  Mat values;

  GridPath() = default;
  GridPath(std::vector<double> t, Mat v);
  static GridPath uniform(double t0, double dt, Mat v);

  int dim() const { return static_cast<int>(values.rows()); }
  int size() const { return static_cast<int>(values.cols()); }
  double step() const { return times[1] - times[0]; }
  double horizon() const { return times.back() - times.front(); }

  Vec value(int k) const { return values.col(k); }
  Vec increment(int j, int k) const { return values.col(k) - values.col(j); }

  // Grid index of instant t; off-grid instants are a domain error.
  int index_of(double t) const;
};

// GridPath plus level-2 areas anchored at the first instant:
// area0[k] = X_{t_0, t_k}, an m x m matrix, area0[0] = 0.
struct RoughPathGrid {
  GridPath base;
  std::vector<Mat> area0;

  RoughPathGrid() = default;
  RoughPathGrid(GridPath b, std::vector<Mat> a);

  int dim() const { return base.dim(); }
  int size() const { return base.size(); }
  int index_of(double t) const { return base.index_of(t); }

  // Chen reconstruction X_{s,t} = A_t - A_s - x_{0,s} (x) x_{s,t}.
  Mat chen(int i, int j) const;
};

// Controlled path (y, y') on the driver's grid; the remainder
// R^y_{s,t} = y_{s,t} - y'_s x_{s,t} is derived on demand.
struct ControlledPath {
  GridPath path;               // d x n values
  std::vector<Mat> gubinelli;  // n matrices, each d x m

  Mat remainder(const RoughPathGrid& rp, int i, int j) const;
};

// Grids agree in size and instants up to 1e-12 relative (grids produced by
// coarsening versus regeneration can differ by an ulp).
bool same_grid(const GridPath& a, const GridPath& b);

// Piecewise-linear (geometric) lift: per fine step the area increment is
// (1/2) x_inc (x) x_inc, accumulated via Chen into anchored areas.
RoughPathGrid lift_piecewise_linear(const GridPath& path);

// Subsample by stride; anchored areas make this exact (Chen preserved).
RoughPathGrid coarsen(const RoughPathGrid& rp, int stride);

}  // namespace rstab::rough
