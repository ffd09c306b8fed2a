#pragma once

#include "rstab/grid_path.hpp"

namespace rstab::noise {

using rough::GridPath;
using rough::RoughPathGrid;

enum class NoiseKind { fbm, bm_ito, bm_strat };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::fbm;
  double hurst = 0.45;  // ignored for bm kinds
  int dim = 1;
  double horizon = 1.0;
  int fine_steps = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

// m independent scalar fBm components with covariance
// (1/2)(s^{2H} + t^{2H} - |t-s|^{2H}), B_0 = 0. Davies-Harte circulant
// embedding (O(n log n)); falls back to a Cholesky factorization of the fGn
// covariance when the embedding is not nonnegative-definite.
GridPath sample_fbm(const NoiseSpec& spec);

// Any spec kind; bm kinds sample H = 1/2.
GridPath sample_path(const NoiseSpec& spec);

enum class BmConvention { ito, strat };

// strat: piecewise-linear (geometric) lift. ito: per-step area increment
// (1/2)(x_inc (x) x_inc - dt Id), aggregated by Chen.
RoughPathGrid enhance_bm(const GridPath& path, BmConvention convention);

// Lift matching the NoiseSpec kind (fbm and bm_strat geometric, bm_ito Ito).
RoughPathGrid sample_lift(const NoiseSpec& spec);

// Shifted, re-based lift on [0, T-h]; h must be a grid instant.
RoughPathGrid wiener_shift(const RoughPathGrid& rp, double h);
RoughPathGrid wiener_shift_index(const RoughPathGrid& rp, int shift);

}  // namespace rstab::noise
