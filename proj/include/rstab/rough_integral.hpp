#pragma once

#include "rstab/variation.hpp"

namespace rstab::rough {

// Compensated Darboux sum over the fine grid:
//   int_{[i0,i1]} y (x) dx  ~=  sum_k ( y_k (x) x_{k,k+1} + y'_k X_{k,k+1} ),
// a d x m matrix (for scalar-like uses take d = 1 rows).
Mat rough_integral(const ControlledPath& ctrl, const RoughPathGrid& rp, int i0, int i1);

// Local error proxy for the sewing bound: lhs is
// ||int - y_s (x) x_{s,t} - y'_s X_{s,t}|| over [i0,i1]; rhs is
// C_p ( |||x|||_{p-var} |||R^y|||_{q-var} + |||y'|||_{p-var} |||X|||_{q-var} ).
struct SewingGap {
  double lhs = 0.0;
  double rhs = 0.0;
};
SewingGap sewing_gap(const ControlledPath& ctrl, const RoughPathGrid& rp, double p, double cp,
                     int i0, int i1);

}  // namespace rstab::rough
