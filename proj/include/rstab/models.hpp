#pragma once

#include "rstab/fields.hpp"

namespace rstab::models {

using fields::SystemModel;

// dy = (alpha y - y^3) dt + sigma y dB^H, scalar. Bounds and L_f are taken
// over B(0, ball_radius).
SystemModel pitchfork(double alpha, double sigma, double ball_radius = 4.0);

// d(y1,y2) = y (mu - ||y||^2) dt + sigma J y dB with J the quarter rotation;
// the intro counter-example (Ito convention chooses the lift, not the model).
SystemModel counterexample(double mu, double sigma, double ball_radius = 4.0);

// FitzHugh-Nagumo drift with a componentwise saturated diffusion
//   g(y) = scale * diag(tanh(v - v_off), tanh(w - w_off)),
// offsets default to fixed-point-centred +1 so the noise does not vanish on
// the attractor. Bounds are analytic and global.
struct FhnParams {
  double I = 0.265;
  double mu = 0.75;
  double J = 0.7;
  double eps = 0.08;
};
SystemModel fhn(const FhnParams& prm, double diffusion_scale, double v_off = 0.0,
                double w_off = 0.0);

// Linear drift f = A y with constant diffusion matrix G.
SystemModel linear(const Mat& A, const Mat& G);

// Polynomial drift for config files: component i is
// sum_k coef_k * prod_j y_j^{e_kj}. Diffusion: constant matrix, linear
// diagonal (sigma_i y_i), or scaled tanh diagonal.
struct PolyTerm {
  double coef = 0.0;
  std::vector<int> exponents;
};
SystemModel polynomial(int dim, const std::vector<std::vector<PolyTerm>>& components,
                       const Mat& diffusion_constant, double ball_radius);

}  // namespace rstab::models
