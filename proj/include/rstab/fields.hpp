#pragma once

#include "rstab/common.hpp"

namespace rstab::fields {

// Sup-norm data for the diffusion g and its first three derivatives
// (Frobenius norms), either globally or over a declared ball.
struct DiffusionBounds {
  double g_inf = 0.0;
  double dg_inf = 0.0;
  double d2g_inf = 0.0;
  double d3g_inf = 0.0;
  bool declared = true;      // false when filled in by numerical probing
  double ball_radius = 0.0;  // 0 => global
  Vec ball_center;

  void require() const {
    if (!(g_inf >= 0 && dg_inf >= 0 && d2g_inf >= 0 && d3g_inf >= 0))
      throw std::invalid_argument("diffusion bounds missing or negative");
  }
};

struct SystemModel {
  std::string name;
  int dim = 1;
  int noise_dim = 1;

  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> jac;  // Df, d x d; finite differences if absent
  std::function<Mat(const Vec&)> g;    // d x m
  // directional derivative (d/de) g(y + e v), d x m; finite differences if absent
  std::function<Mat(const Vec&, const Vec&)> dg;

  DiffusionBounds bounds;
  double growth_cf = 1.0;  // (C_f, rho): ||f||, ||Df|| <= C_f (1 + ||y||^rho)
  double growth_rho = 1.0;
  double lipschitz_f = std::numeric_limits<double>::infinity();  // L_f when finite

  Mat jacobian(const Vec& y) const;
  Mat dg_dir(const Vec& y, const Vec& v) const;
  // Milstein contraction sum_{i,j} X(i,j) Dg_j(y)[g_i(y)], a d-vector.
  Vec milstein_term(const Vec& y, const Mat& X) const;
};

// Relative mismatch between jac and finite differences of f, maximized over
// `points` deterministic samples in B(center, radius).
double certify_jacobian(const SystemModel& model, const Vec& center, double radius, int points);

// l(f, y-hat) = lambda_max of (Df + Df^T)/2
double ell(const SystemModel& model, const Vec& y_hat);

// osc(Df(y))_r = sup_{||h|| <= r} ||Df(y+h) - Df(y)||, estimated by
// low-discrepancy ball sampling (an under-estimate; includes the 2d axis
// points at exact radius r). samples <= 0 selects 4096*d.
double osc_Df(const SystemModel& model, const Vec& y_hat, double r, int samples = 0);

// sup of ||Df|| (Frobenius) over B(y, r), sampled as osc_Df.
double df_ball_sup(const SystemModel& model, const Vec& y_hat, double r, int samples = 0);

// M(Df, y, r) = l(f, y) + osc(Df(y))_r
double M_bound(const SystemModel& model, const Vec& y_hat, double r, int samples = 0);

// kappa(lambda, y, r) = M(Df,y,r) + 256 lambda ||f(y)|| + 64 lambda ||Df||_{inf,B(y,r)}
double kappa(const SystemModel& model, double lambda, const Vec& y, double r, int samples = 0);

// C_g: the six-term max over {||Dg||, sqrt(||Dg|| ||g||), sqrt(||D2g|| ||g||),
// sqrt(||D3g|| ||g||), (||D2g|| ||g||^2)^{1/3}, (||D3g|| ||g||^2)^{1/3}}.
double Cg_constant(const DiffusionBounds& b);

// L_g: max{||Dg||, ||D2g||, [||g|| (||Dg|| v ||D2g|| v ||D3g||)]^{1/2},
//          (||g||^2 ||D3g||)^{1/3}}
double Lg_constant(const DiffusionBounds& b);
// Fixed-point reduction max{||Dg||, (||g|| ||D2g||)^{1/2}}
double Lg_reduced(const DiffusionBounds& b);

// C*_g(eps0) with ball-restricted bounds (same six-term max; bounds must be
// declared over B(0, eps0)).
double Cg_star_local(const SystemModel& model, double eps0);

// Numerically probed sup norms of g, Dg, D2g, D3g over B(center, radius);
// marked as not declared. Derivatives use nested central differences.
DiffusionBounds probe_bounds(const SystemModel& model, const Vec& center, double radius,
                             int samples = 0);

// Default sewing constant (1 - 2^{1 - 3/p})^{-1}, p in (2,3).
double sewing_constant(double p);

struct CriterionParams {
  double p = 2.5;
  double lambda = 0.05;
  double gamma_star = 0.5;
  double r = 0.25;
  double r0 = 0.0;
  double cp_override = 0.0;  // 0 => sewing_constant(p)
  double eps = 0.0;

  double cp() const { return cp_override > 0.0 ? cp_override : sewing_constant(p); }
  void validate_continuous() const;
  void validate_discrete() const;
};

struct CoordinateChange {
  Mat P;     // z = P y
  Mat Pinv;
  Mat Q;     // Lyapunov solution Df^T Q + Q Df = -Id at y_hat
  SystemModel transformed;
};

// Requires all eigenvalues of Df(y_hat) in the open left half-plane; returns
// P = Q^{1/2} and the conjugated model, whose symmetrized Jacobian at y_hat
// is negative definite.
CoordinateChange optimal_coordinate_change(const SystemModel& model, const Vec& y_hat);

// Deterministic low-discrepancy points filling B(center, r); includes the 2d
// axis extremes. Shared by the sampling estimators and tests.
std::vector<Vec> ball_points(const Vec& center, double r, int count, std::uint64_t salt = 0);

}  // namespace rstab::fields
