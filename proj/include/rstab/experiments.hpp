#pragma once

#include "rstab/models.hpp"
#include "rstab/stability.hpp"

namespace rstab::experiments {

using rough::GridPath;
using rough::RoughPathGrid;

// Closed-form pitchfork flow value at grid index t_idx:
//   y e^{alpha t + sigma B_t} (1 + 2 y^2 int_0^t e^{2(alpha s + sigma B_s)} ds)^{-1/2}
// with the integral by trapezoid on the driver grid.
double pitchfork_exact(double alpha, double sigma, const GridPath& driver, double y0, int t_idx);

struct StationaryPoint {
  double c = 0.0;
  double tail_bound = 0.0;  // e^{-2 alpha T}/(2 alpha) scale of the dropped tail
};

// c(omega) = (2 int_{-T}^0 e^{2 alpha t + 2 sigma B_t} dt)^{-1/2}; b_reflected
// holds B_{-s} for s in [0, T] on its grid. Requires alpha > 0.
StationaryPoint pitchfork_stationary_point(double alpha, double sigma, const GridPath& b_reflected,
                                           double T);

struct PitchforkEnsembleConfig {
  double alpha = 1.0;
  double sigma = 0.05;
  double hurst = 0.45;
  double truncation = 50.0;
  double horizon = 1.0;
  int fine_per_unit = 256;
  int n_members = 200;
  std::uint64_t seed = 1;
  int sign = +1;
  double ball_radius = 4.0;  // bound declaration for the model
};

// Closed-form stationary ensemble at sign * c(omega): per seed, one fBm path
// over [-T, horizon], the stationary trajectory along it, and the driver lift
// re-based to [0, horizon].
stability::StationaryEnsemble pitchfork_ensemble(const PitchforkEnsembleConfig& cfg, int jobs = 0);

struct CounterexampleReport {
  double decay_rate_eta = 0.0;     // fitted decay rate of ||y||^2 at this sigma
  double track_rel_err_t1 = 0.0;   // worst relative gap to the logistic at t = 1
  std::vector<std::pair<double, double>> sweep;  // (sigma, eta decay rate)
  double threshold_estimate = 0.0;  // first sweep sigma with no decay
};

// Ito-enhanced simulation of the intro example against the logistic ODE
// eta' = eta (2 mu + sigma^2 - 2 eta).
CounterexampleReport run_counterexample(double mu, double sigma, double delta, int n_paths,
                                        std::uint64_t seed, int jobs = 0);

// Closed-form logistic solution of that ODE.
double logistic_eta(double mu, double sigma, double eta0, double t);

struct FhnFixedPoint {
  Vec point;          // (v*, w*)
  double residual = 0.0;
  bool unique = false;  // cubic discriminant certificate
};
FhnFixedPoint fhn_fixed_point(const models::FhnParams& prm = {});

struct FhnLevelResult {
  double scale = 0.0;
  double cg = 0.0;
  stability::StabilityReport report;   // transformed-frame continuous criterion
  double distance = 0.0;               // sup_members ||a(end) - a*||
  double decay_fraction = 0.0;         // share of perturbed runs with mu_hat > 0
};

struct FhnSweepReport {
  FhnFixedPoint fixed_point;
  double ell_raw = 0.0;
  double ell_transformed = 0.0;
  std::vector<FhnLevelResult> levels;
  double spearman = 0.0;    // distance vs scale rank correlation
  int first_passing = -1;   // smallest level index with verdict pass
};

struct FhnSweepConfig {
  models::FhnParams params;
  std::vector<double> scales = {1e-7, 3e-7, 1e-6, 3e-6, 1e-5, 3e-5};
  double hurst = 0.45;
  int fine_per_unit = 128;
  double t_burn = 240.0;
  int members = 32;
  int en_paths = 100;
  int decay_paths = 16;
  double lambda = 2e-5;
  std::uint64_t seed = 7;
};
FhnSweepReport run_fhn(const FhnSweepConfig& cfg, int jobs = 0);

double spearman_rank(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace rstab::experiments
