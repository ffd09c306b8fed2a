#pragma once

#include "rstab/noise.hpp"
#include "rstab/schemes.hpp"
#include "rstab/stopping.hpp"

#include <map>

namespace rstab::stability {

using fields::CriterionParams;
using fields::SystemModel;
using rough::GridPath;
using rough::RoughPathGrid;

struct EnsembleMember {
  std::uint64_t seed = 0;
  Vec a0;
  GridPath traj;          // a(theta_t omega) on the member's grid
  RoughPathGrid driver;   // lift over the same span
};

enum class Provenance { closed_form, burn_in };

struct StationaryEnsemble {
  std::vector<EnsembleMember> members;
  Provenance provenance = Provenance::closed_form;
  double moment_rho = 0.0;  // sample mean of ||a||^rho
};

// Largest one-step residual of the generating equation (the scheme update on
// each member's grid) relative to 1 + ||a||.
double ensemble_residual(const StationaryEnsemble& ens, const SystemModel& model);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct DecayFit {
  double mu = 0.0;
  double lo = 0.0, hi = 0.0;  // 95% band
  int n_used = 0;
  bool ok = false;  // false: separation underflow before 10 points
};

// Least-squares slope of log||y_t - a_t|| on the initial stretch where the
// separation stays above 100 machine epsilons; mu = -slope.
DecayFit fit_decay(const GridPath& y, const GridPath& a);

struct StabilityReport {
  std::string criterion;
  Verdict verdict = Verdict::inconclusive;
  double lhs = 0.0, rhs = 0.0;
  double lhs_se = 0.0, rhs_se = 0.0;
  std::string frame = "raw";
  std::map<std::string, double> inputs;  // lambda, gamma*, C_p, C_g/L_g, delta, ...
  std::map<std::string, double> extras;  // necscri/pointCg sides, ergodicity gap, ...
  // fitted decay rate with its 95% band, when a decay study backs the report
  double mu_hat = std::numeric_limits<double>::quiet_NaN();
  double mu_lo = 0.0, mu_hi = 0.0;
  std::string note;

  double margin() const { return lhs - rhs; }
  double noise() const { return 2.0 * std::hypot(lhs_se, rhs_se); }
};

Verdict two_sigma_verdict(double lhs, double rhs, double lhs_se, double rhs_se);

// Largest r in (0, r_max] whose r-dependent left side -E kappa(lambda, a, r)
// still clears the given right side, found by bisection; 0 when no radius
// passes. kappa(., ., r) is non-decreasing in r so the crossing is unique.
double select_r0(const SystemModel& model, const CriterionParams& params,
                 const StationaryEnsemble& ensemble, double rhs, double r_max = 1.0,
                 int iters = 18, int ball_samples = 512);

// Continuous exponential-stability criterion at a stationary ensemble:
//   -E[kappa(lambda, a, 0)] > 4 lambda E N*(lambda/(C_p C_g), x, [0,1]).
// Also reports the necessary condition and, when C_g < 1/8, the lambda := C_g
// specialization. en_paths seeds drive the Monte Carlo expectations.
StabilityReport criterion_continuous(const SystemModel& model, const CriterionParams& params,
                                     const StationaryEnsemble& ensemble,
                                     const noise::NoiseSpec& noise_spec, int en_paths,
                                     bool with_extras = true, int jobs = 0);

// Scans lambda over a grid in (0, 1/8) and returns the report with the best
// normalized margin (lambda is only quantified existentially).
StabilityReport criterion_continuous_best_lambda(const SystemModel& model, CriterionParams params,
                                                 const StationaryEnsemble& ensemble,
                                                 const noise::NoiseSpec& noise_spec, int en_paths,
                                                 const std::vector<double>& lambda_grid,
                                                 int jobs = 0);

struct DiscreteCriterionResult {
  StabilityReport cond;      // eta > 0, Eq-style drift condition
  StabilityReport criterion; // eta > K L_g gamma* [E N* + 2 E N*_S]
  int hnew_windows = 0;
  int hnew_hypothesis_windows = 0;
  int hnew_violations = 0;
  StationaryEnsemble ensemble;  // burn-in ensemble on [0,1] (coarse grid)
};

// Full discrete pipeline: per path, burn-in stationary candidate, both
// expectations, constant K, and pathwise hnew audits on the stopping windows.
DiscreteCriterionResult criterion_discrete(const SystemModel& model, const CriterionParams& params,
                                           const noise::NoiseSpec& noise_spec, double delta,
                                           int n_paths, double t_burn, const Vec& start_a,
                                           const Vec& start_b, int jobs = 0);

// eta > K Gamma_bar L_g [1 + E |||x|||^{p(p+2)}_{p-var,[0,1]}].
StabilityReport criterion_discrete_dissipative(const SystemModel& model,
                                               const CriterionParams& params,
                                               const noise::NoiseSpec& noise_spec, double delta,
                                               double gamma_bar, double eta, double eta_se,
                                               int n_paths, int jobs = 0);

// R(omega) = r inf_n inf_{t in [tau_n, tau_{n+1}]}
//              exp{-4 lambda (n+1) - int_0^t kappa(lambda, a_s, r) ds},
// stopping times at gamma = lambda/(C_p C_g), truncated at the horizon.
struct RadiusResult {
  double radius = 0.0;
  int attained_n = 0;
};
RadiusResult radius_R(const SystemModel& model, const CriterionParams& params,
                      const RoughPathGrid& rp, const GridPath& a_traj, int horizon_idx,
                      int kappa_samples = 256);

// R = Gamma + Gamma sum_{k=0}^{k_max} e^{-D2 k/8} (1 + |||theta_{-k} x|||^{p(p+2)}_{[-1,2]}),
// evaluated on a path sampled over [-(k_max+1), 2] (supplied re-based to 0).
struct AttractorRadius {
  double value = 0.0;
  double tail_bound = 0.0;
  double max_term = 0.0;  // largest (1 + norm^{p(p+2)}) term encountered
};
AttractorRadius attractor_radius(const RoughPathGrid& rp_long, double p, double gamma_const,
                                 double d2, int k_max);

}  // namespace rstab::stability
