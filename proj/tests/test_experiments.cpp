#include <doctest.h>

#include "rstab/experiments.hpp"

using namespace rstab;
using namespace rstab::experiments;

TEST_SUITE_BEGIN("experiments");

TEST_CASE("pitchfork_exact: zero start stays zero; deterministic case matches an ODE solver") {
  Mat flat = Mat::Zero(1, 257);
  auto driver = rough::GridPath::uniform(0.0, 1.0 / 256.0, flat);
  CHECK(pitchfork_exact(1.0, 0.3, driver, 0.0, 256) == 0.0);

  // sigma = 0, alpha = -1: compare with RK4 on y' = -y - y^3
  double alpha = -1.0;
  double y = 0.8;
  auto f = [alpha](double v) { return alpha * v - v * v * v; };
  double h = 1.0 / 4096.0;
  for (int k = 0; k < 4096; ++k) {
    double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  Mat flat2 = Mat::Zero(1, 4097);
  auto d2 = rough::GridPath::uniform(0.0, 1.0 / 4096.0, flat2);
  CHECK(pitchfork_exact(alpha, 0.0, d2, 0.8, 4096) == doctest::Approx(y).epsilon(1e-6));
}

TEST_CASE("pitchfork stationary point: deterministic limit and the moment identity") {
  // sigma = 0: c = sqrt(alpha) exactly (up to quadrature)
  Mat flat = Mat::Zero(1, 12801);
  auto refl = rough::GridPath::uniform(0.0, 50.0 / 12800.0, flat);
  auto sp = pitchfork_stationary_point(2.0, 0.0, refl, 50.0);
  CHECK(sp.c == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(sp.tail_bound <= std::exp(-2.0 * 2.0 * 50.0) / (2.0 * 2.0) * (1 + 1e-12));

  // E c^2 = alpha at desk scale (small Monte Carlo here; acceptance runs 2000)
  double alpha = 1.0, sigma = 0.1;
  std::vector<double> c2;
  for (int i = 0; i < 200; ++i) {
    noise::NoiseSpec spec;
    spec.hurst = 0.45;
    spec.horizon = 50.0;
    spec.fine_steps = 50 * 64;
    spec.seed = split_seed(12000, i);
    auto path = noise::sample_fbm(spec);
    auto s = pitchfork_stationary_point(alpha, sigma, path, 50.0);
    c2.push_back(s.c * s.c);
  }
  auto ms = mean_stderr(c2);
  CHECK(std::abs(ms.mean - alpha) <= std::max(3.0 * ms.stderr_, 0.05));
}

TEST_CASE("pitchfork ensemble members are trajectories of the equation") {
  PitchforkEnsembleConfig cfg;
  cfg.sigma = 0.05;
  cfg.n_members = 8;
  cfg.fine_per_unit = 256;
  cfg.truncation = 25.0;
  cfg.seed = 31;
  auto ens = pitchfork_ensemble(cfg, 2);
  CHECK(ens.members.size() == 8);
  for (const auto& mem : ens.members) {
    CHECK(mem.traj.value(0)(0) > 0.0);  // +c branch
    CHECK(mem.driver.base.value(0).norm() == 0.0);
  }
  // stationarity residual: the trajectory solves the equation at mesh scale
  auto model = models::pitchfork(cfg.alpha, cfg.sigma, 2.0);
  CHECK(stability::ensemble_residual(ens, model) <= 0.02);
  // moment E c^2 should hover near alpha
  double mean_sq = 0.0;
  for (const auto& mem : ens.members) mean_sq += mem.a0(0) * mem.a0(0);
  mean_sq /= 8.0;
  CHECK(mean_sq == doctest::Approx(cfg.alpha).epsilon(0.25));
}

TEST_CASE("counterexample: deterministic decay, noisy fixed point, tracking, threshold") {
  // sigma = 0, mu = -1: ||y||^2 decays at rate 2|mu| = 2
  auto rep0 = run_counterexample(-1.0, 0.0, 1.0 / 1024.0, 2, 55, 2);
  CHECK(rep0.decay_rate_eta == doctest::Approx(2.0).epsilon(0.1));

  // sigma = 2: eta tends to (2 mu + sigma^2)/2 = 1, tracks the logistic curve
  auto rep2 = run_counterexample(-1.0, 2.0, 1.0 / 1024.0, 4, 56, 2);
  CHECK(rep2.track_rel_err_t1 <= 0.05);
  CHECK(rep2.decay_rate_eta <= 0.1);  // no decay to zero
  CHECK(logistic_eta(-1.0, 2.0, 0.25, 50.0) == doctest::Approx(1.0).epsilon(1e-9));

  // threshold crossing reported near sigma = sqrt(2)
  CHECK(rep2.threshold_estimate >= 1.0);
  CHECK(rep2.threshold_estimate <= 2.0);
}

TEST_CASE("FHN fixed point: Newton certificate against the cubic oracle") {
  auto fp = fhn_fixed_point();
  CHECK(fp.residual <= 1e-12);
  CHECK(fp.unique);
  // independent oracle: bisection on v^3 + v + 2.005
  auto cubic = [](double v) { return v * v * v + v + 2.005; };
  double lo = -1.1, hi = -0.9;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (cubic(mid) > 0 ? hi : lo) = mid;
  }
  CHECK(fp.point(0) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
  CHECK(fp.point(1) == doctest::Approx((0.5 * (lo + hi) + 0.7) / 0.75).epsilon(1e-10));
}

TEST_CASE("spearman rank helper") {
  CHECK(spearman_rank({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman_rank({1, 2, 3, 4}, {40, 30, 20, 10}) == doctest::Approx(-1.0));
  CHECK(std::abs(spearman_rank({1, 2, 3, 4, 5, 6}, {2, 1, 4, 3, 6, 5})) < 1.0);
}

TEST_SUITE_END();
