#include "rstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rstab::experiments {

double pitchfork_exact(double alpha, double sigma, const GridPath& driver, double y0, int t_idx) {
  if (y0 == 0.0) return 0.0;
  const double dt = driver.step();
  double integral = 0.0;
  double prev = std::exp(2.0 * (alpha * 0.0 + sigma * driver.values(0, 0)));
  for (int k = 1; k <= t_idx; ++k) {
    double s = driver.times[static_cast<std::size_t>(k)] - driver.times.front();
    double cur = std::exp(2.0 * (alpha * s + sigma * driver.values(0, k)));
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
  }
  double t = driver.times[static_cast<std::size_t>(t_idx)] - driver.times.front();
  double growth = std::exp(alpha * t + sigma * driver.values(0, t_idx));
  return y0 * growth / std::sqrt(1.0 + 2.0 * y0 * y0 * integral);
}

StationaryPoint pitchfork_stationary_point(double alpha, double sigma, const GridPath& b_reflected,
                                           double T) {
  if (!(alpha > 0.0)) throw std::domain_error("stationary points +-c need alpha > 0");
  const double dt = b_reflected.step();
  const int last = b_reflected.index_of(b_reflected.times.front() + T);
  double integral = 0.0;
  double prev = std::exp(2.0 * sigma * b_reflected.values(0, 0));
  for (int k = 1; k <= last; ++k) {
    double s = b_reflected.times[static_cast<std::size_t>(k)] - b_reflected.times.front();
    double cur = std::exp(-2.0 * alpha * s + 2.0 * sigma * b_reflected.values(0, k));
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
  }
  StationaryPoint out;
  out.c = 1.0 / std::sqrt(2.0 * integral);
  out.tail_bound = std::exp(-2.0 * alpha * T) / (2.0 * alpha);
  return out;
}

stability::StationaryEnsemble pitchfork_ensemble(const PitchforkEnsembleConfig& cfg, int jobs) {
  stability::StationaryEnsemble ens;
  ens.provenance = stability::Provenance::closed_form;
  ens.members.resize(static_cast<std::size_t>(cfg.n_members));
  std::vector<double> moments(static_cast<std::size_t>(cfg.n_members));
  parallel_for(static_cast<std::size_t>(cfg.n_members), jobs, [&](std::size_t i) {
    noise::NoiseSpec spec;
    spec.hurst = cfg.hurst;
    spec.horizon = cfg.truncation + cfg.horizon;
    spec.fine_steps = static_cast<int>(std::lround(spec.horizon * cfg.fine_per_unit));
    spec.seed = split_seed(cfg.seed, i);
    GridPath w = noise::sample_fbm(spec);

    // B_t := W_{t+T} - W_T on [-T, horizon]
    const int origin = w.index_of(cfg.truncation);
    const double w0 = w.values(0, origin);
    const double dt = w.step();
    const int n = w.size();

    // prefix trapezoid of e^{2 alpha s + 2 sigma B_s} from s = -T
    std::vector<double> integral(static_cast<std::size_t>(n), 0.0);
    auto integrand = [&](int k) {
      double s = w.times[static_cast<std::size_t>(k)] - cfg.truncation;
      return std::exp(2.0 * (cfg.alpha * s + cfg.sigma * (w.values(0, k) - w0)));
    };
    double prev = integrand(0);
    for (int k = 1; k < n; ++k) {
      double cur = integrand(k);
      integral[static_cast<std::size_t>(k)] =
          integral[static_cast<std::size_t>(k - 1)] + 0.5 * dt * (prev + cur);
      prev = cur;
    }

    const int horizon_steps = n - 1 - origin;
    Mat traj(1, horizon_steps + 1);
    for (int k = 0; k <= horizon_steps; ++k) {
      int src = origin + k;
      double s = w.times[static_cast<std::size_t>(src)] - cfg.truncation;
      double growth = std::exp(cfg.alpha * s + cfg.sigma * (w.values(0, src) - w0));
      traj(0, k) = cfg.sign * growth / std::sqrt(2.0 * integral[static_cast<std::size_t>(src)]);
    }

    stability::EnsembleMember mem;
    mem.seed = spec.seed;
    mem.driver = noise::wiener_shift_index(rough::lift_piecewise_linear(w), origin);
    mem.traj = GridPath::uniform(0.0, dt, std::move(traj));
    mem.a0 = mem.traj.value(0);
    moments[i] = std::pow(std::abs(mem.a0(0)), 3.0);
    ens.members[i] = std::move(mem);
  });
  double acc = 0.0;
  for (double m : moments) acc += m;
  ens.moment_rho = acc / static_cast<double>(cfg.n_members);
  return ens;
}

double logistic_eta(double mu, double sigma, double eta0, double t) {
  const double c = 2.0 * mu + sigma * sigma;
  if (std::abs(c) < 1e-14) return eta0 / (1.0 + 2.0 * eta0 * t);
  double e = std::exp(c * t);
  return c * eta0 * e / (c + 2.0 * eta0 * (e - 1.0));
}

namespace {

double eta_decay_rate(const GridPath& y) {
  // slope of log ||y_t||^2; reuse the decay fitter against the zero path
  GridPath zero = GridPath::uniform(y.times.front(), y.step(), Mat::Zero(y.dim(), y.size()));
  auto fit = stability::fit_decay(y, zero);
  return fit.ok ? 2.0 * fit.mu : 0.0;
}

}  // namespace

CounterexampleReport run_counterexample(double mu, double sigma, double delta, int n_paths,
                                        std::uint64_t seed, int jobs) {
  CounterexampleReport rep;
  const int steps = static_cast<int>(std::lround(1.0 / delta));
  const Vec y0 = (Vec(2) << 0.12, 0.16).finished();
  const double eta0 = y0.squaredNorm();

  auto run_once = [&](double sig, std::uint64_t s) {
    fields::SystemModel model = models::counterexample(mu, sig);
    noise::NoiseSpec spec;
    spec.kind = noise::NoiseKind::bm_ito;
    spec.fine_steps = steps;
    spec.seed = s;
    RoughPathGrid rp = noise::sample_lift(spec);
    return schemes::simulate(model, rp, y0).trajectory;
  };

  // tracking error against the logistic solution at t = 1
  double worst = 0.0;
  std::vector<double> errs(static_cast<std::size_t>(n_paths));
  parallel_for(static_cast<std::size_t>(n_paths), jobs, [&](std::size_t i) {
    GridPath y = run_once(sigma, split_seed(seed, i));
    double got = y.value(y.size() - 1).squaredNorm();
    double want = logistic_eta(mu, sigma, eta0, 1.0);
    errs[i] = std::abs(got - want) / std::abs(want);
  });
  for (double e : errs) worst = std::max(worst, e);
  rep.track_rel_err_t1 = worst;
  rep.decay_rate_eta = eta_decay_rate(run_once(sigma, split_seed(seed, 0)));

  // sigma sweep for the instability threshold sigma^2 + 2 mu > 0
  rep.threshold_estimate = std::numeric_limits<double>::quiet_NaN();
  for (double sig : {0.0, 0.5, 1.0, std::sqrt(-2.0 * mu), 1.8, 2.0, 2.5}) {
    if (!(sig >= 0.0) || !std::isfinite(sig)) continue;
    double rate = eta_decay_rate(run_once(sig, split_seed(seed, 900)));
    rep.sweep.emplace_back(sig, rate);
    if (std::isnan(rep.threshold_estimate) && rate < 0.1) rep.threshold_estimate = sig;
  }
  return rep;
}

FhnFixedPoint fhn_fixed_point(const models::FhnParams& prm) {
  fields::SystemModel model = models::fhn(prm, 0.0);
  Vec y = (Vec(2) << -1.0, -0.4).finished();
  FhnFixedPoint out;
  for (int it = 0; it < 100; ++it) {
    Vec fy = model.f(y);
    if (fy.norm() <= 1e-13) break;
    y -= model.jacobian(y).fullPivLu().solve(fy);
  }
  out.point = y;
  out.residual = model.f(y).norm();
  if (out.residual > 1e-12) throw std::runtime_error("Newton failed to certify the fixed point");
  // eliminate w: v^3 + 3(1/mu - 1) v + 3(J/mu - I) = 0; one real root iff the
  // discriminant -4p^3 - 27q^2 < 0
  double p = 3.0 * (1.0 / prm.mu - 1.0);
  double q = 3.0 * (prm.J / prm.mu - prm.I);
  out.unique = -4.0 * p * p * p - 27.0 * q * q < 0.0;
  return out;
}

double spearman_rank(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
    return r;
  };
  auto rx = ranks(xs), ry = ranks(ys);
  double n = static_cast<double>(xs.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

FhnSweepReport run_fhn(const FhnSweepConfig& cfg, int jobs) {
  FhnSweepReport rep;
  rep.fixed_point = fhn_fixed_point(cfg.params);
  const Vec fp = rep.fixed_point.point;

  fields::SystemModel raw = models::fhn(cfg.params, 1.0, fp(0) - 1.0, fp(1) - 1.0);
  rep.ell_raw = fields::ell(raw, fp);
  fields::CoordinateChange change = fields::optimal_coordinate_change(raw, fp);
  rep.ell_transformed = fields::ell(change.transformed, change.P * fp);

  for (std::size_t li = 0; li < cfg.scales.size(); ++li) {
    const double c = cfg.scales[li];
    fields::SystemModel model = models::fhn(cfg.params, c, fp(0) - 1.0, fp(1) - 1.0);
    fields::CoordinateChange frame = fields::optimal_coordinate_change(model, fp);

    const double span = cfg.t_burn + 1.0;
    noise::NoiseSpec spec;
    spec.hurst = cfg.hurst;
    spec.dim = 2;
    spec.horizon = span;
    spec.fine_steps = static_cast<int>(std::lround(span * cfg.fine_per_unit));

    stability::StationaryEnsemble ens;
    ens.provenance = stability::Provenance::burn_in;
    ens.members.resize(static_cast<std::size_t>(cfg.members));
    std::vector<double> dist(static_cast<std::size_t>(cfg.members));
    std::vector<double> decay_flags(static_cast<std::size_t>(cfg.members), 0.0);
    std::vector<double> decay_mus(static_cast<std::size_t>(cfg.members), 0.0);

    parallel_for(static_cast<std::size_t>(cfg.members), jobs, [&](std::size_t i) {
      noise::NoiseSpec s = spec;
      s.seed = split_seed(cfg.seed, 1000 * (li + 1) + i);
      RoughPathGrid fine = noise::sample_lift(s);
      Vec start_b = fp + 1e-4 * Vec::Ones(2);
      schemes::BurnIn burn = schemes::burn_in_stationary(model, fine, cfg.t_burn, fp, start_b);
      RoughPathGrid driver = noise::wiener_shift_index(fine, burn.origin_index);
      const int nw = driver.size();
      Mat avals(2, nw);
      for (int k = 0; k < nw; ++k) avals.col(k) = burn.trajectory.value(burn.origin_index + k);
      GridPath a_traj = GridPath::uniform(0.0, driver.base.step(), std::move(avals));
      dist[i] = (a_traj.value(nw - 1) - fp).norm();

      if (static_cast<int>(i) < cfg.decay_paths) {
        Vec y0 = a_traj.value(0) + 1e-4 * Vec::Ones(2);
        GridPath y = schemes::simulate(model, driver, y0).trajectory;
        auto fit = stability::fit_decay(y, a_traj);
        decay_flags[i] = (fit.ok && fit.mu > 0.0) ? 1.0 : 0.0;
        decay_mus[i] = fit.ok ? fit.mu : 0.0;
      }

      stability::EnsembleMember mem;
      mem.seed = s.seed;
      mem.a0 = frame.P * a_traj.value(0);
      Mat tvals(2, nw);
      for (int k = 0; k < nw; ++k) tvals.col(k) = frame.P * a_traj.value(k);
      mem.traj = GridPath::uniform(0.0, driver.base.step(), std::move(tvals));
      mem.driver = std::move(driver);
      ens.members[i] = std::move(mem);
    });

    fields::CriterionParams params;
    params.lambda = cfg.lambda;
    noise::NoiseSpec en_spec;
    en_spec.hurst = cfg.hurst;
    en_spec.dim = 2;
    en_spec.fine_steps = cfg.fine_per_unit;
    en_spec.seed = split_seed(cfg.seed, 555 + li);

    FhnLevelResult level;
    level.scale = c;
    level.cg = fields::Cg_constant(model.bounds);
    level.report = stability::criterion_continuous(frame.transformed, params, ens, en_spec,
                                                   cfg.en_paths, false, jobs);
    level.report.frame = "lyapunov-transformed";
    double dsum = 0.0;
    for (double d : dist) dsum = std::max(dsum, d);
    level.distance = dsum;
    double dec = 0.0, musum = 0.0;
    for (int i = 0; i < cfg.decay_paths; ++i) {
      dec += decay_flags[static_cast<std::size_t>(i)];
      musum += decay_mus[static_cast<std::size_t>(i)];
    }
    level.decay_fraction = dec / std::max(cfg.decay_paths, 1);
    level.report.mu_hat = musum / std::max(cfg.decay_paths, 1);
    if (level.report.verdict == stability::Verdict::pass && rep.first_passing < 0)
      rep.first_passing = static_cast<int>(li);
    rep.levels.push_back(std::move(level));
  }

  std::vector<double> xs, ys;
  for (const auto& lv : rep.levels) {
    xs.push_back(lv.scale);
    ys.push_back(lv.distance);
  }
  rep.spearman = spearman_rank(xs, ys);
  return rep;
}

}  // namespace rstab::experiments
