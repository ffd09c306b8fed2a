#include "rstab/stability.hpp"

#include <cmath>

namespace rstab::stability {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

Verdict two_sigma_verdict(double lhs, double rhs, double lhs_se, double rhs_se) {
  double noise = 2.0 * std::hypot(lhs_se, rhs_se);
  if (lhs - rhs > noise) return Verdict::pass;
  if (rhs - lhs > noise) return Verdict::fail;
  return Verdict::inconclusive;
}

double ensemble_residual(const StationaryEnsemble& ens, const SystemModel& model) {
  double worst = 0.0;
  for (const auto& mem : ens.members) {
    const int n = mem.traj.size();
    const double delta = mem.traj.step();
    for (int k = 0; k + 1 < n; ++k) {
      Vec predicted = schemes::step(model, mem.traj.value(k), mem.driver.base.increment(k, k + 1),
                                    mem.driver.chen(k, k + 1), delta);
      double res = (mem.traj.value(k + 1) - predicted).norm() / (1.0 + mem.traj.value(k).norm());
      worst = std::max(worst, res);
    }
  }
  return worst;
}

DecayFit fit_decay(const GridPath& y, const GridPath& a) {
  if (y.size() != a.size()) throw std::domain_error("runs must share the grid");
  DecayFit fit;
  const double floor_eps = 100.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> ts, logs;
  for (int k = 0; k < y.size(); ++k) {
    double sep = (y.value(k) - a.value(k)).norm();
    if (sep <= floor_eps * (1.0 + a.value(k).norm())) break;
    ts.push_back(y.times[static_cast<std::size_t>(k)]);
    logs.push_back(std::log(sep));
  }
  fit.n_used = static_cast<int>(ts.size());
  if (fit.n_used < 10) return fit;
  double n = static_cast<double>(ts.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += logs[i];
    stt += ts[i] * ts[i];
    stl += ts[i] * logs[i];
  }
  double denom = n * stt - st * st;
  if (denom <= 0) return fit;
  double slope = (n * stl - st * sl) / denom;
  double intercept = (sl - slope * st) / n;
  double rss = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double r = logs[i] - intercept - slope * ts[i];
    rss += r * r;
  }
  double se = ts.size() > 2 ? std::sqrt(rss / (n - 2.0) / denom * n) : 0.0;
  fit.mu = -slope;
  fit.lo = fit.mu - 1.96 * se;
  fit.hi = fit.mu + 1.96 * se;
  fit.ok = true;
  return fit;
}

namespace {

// E |||x|||_{p-var,[0,1]} by Monte Carlo over seeds.
MeanStderr estimate_norm_moment(const noise::NoiseSpec& spec, double p, double power, int n_paths,
                                int jobs) {
  std::vector<double> vals(static_cast<std::size_t>(n_paths));
  parallel_for(static_cast<std::size_t>(n_paths), jobs, [&](std::size_t i) {
    noise::NoiseSpec s = spec;
    s.horizon = 1.0;
    s.seed = split_seed(spec.seed, 0xabc000 + i);
    RoughPathGrid rp = noise::sample_lift(s);
    vals[i] = std::pow(rough::rough_norm(rp, p, 0, rp.size() - 1), power);
  });
  return mean_stderr(vals);
}

}  // namespace

double select_r0(const SystemModel& model, const CriterionParams& params,
                 const StationaryEnsemble& ensemble, double rhs, double r_max, int iters,
                 int ball_samples) {
  auto lhs_at = [&](double r) {
    double acc = 0.0;
    for (const auto& mem : ensemble.members)
      acc += fields::kappa(model, params.lambda, mem.a0, r, ball_samples);
    return -acc / static_cast<double>(ensemble.members.size());
  };
  if (lhs_at(0.0) <= rhs) return 0.0;
  if (lhs_at(r_max) > rhs) return r_max;
  double lo = 0.0, hi = r_max;
  for (int it = 0; it < iters; ++it) {
    double mid = 0.5 * (lo + hi);
    (lhs_at(mid) > rhs ? lo : hi) = mid;
  }
  return lo;
}

StabilityReport criterion_continuous(const SystemModel& model, const CriterionParams& params,
                                     const StationaryEnsemble& ensemble,
                                     const noise::NoiseSpec& noise_spec, int en_paths,
                                     bool with_extras, int jobs) {
  params.validate_continuous();
  if (ensemble.members.empty()) throw std::domain_error("empty stationary ensemble");
  const double cg = fields::Cg_constant(model.bounds);
  if (!(cg > 0.0)) throw std::domain_error("C_g must be positive");
  const double cp = params.cp();
  const double lambda = params.lambda;

  std::vector<double> kappas, ells;
  kappas.reserve(ensemble.members.size());
  for (const auto& mem : ensemble.members) {
    kappas.push_back(fields::kappa(model, lambda, mem.a0, 0.0));
    ells.push_back(fields::ell(model, mem.a0));
  }
  auto mk = mean_stderr(kappas);
  auto ml = mean_stderr(ells);

  const double gamma = lambda / (cp * cg);
  auto en = stopping::estimate_EN(noise_spec, params.p, gamma, en_paths, nullptr, jobs);

  StabilityReport rep;
  rep.criterion = "continuous(Anegdef)";
  rep.lhs = -mk.mean;
  rep.lhs_se = mk.stderr_;
  rep.rhs = 4.0 * lambda * en.mean;
  rep.rhs_se = 4.0 * lambda * en.stderr_;
  rep.verdict = two_sigma_verdict(rep.lhs, rep.rhs, rep.lhs_se, rep.rhs_se);
  rep.inputs["lambda"] = lambda;
  rep.inputs["C_p"] = cp;
  rep.inputs["C_g"] = cg;
  rep.inputs["gamma"] = gamma;
  rep.inputs["p"] = params.p;
  rep.inputs["E_Nstar"] = en.mean;
  rep.inputs["ensemble_size"] = static_cast<double>(ensemble.members.size());

  if (with_extras) {
    // necessary condition: -E l(f,a) > 4 C_p C_g E |||x|||
    auto mx = estimate_norm_moment(noise_spec, params.p, 1.0, en_paths, jobs);
    rep.extras["necscri_lhs"] = -ml.mean;
    rep.extras["necscri_rhs"] = 4.0 * cp * cg * mx.mean;
    // lambda := C_g specialization when admissible
    if (cg < 0.125) {
      std::vector<double> k2;
      for (const auto& mem : ensemble.members) k2.push_back(fields::kappa(model, cg, mem.a0, 0.0));
      auto mk2 = mean_stderr(k2);
      auto en2 = stopping::estimate_EN(noise_spec, params.p, 1.0 / cp, en_paths, nullptr, jobs);
      rep.extras["pointCg_lhs"] = -mk2.mean;
      rep.extras["pointCg_rhs"] = 4.0 * cg * en2.mean;
    }
    // largest radius whose r-dependent left side still clears the criterion
    rep.extras["r0"] = select_r0(model, params, ensemble, rep.rhs);
    // ergodicity cross-check: time average of kappa along the first member
    const auto& m0 = ensemble.members.front();
    double acc = 0.0;
    for (int k = 0; k < m0.traj.size(); ++k)
      acc += fields::kappa(model, lambda, m0.traj.value(k), 0.0);
    double time_avg = acc / m0.traj.size();
    rep.extras["kappa_time_avg"] = time_avg;
    rep.extras["kappa_ensemble_avg"] = mk.mean;
    // one time average vs the ensemble mean: compare at the member-sd scale
    double member_sd = mk.stderr_ * std::sqrt(static_cast<double>(ensemble.members.size()));
    rep.extras["ergodicity_gap_sigmas"] =
        member_sd > 0 ? std::abs(time_avg - mk.mean) / member_sd : 0.0;
  }
  return rep;
}

StabilityReport criterion_continuous_best_lambda(const SystemModel& model, CriterionParams params,
                                                 const StationaryEnsemble& ensemble,
                                                 const noise::NoiseSpec& noise_spec, int en_paths,
                                                 const std::vector<double>& lambda_grid, int jobs) {
  StabilityReport best;
  bool have = false;
  for (double lam : lambda_grid) {
    params.lambda = lam;
    StabilityReport rep =
        criterion_continuous(model, params, ensemble, noise_spec, en_paths, false, jobs);
    double score = rep.margin() / std::max(rep.noise(), 1e-12);
    if (!have || score > best.extras["score"]) {
      rep.extras["score"] = score;
      best = rep;
      have = true;
    }
  }
  return best;
}

DiscreteCriterionResult criterion_discrete(const SystemModel& model, const CriterionParams& params,
                                           const noise::NoiseSpec& noise_spec, double delta,
                                           int n_paths, double t_burn, const Vec& start_a,
                                           const Vec& start_b, int jobs) {
  params.validate_discrete();
  if (!std::isfinite(model.lipschitz_f))
    throw std::invalid_argument("discrete criterion needs a finite L_f");
  const double cp = params.cp();
  const double lf = model.lipschitz_f;
  const double lg = fields::Lg_constant(model.bounds);

  const double span = t_burn + 1.0;
  const int per_unit = noise_spec.fine_steps;
  const int fine_total = static_cast<int>(std::lround(span * per_unit));
  const double fine_dt = 1.0 / per_unit;
  const int stride = static_cast<int>(std::lround(delta / fine_dt));
  if (stride < 1 || std::abs(stride * fine_dt - delta) > 1e-12)
    throw std::invalid_argument("delta must be a multiple of the fine mesh");

  DiscreteCriterionResult out;
  out.ensemble.provenance = Provenance::burn_in;
  const std::size_t N = static_cast<std::size_t>(n_paths);
  std::vector<double> ell_vals(N), n_gamma(N), n_controls(N);
  std::vector<int> windows(N, 0), hyp_windows(N, 0), violations(N, 0);
  std::vector<EnsembleMember> members(N);
  std::vector<double> moment(N);

  parallel_for(N, jobs, [&](std::size_t i) {
    noise::NoiseSpec s = noise_spec;
    s.horizon = span;
    s.fine_steps = fine_total;
    s.seed = split_seed(noise_spec.seed, 0xd15c + i);
    RoughPathGrid fine = noise::sample_lift(s);
    RoughPathGrid coarse = rough::coarsen(fine, stride);

    schemes::BurnIn burn = schemes::burn_in_stationary(model, coarse, t_burn, start_a, start_b);
    if (!burn.converged)
      throw std::runtime_error("burn-in failed to converge (gap " + std::to_string(burn.gap) + ")");

    // re-base everything to the unit window [0,1] after the burn-in
    RoughPathGrid window_driver = noise::wiener_shift_index(coarse, burn.origin_index);
    const int nw = window_driver.size();
    Mat avals(model.dim, nw);
    for (int k = 0; k < nw; ++k) avals.col(k) = burn.trajectory.value(burn.origin_index + k);
    GridPath a_traj = GridPath::uniform(0.0, delta, std::move(avals));

    ell_vals[i] = fields::ell(model, a_traj.value(0));
    moment[i] = std::pow(a_traj.value(0).norm(), model.growth_rho);

    int last = nw - 1;
    n_gamma[i] = static_cast<double>(
        stopping::count_Nstar(stopping::greedy_times(window_driver, params.p, params.gamma_star, 0, last)));

    stopping::ControlSet S = schemes::discrete_controls(model, window_driver, a_traj, params);
    stopping::StoppingSequence seq =
        stopping::greedy_times_controls(S, params.lambda, window_driver.base.times, 0, last);
    n_controls[i] = static_cast<double>(stopping::count_Nstar(seq));

    // pathwise hnew audit across the stopping windows, driving the scheme
    // from a point r/(16(1+C_p)) away from the stationary candidate
    Vec y0 = a_traj.value(0);
    y0(0) += params.r / (16.0 * (1.0 + cp));
    schemes::SchemeRun y_run = schemes::simulate(model, window_driver, y0);
    for (std::size_t w = 0; w + 1 < seq.idx.size(); ++w) {
      auto audit = schemes::audit_hnew(model, window_driver, y_run.trajectory, a_traj, seq.idx[w],
                                       seq.idx[w + 1], params);
      windows[i] += 1;
      if (audit.hypothesis_ok) {
        hyp_windows[i] += 1;
        if (!audit.holds()) violations[i] += 1;
      }
    }
    members[i] = EnsembleMember{s.seed, a_traj.value(0), std::move(a_traj), std::move(window_driver)};
  });

  out.ensemble.members = std::move(members);
  double msum = 0;
  for (double m : moment) msum += m;
  out.ensemble.moment_rho = msum / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    out.hnew_windows += windows[i];
    out.hnew_hypothesis_windows += hyp_windows[i];
    out.hnew_violations += violations[i];
  }

  auto me = mean_stderr(ell_vals);
  auto mg = mean_stderr(n_gamma);
  auto mc = mean_stderr(n_controls);
  const double K = schemes::constant_K(params.lambda, cp, lf, delta);

  out.cond.criterion = "discrete(cond.)";
  out.cond.lhs = -(me.mean + 0.5 * lf * lf * delta);  // eta
  out.cond.lhs_se = me.stderr_;
  out.cond.rhs = 0.0;
  out.cond.verdict = two_sigma_verdict(out.cond.lhs, 0.0, out.cond.lhs_se, 0.0);
  out.cond.inputs["delta"] = delta;
  out.cond.inputs["L_f"] = lf;

  out.criterion.criterion = "discrete(discstabcri.gen)";
  out.criterion.lhs = out.cond.lhs;
  out.criterion.lhs_se = out.cond.lhs_se;
  out.criterion.rhs = K * lg * params.gamma_star * (mg.mean + 2.0 * mc.mean);
  out.criterion.rhs_se = K * lg * params.gamma_star * std::hypot(mg.stderr_, 2.0 * mc.stderr_);
  out.criterion.verdict =
      two_sigma_verdict(out.criterion.lhs, out.criterion.rhs, out.criterion.lhs_se,
                        out.criterion.rhs_se);
  out.criterion.inputs["lambda"] = params.lambda;
  out.criterion.inputs["gamma_star"] = params.gamma_star;
  out.criterion.inputs["K"] = K;
  out.criterion.inputs["L_g"] = lg;
  out.criterion.inputs["C_p"] = cp;
  out.criterion.inputs["delta"] = delta;
  out.criterion.inputs["E_Nstar_gamma"] = mg.mean;
  out.criterion.inputs["E_Nstar_controls"] = mc.mean;
  return out;
}

StabilityReport criterion_discrete_dissipative(const SystemModel& model,
                                               const CriterionParams& params,
                                               const noise::NoiseSpec& noise_spec, double delta,
                                               double gamma_bar, double eta, double eta_se,
                                               int n_paths, int jobs) {
  params.validate_discrete();
  if (!(gamma_bar > 0.0)) throw std::invalid_argument("Gamma_bar must be positive");
  const double lg = fields::Lg_constant(model.bounds);
  const double K = schemes::constant_K(params.lambda, params.cp(), model.lipschitz_f, delta);
  double power = params.p * (params.p + 2.0);
  auto mom = estimate_norm_moment(noise_spec, params.p, power, n_paths, jobs);
  StabilityReport rep;
  rep.criterion = "discrete-dissipative(discstabcri_gendis)";
  rep.lhs = eta;
  rep.lhs_se = eta_se;
  rep.rhs = K * gamma_bar * lg * (1.0 + mom.mean);
  rep.rhs_se = K * gamma_bar * lg * mom.stderr_;
  rep.verdict = two_sigma_verdict(rep.lhs, rep.rhs, rep.lhs_se, rep.rhs_se);
  rep.inputs["K"] = K;
  rep.inputs["Gamma_bar"] = gamma_bar;
  rep.inputs["L_g"] = lg;
  rep.inputs["moment_power"] = power;
  rep.inputs["E_norm_moment"] = mom.mean;
  return rep;
}

RadiusResult radius_R(const SystemModel& model, const CriterionParams& params,
                      const RoughPathGrid& rp, const GridPath& a_traj, int horizon_idx,
                      int kappa_samples) {
  stopping::StoppingSequence seq;
  if (params.lambda > 0.0) {
    const double cg = fields::Cg_constant(model.bounds);
    const double gamma = params.lambda / (params.cp() * cg);
    seq = stopping::greedy_times(rp, params.p, gamma, 0, horizon_idx);
  } else {
    // lambda = 0 degenerates to a single window with no counting penalty
    seq.idx = {0, horizon_idx};
  }

  // cumulative trapezoid of kappa(lambda, a_s, r) on the fine grid
  const int n = horizon_idx + 1;
  std::vector<double> kap(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    kap[static_cast<std::size_t>(k)] =
        fields::kappa(model, params.lambda, a_traj.value(k), params.r, kappa_samples);
  std::vector<double> integral(static_cast<std::size_t>(n), 0.0);
  const double dt = rp.base.step();
  for (int k = 1; k < n; ++k)
    integral[static_cast<std::size_t>(k)] =
        integral[static_cast<std::size_t>(k - 1)] +
        0.5 * dt * (kap[static_cast<std::size_t>(k - 1)] + kap[static_cast<std::size_t>(k)]);

  RadiusResult out;
  double best_log = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w + 1 < seq.idx.size(); ++w) {
    double n_penalty = -4.0 * params.lambda * (static_cast<double>(w) + 1.0);
    for (int t = seq.idx[w]; t <= seq.idx[w + 1]; ++t) {
      double logval = n_penalty - integral[static_cast<std::size_t>(t)];
      if (logval < best_log) {
        best_log = logval;
        out.attained_n = static_cast<int>(w);
      }
    }
  }
  out.radius = params.r * std::exp(best_log);
  return out;
}

AttractorRadius attractor_radius(const RoughPathGrid& rp_long, double p, double gamma_const,
                                 double d2, int k_max) {
  if (!(d2 > 0.0)) throw std::invalid_argument("D_2 must be positive");
  if (!(gamma_const > 0.0)) throw std::invalid_argument("Gamma must be positive");
  // grid spans [-(k_max+1), 2] re-based to [0, k_max+3]
  const double span = rp_long.base.horizon();
  if (span + 1e-9 < static_cast<double>(k_max) + 3.0)
    throw std::domain_error("driver too short for the requested k_max");
  const double power = p * (p + 2.0);
  AttractorRadius out;
  double acc = 0.0;
  double max_term = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    double lo = static_cast<double>(k_max - k);
    int i0 = rp_long.index_of(rp_long.base.times.front() + lo);
    int i1 = rp_long.index_of(rp_long.base.times.front() + lo + 3.0);
    double term = 1.0 + std::pow(rough::rough_norm(rp_long, p, i0, i1), power);
    max_term = std::max(max_term, term);
    acc += std::exp(-d2 * static_cast<double>(k) / 8.0) * term;
  }
  out.value = gamma_const + gamma_const * acc;
  out.max_term = max_term;
  out.tail_bound = gamma_const * std::exp(-d2 * (k_max + 1.0) / 8.0) * max_term /
                   (1.0 - std::exp(-d2 / 8.0));
  return out;
}

}  // namespace rstab::stability
