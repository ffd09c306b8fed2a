#include "rstab/schemes.hpp"

#include <cmath>

namespace rstab::schemes {

Vec step(const SystemModel& model, const Vec& y, const Vec& x_inc, const Mat& X_inc, double delta) {
  return y + delta * model.f(y) + model.g(y) * x_inc + model.milstein_term(y, X_inc);
}

SchemeRun simulate(const SystemModel& model, const RoughPathGrid& rp_coarse, const Vec& y0) {
  const int n = rp_coarse.size();
  const double delta = rp_coarse.base.step();
  Mat vals(model.dim, n);
  Vec y = y0;
  vals.col(0) = y;
  for (int k = 0; k + 1 < n; ++k) {
    y = step(model, y, rp_coarse.base.increment(k, k + 1), rp_coarse.chen(k, k + 1), delta);
    if (!y.allFinite())
      throw std::runtime_error("scheme state is not finite at step " + std::to_string(k + 1));
    vals.col(k + 1) = y;
  }
  SchemeRun run;
  run.trajectory = GridPath::uniform(rp_coarse.base.times.front(), delta, std::move(vals));
  run.delta = delta;
  return run;
}

DiscreteNorms discrete_norms(const GridPath& y, const RoughPathGrid& rp_coarse,
                             const SystemModel& model, double p, int i0, int i1) {
  if (!rough::same_grid(y, rp_coarse.base))
    throw std::domain_error("trajectory and driver grids differ");
  DiscreteNorms out;
  for (int k = i0; k <= i1; ++k) out.sup_norm = std::max(out.sup_norm, y.value(k).norm());
  out.y_pvar = rough::pvar_norm(y, p, i0, i1);
  out.r_qvar = rough::var_dp(i0, i1, p / 2.0, [&](int j, int k) {
    return (y.increment(j, k) - model.g(y.value(j)) * rp_coarse.base.increment(j, k)).norm();
  });
  out.joint = std::max(out.y_pvar, out.r_qvar);
  out.joint_anchored = y.value(i0).norm() + out.joint;
  return out;
}

double pi_rough_norm(const RoughPathGrid& rp_coarse, double p, int i0, int i1) {
  return rough::rough_norm(rp_coarse, p, i0, i1);
}

double constant_K(double lambda, double cp, double lipschitz_f, double delta) {
  double branch1 = 5.0 * (1.0 + lambda) * std::pow(1.0 + 2.0 * cp, 2.0) *
                   std::exp(12.0 * lambda + 2.0 * lambda * lambda);
  double branch2 = 1.5 * std::exp(6.0 * lipschitz_f * delta);
  return std::max(branch1, branch2);
}

stopping::ControlSet discrete_controls(const SystemModel& model, const RoughPathGrid& rp_coarse,
                                       const GridPath& stationary, const CriterionParams& params) {
  if (!std::isfinite(model.lipschitz_f))
    throw std::invalid_argument("discrete controls need a finite L_f");
  const double p = params.p;
  const double q = p / 2.0;
  const double lf = model.lipschitz_f;
  const double lg = fields::Lg_constant(model.bounds);
  const double weight = std::pow((4.0 * params.cp() + 1.0) * lg, p);
  const double lambda = params.lambda;
  stopping::ControlSet S;
  const RoughPathGrid* rp = &rp_coarse;
  const GridPath* a = &stationary;
  const SystemModel* m = &model;
  S.items.push_back({[rp, lf](int i, int j) {
                       return lf * (rp->base.times[static_cast<std::size_t>(j)] -
                                    rp->base.times[static_cast<std::size_t>(i)]);
                     },
                     1.0, "w1:Lf(t-s)"});
  S.items.push_back({[rp, p, weight](int i, int j) {
                       return weight * std::pow(rough::pvar_norm(rp->base, p, i, j), p);
                     },
                     1.0 / p, "w2:path"});
  S.items.push_back({[rp, q, weight](int i, int j) {
                       return weight * std::pow(rough::qvar_area_norm(*rp, q, i, j), q);
                     },
                     1.0 / q, "w3:area"});
  S.items.push_back({[rp, a, m, lambda](int i, int j) {
                       double sup = 0.0;
                       for (int k = i; k <= j; ++k)
                         sup = std::max(sup, m->f(a->value(k)).norm());
                       return 2.0 * lambda * sup *
                              (rp->base.times[static_cast<std::size_t>(j)] -
                               rp->base.times[static_cast<std::size_t>(i)]);
                     },
                     1.0, "w4:drift-on-a"});
  return S;
}

bool HnewWindowAudit::holds() const {
  if (!hypothesis_ok) return true;  // vacuous
  bool contraction = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
  bool decay = !case1_applicable || decay_lhs <= decay_rhs * (1.0 + 1e-9) + 1e-12;
  return contraction && decay;
}

HnewWindowAudit audit_hnew(const SystemModel& model, const RoughPathGrid& rp_coarse,
                           const GridPath& y, const GridPath& a, int i0, int i1,
                           const CriterionParams& params) {
  HnewWindowAudit audit;
  audit.i0 = i0;
  audit.i1 = i1;
  const double p = params.p;
  const double cp = params.cp();
  const double lg = fields::Lg_constant(model.bounds);
  const double lf = model.lipschitz_f;
  const double x_norm = pi_rough_norm(rp_coarse, p, i0, i1);
  audit.hypothesis_ok = 4.0 * cp * lg * x_norm <= params.lambda && params.lambda < 0.5;
  if (!audit.hypothesis_ok) return audit;

  const double span = rp_coarse.base.times[static_cast<std::size_t>(i1)] -
                      rp_coarse.base.times[static_cast<std::size_t>(i0)];
  double f_sup = 0.0;
  for (int k = i0; k <= i1; ++k) f_sup = std::max(f_sup, model.f(a.value(k)).norm());

  // h = y - a with remainder R^h_{s,t} = h_{s,t} - [g(y_s) - g(a_s)] x_{s,t}
  auto h_val = [&](int k) { return Vec(y.value(k) - a.value(k)); };
  double h_pvar = rough::var_dp(i0, i1, p, [&](int j, int k) {
    return (h_val(k) - h_val(j)).norm();
  });
  double rh_qvar = rough::var_dp(i0, i1, p / 2.0, [&](int j, int k) {
    Mat dG = model.g(y.value(j)) - model.g(a.value(j));
    return ((h_val(k) - h_val(j)) - dG * rp_coarse.base.increment(j, k)).norm();
  });
  audit.lhs = std::max(h_pvar, rh_qvar);
  audit.coefficient =
      lf * span + 2.0 * params.lambda * f_sup * span + (4.0 * cp + 1.0) * lg * x_norm;
  audit.rhs = audit.coefficient * (h_val(i0).norm() + audit.lhs);

  const double delta = rp_coarse.base.step();
  audit.case1_applicable = audit.coefficient <= params.lambda &&
                           h_val(i0).norm() <= params.r / (16.0 * (1.0 + cp));
  if (audit.case1_applicable) {
    double mbar = 0.0;
    int count = 0;
    for (int k = i0; k < i1; ++k) {
      mbar += fields::M_bound(model, a.value(k), params.r, 256);
      ++count;
    }
    mbar /= std::max(count, 1);
    double K = constant_K(params.lambda, cp, lf, delta);
    audit.decay_lhs = h_val(i1).norm();
    audit.decay_rhs = std::exp((mbar + 0.5 * lf * lf * delta) * span + K * lg * x_norm) *
                      h_val(i0).norm();
  }
  return audit;
}

BurnIn burn_in_stationary(const SystemModel& model, const RoughPathGrid& rp_coarse, double t_burn,
                          const Vec& start_a, const Vec& start_b, double tol) {
  BurnIn out;
  SchemeRun run_a = simulate(model, rp_coarse, start_a);
  SchemeRun run_b = simulate(model, rp_coarse, start_b);
  out.origin_index = rp_coarse.index_of(rp_coarse.base.times.front() + t_burn);
  out.gap = (run_a.trajectory.value(out.origin_index) - run_b.trajectory.value(out.origin_index))
                .norm();
  out.converged = out.gap < tol;
  out.trajectory = std::move(run_a.trajectory);
  return out;
}

}  // namespace rstab::schemes
