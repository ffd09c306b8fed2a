#include "rstab/flow.hpp"

#include <cmath>

namespace rstab::flow {

namespace {

double resolve_cp(double cp, double p) { return cp > 0.0 ? cp : fields::sewing_constant(p); }

// One Milstein step of the pure flow together with the exact Jacobian of the
// step map applied to xi.
void step_pair(const SystemModel& model, Vec& phi, Mat& xi, const Vec& x_inc, const Mat& X_inc) {
  const int d = model.dim;
  const int m = model.noise_dim;
  Mat gy = model.g(phi);
  Vec phi_next = phi + gy * x_inc + model.milstein_term(phi, X_inc);

  Mat xi_next = xi;
  const double h = std::max(1e-7, 1e-7 * (phi.norm() + 1.0));
  for (int c = 0; c < d; ++c) {
    Vec v = xi.col(c);
    Mat dgv = model.dg_dir(phi, v);      // d x m
    xi_next.col(c) += dgv * x_inc;
    // second-order: sum_i [ D^2g[g_i, v] + Dg[Dg_i v] ] X(i,:)^T
    for (int i = 0; i < m; ++i) {
      Vec gi = gy.col(i);
      Mat hess_dir = (model.dg_dir(phi + h * v, gi) - model.dg_dir(phi - h * v, gi)) / (2.0 * h);
      xi_next.col(c) += hess_dir * X_inc.row(i).transpose();
      xi_next.col(c) += model.dg_dir(phi, dgv.col(i)) * X_inc.row(i).transpose();
    }
  }
  phi = phi_next;
  xi = xi_next;
}

struct PairState {
  Vec phi;
  Mat xi;
};

// Pure flow from index i0 to k, started at z.
PairState flow_to(const SystemModel& model, const RoughPathGrid& rp, int i0, int k, const Vec& z) {
  PairState st{z, Mat::Identity(model.dim, model.dim)};
  for (int j = i0; j < k; ++j)
    step_pair(model, st.phi, st.xi, rp.base.increment(j, j + 1), rp.chen(j, j + 1));
  return st;
}

// Extra half step consistent with the piecewise-linear driver: half the path
// increment, area (1/8) inc (x) inc.
void half_step(const SystemModel& model, PairState& st, const Vec& inc) {
  Vec half = 0.5 * inc;
  Mat area = 0.5 * half * half.transpose();
  step_pair(model, st.phi, st.xi, half, area);
}

}  // namespace

FlowSolution solve_pure(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                        const Vec& phi_a, double p, double cp) {
  if (i0 < 0 || i1 >= rp.size() || i0 >= i1) throw std::domain_error("flow window off grid");
  const int n = i1 - i0 + 1;
  FlowSolution sol;
  sol.i0 = i0;
  sol.i1 = i1;
  sol.jac.reserve(static_cast<std::size_t>(n));
  Mat values(model.dim, n);
  Vec phi = phi_a;
  Mat xi = Mat::Identity(model.dim, model.dim);
  values.col(0) = phi;
  sol.jac.push_back(xi);
  for (int k = i0; k < i1; ++k) {
    step_pair(model, phi, xi, rp.base.increment(k, k + 1), rp.chen(k, k + 1));
    values.col(k - i0 + 1) = phi;
    sol.jac.push_back(xi);
  }
  sol.phi = GridPath::uniform(rp.base.times[static_cast<std::size_t>(i0)], rp.base.step(),
                              std::move(values));
  sol.lambda = resolve_cp(cp, p) * fields::Cg_constant(model.bounds) * rough_norm(rp, p, i0, i1);
  return sol;
}

DossResult doss_sussmann(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                         const Vec& y_a, double p, double cp) {
  const double lambda =
      resolve_cp(cp, p) * fields::Cg_constant(model.bounds) * rough_norm(rp, p, i0, i1);
  if (lambda > 0.125) {
    throw std::domain_error("doss_sussmann: lambda = " + std::to_string(lambda) +
                            " exceeds 1/8 on window [" +
                            std::to_string(rp.base.times[static_cast<std::size_t>(i0)]) + ", " +
                            std::to_string(rp.base.times[static_cast<std::size_t>(i1)]) + "]");
  }
  const int d = model.dim;
  const int n = i1 - i0 + 1;
  const double dt = rp.base.step();

  auto rhs_at_state = [&](PairState st) {
    Eigen::FullPivLU<Mat> lu(st.xi);
    if (!lu.isInvertible()) throw std::runtime_error("flow Jacobian is singular");
    return Vec(lu.solve(model.f(st.phi)));
  };
  auto rhs_grid = [&](int k, const Vec& z) { return rhs_at_state(flow_to(model, rp, i0, k, z)); };
  auto rhs_mid = [&](int k, const Vec& z) {
    PairState st = flow_to(model, rp, i0, k, z);
    half_step(model, st, rp.base.increment(k, k + 1));
    return rhs_at_state(st);
  };

  Mat zvals(d, n), yvals(d, n);
  Vec z = y_a;
  zvals.col(0) = z;
  yvals.col(0) = y_a;
  for (int k = i0; k < i1; ++k) {
    Vec k1 = rhs_grid(k, z);
    Vec k2 = rhs_mid(k, z + 0.5 * dt * k1);
    Vec k3 = rhs_mid(k, z + 0.5 * dt * k2);
    Vec k4 = rhs_grid(k + 1, z + dt * k3);
    z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    int local = k - i0 + 1;
    zvals.col(local) = z;
    yvals.col(local) = flow_to(model, rp, i0, k + 1, z).phi;
  }
  DossResult out;
  out.z = GridPath::uniform(rp.base.times[static_cast<std::size_t>(i0)], dt, std::move(zvals));
  out.y = GridPath::uniform(rp.base.times[static_cast<std::size_t>(i0)], dt, std::move(yvals));
  out.lambda = lambda;
  return out;
}

bool SolestReport::all_hold() const {
  for (const auto& c : checks)
    if (!c.holds()) return false;
  return true;
}

SolestReport audit_solest(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                          const Vec& phi_a, bool g_vanishes_at_zero, double p, double cp) {
  SolestReport rep;
  FlowSolution sol = solve_pure(model, rp, i0, i1, phi_a, p, cp);
  rep.lambda = sol.lambda;
  rep.precondition_ok = sol.lambda <= 0.125;
  if (!rep.precondition_ok) return rep;

  const double q = p / 2.0;
  const double lam = sol.lambda;
  const double x_norm = rough_norm(rp, p, i0, i1);
  const int n = i1 - i0;
  double phi_pvar = rough::pvar_norm(sol.phi, p, 0, n);
  double r_qvar = rough::var_dp(0, n, q, [&](int j, int k) {
    return (sol.phi.increment(j, k) - model.g(sol.phi.value(j)) * rp.base.increment(i0 + j, i0 + k))
        .norm();
  });
  rep.checks.push_back(
      {"solest1a.phi", phi_pvar, 2.0 * (model.bounds.g_inf * x_norm + lam * lam)});
  rep.checks.push_back({"solest1a.remainder", r_qvar, 2.0 * lam * lam});
  if (g_vanishes_at_zero) {
    rep.checks.push_back({"solest1.phi", phi_pvar, 2.0 * lam * phi_a.norm()});
    rep.checks.push_back({"solest1.remainder", r_qvar, 2.0 * lam * lam * phi_a.norm()});
  }
  double worst_jac = 0.0, worst_inv = 0.0;
  for (const Mat& xi : sol.jac) {
    Mat I = Mat::Identity(model.dim, model.dim);
    worst_jac = std::max(worst_jac, (xi - I).norm());
    worst_inv = std::max(worst_inv, (xi.inverse() - I).norm());
  }
  rep.checks.push_back({"solest3.jacobian", worst_jac, 4.0 * lam});
  rep.checks.push_back({"solest3.inverse", worst_inv, 4.0 * lam});
  return rep;
}

SolestReport audit_solestdiff(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                              const Vec& z, const Vec& z_bar, double p, double cp) {
  SolestReport rep;
  FlowSolution a = solve_pure(model, rp, i0, i1, z, p, cp);
  FlowSolution b = solve_pure(model, rp, i0, i1, z_bar, p, cp);
  rep.lambda = a.lambda;
  rep.precondition_ok = a.lambda <= 0.125;
  if (!rep.precondition_ok) return rep;
  const double sep = (z_bar - z).norm();
  double worst_eta = 0.0, worst_psi = 0.0;
  const Mat I = Mat::Identity(model.dim, model.dim);
  for (int k = 0; k <= i1 - i0; ++k) {
    Vec eta = a.phi.value(k) - z;
    Vec eta_bar = b.phi.value(k) - z_bar;
    worst_eta = std::max(worst_eta, (eta_bar - eta).norm());
    Mat psi = a.jac[static_cast<std::size_t>(k)].inverse() - I;
    Mat psi_bar = b.jac[static_cast<std::size_t>(k)].inverse() - I;
    worst_psi = std::max(worst_psi, (psi_bar - psi).norm());
  }
  rep.checks.push_back({"difference.eta", worst_eta, 4.0 * rep.lambda * sep});
  rep.checks.push_back({"difference.psi", worst_psi, 256.0 * rep.lambda * sep});
  return rep;
}

}  // namespace rstab::flow
