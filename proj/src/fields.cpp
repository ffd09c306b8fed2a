#include "rstab/fields.hpp"

#include <algorithm>
#include <cmath>

namespace rstab::fields {

namespace {

double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Acklam's rational approximation of the standard normal quantile.
double inv_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  if (p <= 0.0) p = 1e-16;
  if (p >= 1.0) p = 1 - 1e-16;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double fd_step(double scale) { return std::max(1e-7, 1e-7 * scale); }

}  // namespace

std::vector<Vec> ball_points(const Vec& center, double r, int count, std::uint64_t salt) {
  const int d = static_cast<int>(center.size());
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(count + 2 * d + 1));
  pts.push_back(center);
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e(i) = r;
    pts.push_back(center + e);
    pts.push_back(center - e);
  }
  for (int k = 0; k < count; ++k) {
    std::uint64_t idx = static_cast<std::uint64_t>(k + 1) + salt;
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir(i) = inv_normal_cdf(halton(idx, kPrimes[i % 12]));
    double nm = dir.norm();
    if (nm < 1e-12) continue;
    double u = halton(idx, kPrimes[d % 12]);
    double radius = r * std::pow(u, 1.0 / static_cast<double>(d));
    pts.push_back(center + (radius / nm) * dir);
  }
  return pts;
}

Mat SystemModel::jacobian(const Vec& y) const {
  if (jac) return jac(y);
  Mat J(dim, dim);
  double h = fd_step(y.norm());
  for (int j = 0; j < dim; ++j) {
    Vec e = Vec::Zero(dim);
    e(j) = h;
    J.col(j) = (f(y + e) - f(y - e)) / (2.0 * h);
  }
  return J;
}

Mat SystemModel::dg_dir(const Vec& y, const Vec& v) const {
  if (dg) return dg(y, v);
  double h = fd_step(y.norm() + v.norm());
  return (g(y + h * v) - g(y - h * v)) / (2.0 * h);
}

Vec SystemModel::milstein_term(const Vec& y, const Mat& X) const {
  Mat gy = g(y);
  Vec out = Vec::Zero(dim);
  for (int i = 0; i < noise_dim; ++i) {
    // sum_j X(i,j) Dg_j[g_i] = dg(y, g_i) * X(i,:)^T
    out += dg_dir(y, gy.col(i)) * X.row(i).transpose();
  }
  return out;
}

double certify_jacobian(const SystemModel& model, const Vec& center, double radius, int points) {
  double worst = 0.0;
  for (const Vec& y : ball_points(center, radius, points, 17)) {
    Mat analytic = model.jacobian(y);
    Mat fd(model.dim, model.dim);
    double h = std::max(1e-6, 1e-6 * y.norm());
    for (int j = 0; j < model.dim; ++j) {
      Vec e = Vec::Zero(model.dim);
      e(j) = h;
      fd.col(j) = (model.f(y + e) - model.f(y - e)) / (2.0 * h);
    }
    double rel = (analytic - fd).norm() / (1.0 + analytic.norm());
    worst = std::max(worst, rel);
  }
  return worst;
}

double ell(const SystemModel& model, const Vec& y_hat) {
  Mat J = model.jacobian(y_hat);
  Mat sym = 0.5 * (J + J.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

double osc_Df(const SystemModel& model, const Vec& y_hat, double r, int samples) {
  if (r < 0.0) throw std::domain_error("radius must be nonnegative");
  if (r == 0.0) return 0.0;
  if (samples <= 0) samples = 4096 * model.dim;
  Mat J0 = model.jacobian(y_hat);
  double best = 0.0;
  for (const Vec& y : ball_points(y_hat, r, samples))
    best = std::max(best, (model.jacobian(y) - J0).norm());
  return best;
}

double df_ball_sup(const SystemModel& model, const Vec& y_hat, double r, int samples) {
  if (samples <= 0) samples = 4096 * model.dim;
  double best = 0.0;
  for (const Vec& y : ball_points(y_hat, r, samples))
    best = std::max(best, model.jacobian(y).norm());
  return best;
}

double M_bound(const SystemModel& model, const Vec& y_hat, double r, int samples) {
  return ell(model, y_hat) + osc_Df(model, y_hat, r, samples);
}

double kappa(const SystemModel& model, double lambda, const Vec& y, double r, int samples) {
  return M_bound(model, y, r, samples) + 256.0 * lambda * model.f(y).norm() +
         64.0 * lambda * (r == 0.0 ? model.jacobian(y).norm() : df_ball_sup(model, y, r, samples));
}

double Cg_constant(const DiffusionBounds& b) {
  b.require();
  double terms[6] = {b.dg_inf,
                     std::sqrt(b.dg_inf * b.g_inf),
                     std::sqrt(b.d2g_inf * b.g_inf),
                     std::sqrt(b.d3g_inf * b.g_inf),
                     std::cbrt(b.d2g_inf * b.g_inf * b.g_inf),
                     std::cbrt(b.d3g_inf * b.g_inf * b.g_inf)};
  return *std::max_element(terms, terms + 6);
}

double Lg_constant(const DiffusionBounds& b) {
  b.require();
  double dmax = std::max({b.dg_inf, b.d2g_inf, b.d3g_inf});
  double terms[4] = {b.dg_inf, b.d2g_inf, std::sqrt(b.g_inf * dmax),
                     std::cbrt(b.g_inf * b.g_inf * b.d3g_inf)};
  return *std::max_element(terms, terms + 4);
}

double Lg_reduced(const DiffusionBounds& b) {
  b.require();
  return std::max(b.dg_inf, std::sqrt(b.g_inf * b.d2g_inf));
}

double Cg_star_local(const SystemModel& model, double eps0) {
  const DiffusionBounds& b = model.bounds;
  if (!(b.ball_radius > 0.0) || b.ball_radius > eps0 * (1.0 + 1e-12))
    throw std::invalid_argument("bounds must be declared over B(0, eps0)");
  if (b.ball_center.size() != 0 && b.ball_center.norm() > 0.0)
    throw std::invalid_argument("local constant requires bounds centred at the origin");
  return Cg_constant(b);
}

DiffusionBounds probe_bounds(const SystemModel& model, const Vec& center, double radius,
                             int samples) {
  if (samples <= 0) samples = 2048 * model.dim;
  DiffusionBounds b;
  b.declared = false;
  b.ball_radius = radius;
  b.ball_center = center;
  const double h = std::max(1e-4, 1e-4 * radius);
  for (const Vec& y : ball_points(center, radius, samples, 3)) {
    b.g_inf = std::max(b.g_inf, model.g(y).norm());
    double dg_sq = 0.0, d2g_sq = 0.0, d3g_sq = 0.0;
    for (int k = 0; k < model.dim; ++k) {
      Vec e = Vec::Zero(model.dim);
      e(k) = 1.0;
      Mat d1 = model.dg_dir(y, e);
      dg_sq += d1.squaredNorm();
      Mat d2 = (model.dg_dir(y + h * e, e) - model.dg_dir(y - h * e, e)) / (2.0 * h);
      d2g_sq += d2.squaredNorm();
      Mat d3 = (model.dg_dir(y + h * e, e) - 2.0 * d1 + model.dg_dir(y - h * e, e)) / (h * h);
      d3g_sq += d3.squaredNorm();
    }
    b.dg_inf = std::max(b.dg_inf, std::sqrt(dg_sq));
    b.d2g_inf = std::max(b.d2g_inf, std::sqrt(d2g_sq));
    b.d3g_inf = std::max(b.d3g_inf, std::sqrt(d3g_sq));
  }
  return b;
}

double sewing_constant(double p) {
  if (!(p > 2.0 && p < 3.0)) throw std::domain_error("sewing constant defined for p in (2,3)");
  return 1.0 / (1.0 - std::pow(2.0, 1.0 - 3.0 / p));
}

void CriterionParams::validate_continuous() const {
  if (!(lambda > 0.0 && lambda < 0.125)) throw std::domain_error("lambda must lie in (0, 1/8)");
  if (!(p > 2.0 && p < 3.0)) throw std::domain_error("p must lie in (2,3)");
}

void CriterionParams::validate_discrete() const {
  if (!(lambda > 0.0 && lambda < 0.5)) throw std::domain_error("lambda must lie in (0, 1/2)");
  if (!(gamma_star > 0.0 && gamma_star < 1.0)) throw std::domain_error("gamma* must lie in (0,1)");
  if (!(p > 2.0 && p < 3.0)) throw std::domain_error("p must lie in (2,3)");
}

CoordinateChange optimal_coordinate_change(const SystemModel& model, const Vec& y_hat) {
  const int d = model.dim;
  Mat A = model.jacobian(y_hat);
  Eigen::EigenSolver<Mat> spec(A);
  if (spec.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  for (int i = 0; i < d; ++i)
    if (spec.eigenvalues()(i).real() >= 0.0)
      throw std::domain_error("Df(y_hat) must have eigenvalues with negative real parts");

  // vec(Df^T Q + Q Df) = -vec(Id) via the Kronecker system
  Mat K = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          // (A^T Q)_{ij} = sum_k A_{ki} Q_{kj}; (Q A)_{ij} = sum_k Q_{ik} A_{kj}
          K(i * d + j, k * d + l) += (l == j ? A(k, i) : 0.0) + (k == i ? A(l, j) : 0.0);
        }
  Vec rhs = Vec::Zero(d * d);
  for (int i = 0; i < d; ++i) rhs(i * d + i) = -1.0;
  Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("Lyapunov solve failed");
  Vec qv = lu.solve(rhs);
  Mat Q(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Q(i, j) = qv(i * d + j);
  Q = 0.5 * (Q + Q.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("Lyapunov solution is not positive definite");
  Mat P = es.operatorSqrt();
  Mat Pinv = P.inverse();

  CoordinateChange out;
  out.P = P;
  out.Pinv = Pinv;
  out.Q = Q;

  SystemModel t;
  t.name = model.name + "+lyapunov-frame";
  t.dim = d;
  t.noise_dim = model.noise_dim;
  SystemModel base = model;
  t.f = [base, P, Pinv](const Vec& z) -> Vec { return P * base.f(Pinv * z); };
  t.jac = [base, P, Pinv](const Vec& z) -> Mat { return P * base.jacobian(Pinv * z) * Pinv; };
  t.g = [base, P, Pinv](const Vec& z) -> Mat { return P * base.g(Pinv * z); };
  t.dg = [base, P, Pinv](const Vec& z, const Vec& v) -> Mat {
    return P * base.dg_dir(Pinv * z, Pinv * v);
  };
  double np = P.operatorNorm(), npi = Pinv.operatorNorm();
  t.bounds = model.bounds;
  t.bounds.g_inf *= np;
  t.bounds.dg_inf *= np * npi;
  t.bounds.d2g_inf *= np * npi * npi;
  t.bounds.d3g_inf *= np * npi * npi * npi;
  t.bounds.ball_radius = model.bounds.ball_radius > 0.0 ? model.bounds.ball_radius / npi : 0.0;
  t.growth_cf = model.growth_cf * np * std::pow(std::max(1.0, npi), model.growth_rho);
  t.growth_rho = model.growth_rho;
  t.lipschitz_f = model.lipschitz_f * np * npi;
  out.transformed = std::move(t);
  return out;
}

}  // namespace rstab::fields
