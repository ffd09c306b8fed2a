#include "rstab/models.hpp"

#include <cmath>

namespace rstab::models {

SystemModel pitchfork(double alpha, double sigma, double ball_radius) {
  SystemModel m;
  m.name = "pitchfork";
  m.dim = 1;
  m.noise_dim = 1;
  m.f = [alpha](const Vec& y) {
    Vec out(1);
    out(0) = alpha * y(0) - y(0) * y(0) * y(0);
    return out;
  };
  m.jac = [alpha](const Vec& y) {
    Mat J(1, 1);
    J(0, 0) = alpha - 3.0 * y(0) * y(0);
    return J;
  };
  m.g = [sigma](const Vec& y) {
    Mat G(1, 1);
    G(0, 0) = sigma * y(0);
    return G;
  };
  m.dg = [sigma](const Vec&, const Vec& v) {
    Mat G(1, 1);
    G(0, 0) = sigma * v(0);
    return G;
  };
  m.bounds.g_inf = std::abs(sigma) * ball_radius;
  m.bounds.dg_inf = std::abs(sigma);
  m.bounds.d2g_inf = 0.0;
  m.bounds.d3g_inf = 0.0;
  m.bounds.ball_radius = ball_radius;
  m.bounds.ball_center = Vec::Zero(1);
  m.growth_cf = std::max(std::abs(alpha), 1.0);
  m.growth_rho = 3.0;
  m.lipschitz_f = std::max(std::abs(alpha), std::abs(alpha - 3.0 * ball_radius * ball_radius));
  return m;
}

SystemModel counterexample(double mu, double sigma, double ball_radius) {
  SystemModel m;
  m.name = "counterexample";
  m.dim = 2;
  m.noise_dim = 1;
  m.f = [mu](const Vec& y) { return Vec((mu - y.squaredNorm()) * y); };
  m.jac = [mu](const Vec& y) {
    Mat J = (mu - y.squaredNorm()) * Mat::Identity(2, 2);
    J -= 2.0 * y * y.transpose();
    return J;
  };
  m.g = [sigma](const Vec& y) {
    Mat G(2, 1);
    G(0, 0) = sigma * y(1);
    G(1, 0) = -sigma * y(0);
    return G;
  };
  m.dg = [sigma](const Vec&, const Vec& v) {
    Mat G(2, 1);
    G(0, 0) = sigma * v(1);
    G(1, 0) = -sigma * v(0);
    return G;
  };
  m.bounds.g_inf = std::abs(sigma) * ball_radius;
  m.bounds.dg_inf = std::abs(sigma) * std::sqrt(2.0);
  m.bounds.ball_radius = ball_radius;
  m.bounds.ball_center = Vec::Zero(2);
  m.growth_cf = std::max(std::abs(mu), 3.0);
  m.growth_rho = 3.0;
  // ||Df||_F <= sqrt(2)|mu - R^2| + 2R^2 on the ball
  m.lipschitz_f =
      std::sqrt(2.0) * std::max(std::abs(mu), std::abs(mu - ball_radius * ball_radius)) +
      2.0 * ball_radius * ball_radius;
  return m;
}

SystemModel fhn(const FhnParams& prm, double diffusion_scale, double v_off, double w_off) {
  SystemModel m;
  m.name = "fhn";
  m.dim = 2;
  m.noise_dim = 2;
  const double I = prm.I, mu = prm.mu, J = prm.J, eps = prm.eps;
  m.f = [I, mu, J, eps](const Vec& y) {
    Vec out(2);
    out(0) = y(0) - y(0) * y(0) * y(0) / 3.0 - y(1) + I;
    out(1) = eps * (y(0) - mu * y(1) + J);
    return out;
  };
  m.jac = [mu, eps](const Vec& y) {
    Mat Jm(2, 2);
    Jm << 1.0 - y(0) * y(0), -1.0, eps, -eps * mu;
    return Jm;
  };
  const double c = diffusion_scale;
  m.g = [c, v_off, w_off](const Vec& y) {
    Mat G = Mat::Zero(2, 2);
    G(0, 0) = c * std::tanh(y(0) - v_off);
    G(1, 1) = c * std::tanh(y(1) - w_off);
    return G;
  };
  m.dg = [c, v_off, w_off](const Vec& y, const Vec& v) {
    auto sech2 = [](double x) {
      double ch = std::cosh(x);
      return 1.0 / (ch * ch);
    };
    Mat G = Mat::Zero(2, 2);
    G(0, 0) = c * sech2(y(0) - v_off) * v(0);
    G(1, 1) = c * sech2(y(1) - w_off) * v(1);
    return G;
  };
  // sup |tanh| = 1, |tanh'| = 1, |tanh''| ~= 0.7699, |tanh'''| = 2; two
  // nonzero tensor entries give the sqrt(2) Frobenius factor
  const double rt2 = std::sqrt(2.0);
  m.bounds.g_inf = c * rt2;
  m.bounds.dg_inf = c * rt2;
  m.bounds.d2g_inf = c * 0.77 * rt2;
  m.bounds.d3g_inf = c * 2.0 * rt2;
  m.bounds.ball_radius = 0.0;  // global
  m.growth_cf = std::max({1.0 + I + J, eps * (1.0 + mu)}) + 1.0;
  m.growth_rho = 3.0;
  m.lipschitz_f = std::numeric_limits<double>::infinity();
  return m;
}

SystemModel linear(const Mat& A, const Mat& G) {
  SystemModel m;
  m.name = "linear";
  m.dim = static_cast<int>(A.rows());
  m.noise_dim = static_cast<int>(G.cols());
  m.f = [A](const Vec& y) { return Vec(A * y); };
  m.jac = [A](const Vec&) { return A; };
  m.g = [G](const Vec&) { return G; };
  m.dg = [G](const Vec&, const Vec&) { return Mat(Mat::Zero(G.rows(), G.cols())); };
  m.bounds.g_inf = G.norm();
  m.growth_cf = std::max(A.norm(), 1.0);
  m.growth_rho = 1.0;
  m.lipschitz_f = A.norm();
  return m;
}

SystemModel polynomial(int dim, const std::vector<std::vector<PolyTerm>>& components,
                       const Mat& diffusion_constant, double ball_radius) {
  if (static_cast<int>(components.size()) != dim)
    throw std::invalid_argument("polynomial drift needs one term list per component");
  SystemModel m;
  m.name = "polynomial";
  m.dim = dim;
  m.noise_dim = static_cast<int>(diffusion_constant.cols());
  auto comps = components;
  m.f = [comps, dim](const Vec& y) {
    Vec out = Vec::Zero(dim);
    for (int i = 0; i < dim; ++i)
      for (const auto& t : comps[static_cast<std::size_t>(i)]) {
        double v = t.coef;
        for (int j = 0; j < dim; ++j)
          v *= std::pow(y(j), t.exponents[static_cast<std::size_t>(j)]);
        out(i) += v;
      }
    return out;
  };
  m.jac = [comps, dim](const Vec& y) {
    Mat J = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (const auto& t : comps[static_cast<std::size_t>(i)])
        for (int k = 0; k < dim; ++k) {
          int ek = t.exponents[static_cast<std::size_t>(k)];
          if (ek == 0) continue;
          double v = t.coef * ek * std::pow(y(k), ek - 1);
          for (int j = 0; j < dim; ++j)
            if (j != k) v *= std::pow(y(j), t.exponents[static_cast<std::size_t>(j)]);
          J(i, k) += v;
        }
    return J;
  };
  Mat G = diffusion_constant;
  m.g = [G](const Vec&) { return G; };
  m.dg = [G](const Vec&, const Vec&) { return Mat(Mat::Zero(G.rows(), G.cols())); };
  m.bounds.g_inf = G.norm();
  m.bounds.ball_radius = ball_radius;
  m.bounds.ball_center = Vec::Zero(dim);
  m.growth_cf = 1.0;
  m.growth_rho = 1.0;
  for (const auto& comp : components)
    for (const auto& t : comp) {
      int deg = 0;
      for (int e : t.exponents) deg += e;
      m.growth_rho = std::max(m.growth_rho, static_cast<double>(deg));
      m.growth_cf = std::max(m.growth_cf, std::abs(t.coef) * static_cast<double>(comp.size()));
    }
  return m;
}

}  // namespace rstab::models
