#include <doctest.h>

#include "rstab/experiments.hpp"
#include "rstab/flow.hpp"
#include "rstab/models.hpp"
#include "rstab/noise.hpp"

using namespace rstab;
using namespace rstab::flow;

TEST_SUITE_BEGIN("flow");

namespace {

rough::RoughPathGrid fbm_lift(double H, int steps, std::uint64_t seed, int dim = 1,
                              double horizon = 1.0) {
  noise::NoiseSpec spec;
  spec.hurst = H;
  spec.fine_steps = steps;
  spec.seed = seed;
  spec.dim = dim;
  spec.horizon = horizon;
  return noise::sample_lift(spec);
}

// bounded diffusion with g(0) = 0: g(y) = c * diag(tanh(y_i)); d = m
fields::SystemModel tanh_model(int d, double c, double drift = -1.0) {
  fields::SystemModel m;
  m.name = "tanh-saturated";
  m.dim = d;
  m.noise_dim = d;
  double a = drift;
  m.f = [a](const Vec& y) { return Vec(a * y); };
  m.jac = [a, d](const Vec&) { return Mat(a * Mat::Identity(d, d)); };
  m.g = [c, d](const Vec& y) {
    Mat G = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) G(i, i) = c * std::tanh(y(i));
    return G;
  };
  m.dg = [c, d](const Vec& y, const Vec& v) {
    Mat G = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      double ch = std::cosh(y(i));
      G(i, i) = c * v(i) / (ch * ch);
    }
    return G;
  };
  const double rt = std::sqrt(static_cast<double>(d));
  m.bounds.g_inf = c * rt;
  m.bounds.dg_inf = c * rt;
  m.bounds.d2g_inf = c * 0.77 * rt;
  m.bounds.d3g_inf = c * 2.0 * rt;
  m.lipschitz_f = std::abs(a) * rt;
  return m;
}

}  // namespace

TEST_CASE("solve_pure: vanishing diffusion freezes the state and the Jacobian") {
  auto m = models::pitchfork(1.0, 0.0);
  auto rp = fbm_lift(0.45, 64, 9);
  Vec y0(1);
  y0 << 0.7;
  auto sol = solve_pure(m, rp, 0, 64, y0);
  CHECK((sol.phi.value(64) - y0).norm() == 0.0);
  CHECK((sol.jac.back() - Mat::Identity(1, 1)).norm() == 0.0);
}

TEST_CASE("solve_pure: scalar linear diffusion reproduces the exponential") {
  // d phi = sigma phi dx with the geometric lift: phi_t = phi_a e^{sigma x_{a,t}}
  double sigma = 0.4;
  auto m = models::pitchfork(1.0, sigma);
  auto rp = fbm_lift(0.45, 4096, 10);
  Vec y0(1);
  y0 << 1.3;
  auto sol = solve_pure(m, rp, 0, 4096, y0);
  double exact = y0(0) * std::exp(sigma * (rp.base.values(0, 4096) - rp.base.values(0, 0)));
  CHECK(sol.phi.value(4096)(0) == doctest::Approx(exact).epsilon(2e-4));
}

TEST_CASE("solve_pure: self-convergence under mesh halving") {
  auto m = tanh_model(2, 0.6);
  auto fine = fbm_lift(0.45, 1024, 11, 2);
  Vec y0(2);
  y0 << 0.4, -0.2;
  auto ref = solve_pure(m, fine, 0, 1024, y0).phi.value(1024);
  double prev_err = 1e300;
  for (int stride : {16, 8, 4, 2}) {
    auto rp = rough::coarsen(fine, stride);
    double err = (solve_pure(m, rp, 0, rp.size() - 1, y0).phi.value(rp.size() - 1) - ref).norm();
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("Jacobian flow matches finite differences of the flow map") {
  auto m = tanh_model(2, 0.5);
  auto rp = fbm_lift(0.45, 512, 12, 2);
  Vec y0(2);
  y0 << 0.3, 0.1;
  auto sol = solve_pure(m, rp, 0, 512, y0);
  const double h = 1e-6;
  Mat fd(2, 2);
  for (int j = 0; j < 2; ++j) {
    Vec e = Vec::Zero(2);
    e(j) = h;
    Vec plus = solve_pure(m, rp, 0, 512, y0 + e).phi.value(512);
    Vec minus = solve_pure(m, rp, 0, 512, y0 - e).phi.value(512);
    fd.col(j) = (plus - minus) / (2.0 * h);
  }
  CHECK((sol.jac.back() - fd).norm() / fd.norm() <= 1e-3);
}

TEST_CASE("doss_sussmann: f = 0 keeps z frozen and y equal to the pure flow") {
  auto m = tanh_model(2, 0.002, 0.0);  // zero drift
  auto rp = fbm_lift(0.45, 128, 13, 2);
  Vec y0(2);
  y0 << 0.5, -0.3;
  auto ds = doss_sussmann(m, rp, 0, 128, y0);
  CHECK((ds.z.value(128) - y0).norm() <= 1e-12);
  auto pure = solve_pure(m, rp, 0, 128, y0);
  CHECK((ds.y.value(128) - pure.phi.value(128)).norm() <= 1e-10);
}

TEST_CASE("doss_sussmann: g = 0 reduces to the drift ODE") {
  // f = -y: y_t = e^{-t} y_0 exactly, phi = identity
  auto m = tanh_model(1, 0.0, -1.0);
  auto rp = fbm_lift(0.45, 256, 14);
  Vec y0(1);
  y0 << 2.0;
  auto ds = doss_sussmann(m, rp, 0, 256, y0);
  double exact = y0(0) * std::exp(-1.0);
  CHECK(ds.y.value(256)(0) == doctest::Approx(exact).epsilon(1e-8));
  CHECK((ds.y.value(256) - ds.z.value(256)).norm() <= 1e-12);
}

TEST_CASE("doss_sussmann: pitchfork reconstruction matches the closed form") {
  double alpha = 1.0, sigma = 0.003;
  auto m = models::pitchfork(alpha, sigma, 2.0);
  // scale so lambda <= 1/8 over [0,1] is not guaranteed; solve on a window
  // where it holds by construction of the test seed
  auto rp = fbm_lift(0.45, 2048, 15);
  double lam = fields::sewing_constant(2.5) * fields::Cg_constant(m.bounds) *
               rough::rough_norm(rp, 2.5, 0, 2048);
  REQUIRE(lam <= 0.125);
  Vec y0(1);
  y0 << 0.5;
  auto ds = doss_sussmann(m, rp, 0, 2048, y0);
  double exact = experiments::pitchfork_exact(alpha, sigma, rp.base, y0(0), 2048);
  CHECK(std::abs(ds.y.value(2048)(0) - exact) / std::abs(exact) <= 0.01);
}

TEST_CASE("doss_sussmann rejects windows with lambda above 1/8") {
  auto m = models::pitchfork(1.0, 5.0);  // huge C_g
  auto rp = fbm_lift(0.45, 64, 16);
  Vec y0(1);
  y0 << 0.5;
  CHECK_THROWS_AS(doss_sussmann(m, rp, 0, 64, y0), std::domain_error);
}

TEST_CASE("audit_solest: degenerate g passes trivially; windows pass pathwise") {
  auto zero = tanh_model(2, 0.0);
  auto rp0 = fbm_lift(0.45, 64, 17, 2);
  // C_g = 0 means lambda = 0: every left side vanishes
  auto rep0 = audit_solest(zero, rp0, 0, 64, (Vec(2) << 0.2, 0.1).finished(), true);
  CHECK(rep0.precondition_ok);
  CHECK(rep0.all_hold());

  auto m = tanh_model(2, 0.002);
  int pass = 0, windows = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto rp = fbm_lift(0.45, 256, 1700 + trial, 2);
    auto rep = audit_solest(m, rp, 0, 256, (Vec(2) << 0.4, -0.1).finished(), true);
    if (!rep.precondition_ok) continue;
    ++windows;
    if (rep.all_hold()) ++pass;
  }
  CHECK(windows > 0);
  CHECK(pass == windows);
}

TEST_CASE("audit_solestdiff: zero separation and sampled pairs") {
  auto m = tanh_model(2, 0.002);
  auto rp = fbm_lift(0.45, 256, 18, 2);
  Vec z(2);
  z << 0.3, -0.2;
  auto same = audit_solestdiff(m, rp, 0, 256, z, z);
  CHECK(same.all_hold());
  for (const auto& c : same.checks) CHECK(c.lhs == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    std::uint64_t h = split_seed(77, trial);
    Vec zb = z + 0.3 * (Vec(2) << ((h % 100) / 50.0 - 1.0), (((h >> 20) % 100) / 50.0 - 1.0)).finished();
    auto rep = audit_solestdiff(m, rp, 0, 256, z, zb);
    CHECK(rep.precondition_ok);
    CHECK(rep.all_hold());
  }
}

TEST_CASE("audit_solestdiff: left sides shrink at least linearly in the g scale") {
  auto rp = fbm_lift(0.45, 128, 19, 2);
  Vec z(2), zb(2);
  z << 0.3, -0.2;
  zb << 0.1, 0.25;
  double prev_eta = 1e300, prev_psi = 1e300;
  for (double c : {0.002, 0.001, 0.0005, 0.00025}) {
    auto m = tanh_model(2, c);
    auto rep = audit_solestdiff(m, rp, 0, 128, z, zb);
    REQUIRE(rep.precondition_ok);
    double eta = rep.checks[0].lhs, psi = rep.checks[1].lhs;
    CHECK(eta <= prev_eta * 0.55 + 1e-15);
    CHECK(psi <= prev_psi * 0.55 + 1e-15);
    prev_eta = eta;
    prev_psi = psi;
  }
}

TEST_SUITE_END();
