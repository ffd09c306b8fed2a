#include <doctest.h>

#include "rstab/noise.hpp"
#include "rstab/variation.hpp"

using namespace rstab;
using namespace rstab::noise;

TEST_SUITE_BEGIN("noise");

namespace {

NoiseSpec base_spec(double H, int steps, std::uint64_t seed, int dim = 1) {
  NoiseSpec s;
  s.hurst = H;
  s.fine_steps = steps;
  s.seed = seed;
  s.dim = dim;
  return s;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(base_spec(0.3, 16, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(base_spec(0.45, 1, 1).validate(), std::invalid_argument);
  NoiseSpec ok = base_spec(1.0, 16, 1);
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("fbm starts at zero and is seed-deterministic") {
  auto a = sample_fbm(base_spec(0.45, 64, 7, 2));
  auto b = sample_fbm(base_spec(0.45, 64, 7, 2));
  CHECK(a.value(0).norm() == 0.0);
  CHECK((a.values - b.values).norm() == 0.0);
  auto c = sample_fbm(base_spec(0.45, 64, 8, 2));
  CHECK((a.values - c.values).norm() > 0.0);
}

TEST_CASE("H=1/2 variance matches Brownian scaling") {
  const int paths = 10000, n = 16;
  std::vector<double> var(3, 0.0);
  const int idx[3] = {4, 8, 16};  // t = 0.25, 0.5, 1
  for (int i = 0; i < paths; ++i) {
    auto b = sample_fbm(base_spec(0.5, n, 100000 + i));
    for (int j = 0; j < 3; ++j) var[j] += b.values(0, idx[j]) * b.values(0, idx[j]);
  }
  const double t[3] = {0.25, 0.5, 1.0};
  for (int j = 0; j < 3; ++j) {
    double v = var[j] / paths;
    CHECK(v >= 0.94 * t[j]);
    CHECK(v <= 1.06 * t[j]);
  }
}

TEST_CASE("H=0.45 second moment at t=1 matches the covariance") {
  const int paths = 10000;
  double acc = 0.0;
  for (int i = 0; i < paths; ++i) {
    auto b = sample_fbm(base_spec(0.45, 16, 500000 + i));
    acc += b.values(0, 16) * b.values(0, 16);
  }
  double m2 = acc / paths;
  CHECK(m2 >= 0.94);
  CHECK(m2 <= 1.06);
}

TEST_CASE("empirical covariance matches the closed form entrywise within 3 SE") {
  const int paths = 10000, n = 16;
  const double H = 0.4;
  const std::pair<int, int> pairs[] = {{5, 12}, {3, 3}, {8, 15}};
  std::vector<std::vector<double>> prod(3);
  for (auto& v : prod) v.reserve(paths);
  for (int i = 0; i < paths; ++i) {
    auto b = sample_fbm(base_spec(H, n, 900000 + i));
    for (int k = 0; k < 3; ++k)
      prod[static_cast<std::size_t>(k)].push_back(b.values(0, pairs[k].first) *
                                                  b.values(0, pairs[k].second));
  }
  for (int k = 0; k < 3; ++k) {
    double s = pairs[k].first / 16.0, t = pairs[k].second / 16.0;
    auto ms = mean_stderr(prod[static_cast<std::size_t>(k)]);
    double expected = 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(t - s, 2 * H));
    CHECK(std::abs(ms.mean - expected) <= 3.0 * ms.stderr_);
  }
}

TEST_CASE("increment statistics are stationary across start times") {
  const int paths = 4000, n = 32;
  std::vector<double> inc_a, inc_b;
  for (int i = 0; i < paths; ++i) {
    auto b = sample_fbm(base_spec(0.45, n, 1234000 + i));
    inc_a.push_back(b.values(0, 8) - b.values(0, 4));
    inc_b.push_back(b.values(0, 28) - b.values(0, 24));
  }
  auto ma = mean_stderr(inc_a), mb = mean_stderr(inc_b);
  CHECK(std::abs(ma.mean - mb.mean) <= 3.0 * std::hypot(ma.stderr_, mb.stderr_));
  double va = 0.0, vb = 0.0;
  for (double x : inc_a) va += x * x;
  for (double x : inc_b) vb += x * x;
  va /= paths;
  vb /= paths;
  CHECK(std::abs(va - vb) / va < 0.15);
}

TEST_CASE("stratonovich diagonal areas close exactly") {
  auto path = sample_fbm(base_spec(0.5, 128, 77, 2));
  auto strat = enhance_bm(path, BmConvention::strat);
  for (int i = 0; i < 2; ++i) {
    double xi = path.values(i, 128);
    CHECK(strat.area0[128](i, i) == doctest::Approx(0.5 * xi * xi).epsilon(1e-10));
  }
}

TEST_CASE("ito diagonal areas are zero-mean and differ from strat by T/2") {
  const int paths = 2000, n = 64;
  std::vector<double> diag;
  for (int i = 0; i < paths; ++i) {
    auto path = sample_fbm(base_spec(0.5, n, 3456000 + i));
    auto ito = enhance_bm(path, BmConvention::ito);
    diag.push_back(ito.area0[n](0, 0));
    if (i == 0) {
      auto strat = enhance_bm(path, BmConvention::strat);
      CHECK(strat.area0[n](0, 0) - ito.area0[n](0, 0) == doctest::Approx(0.5 * 1.0).epsilon(1e-10));
    }
  }
  auto ms = mean_stderr(diag);
  CHECK(std::abs(ms.mean) <= 3.0 * ms.stderr_);
}

TEST_CASE("wiener shift: identity at h=0, re-based start, norm identity") {
  auto rp = sample_lift(base_spec(0.45, 256, 99, 2));
  auto same = wiener_shift(rp, 0.0);
  CHECK((same.base.values - rp.base.values).norm() == 0.0);

  auto shifted = wiener_shift_index(rp, 64);
  CHECK(shifted.base.value(0).norm() == 0.0);
  CHECK(shifted.area0[0].norm() == 0.0);

  for (int trial = 0; trial < 100; ++trial) {
    std::uint64_t h = split_seed(31337, trial);
    int a = static_cast<int>(h % 150);
    int b = a + 1 + static_cast<int>((h >> 20) % 40);
    double lhs = rough::rough_norm(shifted, 2.5, a, b);
    double rhs = rough::rough_norm(rp, 2.5, 64 + a, 64 + b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  CHECK_THROWS_AS(wiener_shift(rp, 0.123456), std::domain_error);
}

TEST_SUITE_END();
