#include "rstab/noise.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

namespace rstab::noise {

namespace {

std::mutex fftw_plan_mutex;  // FFTW plan creation is not thread safe

// Autocovariance of fractional Gaussian noise at lag k for unit step,
// scaled afterwards by dt^{2H}.
double fgn_gamma(int k, double H) {
  double a = std::abs(static_cast<double>(k));
  return 0.5 * (std::pow(a + 1.0, 2.0 * H) - 2.0 * std::pow(a, 2.0 * H) +
                std::pow(std::abs(a - 1.0), 2.0 * H));
}

struct Fft {
  int n;
  fftw_complex* buf;
  fftw_plan plan;
  explicit Fft(int n_) : n(n_) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  void run() { fftw_execute(plan); }
};

// One scalar fGn sample of length n via circulant embedding. Returns false if
// the embedding has a meaningfully negative eigenvalue.
bool davies_harte(int n, double H, GaussianStream& gauss, std::vector<double>& out) {
  const int M = 2 * n;
  Fft fft(M);
  for (int k = 0; k < M; ++k) {
    int lag = k <= n ? k : M - k;
    fft.buf[k][0] = fgn_gamma(lag, H);
    fft.buf[k][1] = 0.0;
  }
  fft.run();
  std::vector<double> eig(static_cast<std::size_t>(M));
  double max_eig = 0.0;
  for (int k = 0; k < M; ++k) {
    eig[static_cast<std::size_t>(k)] = fft.buf[k][0];
    max_eig = std::max(max_eig, fft.buf[k][0]);
  }
  for (double e : eig)
    if (e < -1e-10 * max_eig) return false;

  // V_0, V_{n} real; conjugate-even elsewhere. FFT(V)/sqrt(M) has the fGn law
  // in its real part.
  fft.buf[0][0] = std::sqrt(std::max(eig[0], 0.0)) * gauss();
  fft.buf[0][1] = 0.0;
  fft.buf[n][0] = std::sqrt(std::max(eig[static_cast<std::size_t>(n)], 0.0)) * gauss();
  fft.buf[n][1] = 0.0;
  for (int k = 1; k < n; ++k) {
    double s = std::sqrt(std::max(eig[static_cast<std::size_t>(k)], 0.0) / 2.0);
    double re = s * gauss();
    double im = s * gauss();
    fft.buf[k][0] = re;
    fft.buf[k][1] = im;
    fft.buf[M - k][0] = re;
    fft.buf[M - k][1] = -im;
  }
  fft.run();
  out.resize(static_cast<std::size_t>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = fft.buf[k][0] * scale;
  return true;
}

// O(n^3) fallback: Cholesky of the fGn covariance.
void cholesky_fgn(int n, double H, GaussianStream& gauss, std::vector<double>& out) {
  Mat cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov(i, j) = fgn_gamma(i - j, H);
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fGn covariance is not positive definite (H near 1/3?)");
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = gauss();
  Vec x = llt.matrixL() * z;
  out.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = x(i);
}

}  // namespace

void NoiseSpec::validate() const {
  if (kind == NoiseKind::fbm && !(hurst > 1.0 / 3.0 && hurst <= 1.0))
    throw std::invalid_argument("hurst must lie in (1/3, 1]");
  if (fine_steps < 2) throw std::invalid_argument("fine_steps must be >= 2");
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

GridPath sample_fbm(const NoiseSpec& spec) {
  spec.validate();
  const int n = spec.fine_steps;
  const double H = spec.kind == NoiseKind::fbm ? spec.hurst : 0.5;
  const double dt = spec.horizon / static_cast<double>(n);
  const double inc_scale = std::pow(dt, H);
  Mat values = Mat::Zero(spec.dim, n + 1);
  std::vector<double> fgn;
  for (int c = 0; c < spec.dim; ++c) {
    GaussianStream gauss(split_seed(spec.seed, static_cast<std::uint64_t>(c)));
    if (H == 0.5) {
      fgn.resize(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) fgn[static_cast<std::size_t>(k)] = gauss();
    } else if (!davies_harte(n, H, gauss, fgn)) {
      GaussianStream retry(split_seed(spec.seed, static_cast<std::uint64_t>(c)));
      cholesky_fgn(n, H, retry, fgn);
    }
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += inc_scale * fgn[static_cast<std::size_t>(k)];
      values(c, k + 1) = acc;
    }
  }
  return GridPath::uniform(0.0, dt, std::move(values));
}

GridPath sample_path(const NoiseSpec& spec) { return sample_fbm(spec); }

RoughPathGrid enhance_bm(const GridPath& path, BmConvention convention) {
  if (convention == BmConvention::strat) return rough::lift_piecewise_linear(path);
  const int m = path.dim();
  const int n = path.size();
  const double dt = path.step();
  std::vector<Mat> areas(static_cast<std::size_t>(n));
  areas[0] = Mat::Zero(m, m);
  for (int k = 0; k + 1 < n; ++k) {
    Vec inc = path.increment(k, k + 1);
    Mat step_area = 0.5 * (inc * inc.transpose() - dt * Mat::Identity(m, m));
    areas[k + 1] = areas[k] + path.increment(0, k) * inc.transpose() + step_area;
  }
  return RoughPathGrid(path, std::move(areas));
}

RoughPathGrid sample_lift(const NoiseSpec& spec) {
  GridPath path = sample_path(spec);
  if (spec.kind == NoiseKind::bm_ito) return enhance_bm(path, BmConvention::ito);
  return rough::lift_piecewise_linear(path);
}

RoughPathGrid wiener_shift_index(const RoughPathGrid& rp, int shift) {
  if (shift < 0 || shift >= rp.size() - 1) throw std::domain_error("shift must lie inside the horizon");
  const int n = rp.size() - shift;
  const int m = rp.dim();
  Mat vals(m, n);
  std::vector<double> times(static_cast<std::size_t>(n));
  std::vector<Mat> areas(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    vals.col(k) = rp.base.values.col(shift + k) - rp.base.values.col(shift);
    times[static_cast<std::size_t>(k)] = rp.base.times[static_cast<std::size_t>(shift + k)] -
                                         rp.base.times[static_cast<std::size_t>(shift)];
    areas[static_cast<std::size_t>(k)] = rp.chen(shift, shift + k);
  }
  return RoughPathGrid(GridPath(std::move(times), std::move(vals)), std::move(areas));
}

RoughPathGrid wiener_shift(const RoughPathGrid& rp, double h) {
  return wiener_shift_index(rp, rp.index_of(rp.base.times.front() + h));
}

}  // namespace rstab::noise
