#include <doctest.h>

#include "rstab/experiments.hpp"
#include "rstab/rough_integral.hpp"

using namespace rstab;

TEST_SUITE_BEGIN("rough_core");

TEST_CASE("declared error contracts") {
  noise::NoiseSpec spec;
  spec.hurst = 0.45;
  spec.fine_steps = 32;
  spec.seed = 1;
  auto rp = noise::sample_lift(spec);

  // gamma must be positive for every greedy construction
  CHECK_THROWS_AS(stopping::greedy_times(rp, 2.5, 0.0, 0, 32), std::domain_error);
  CHECK_THROWS_AS(stopping::greedy_times(rp, 2.5, -1.0, 0, 32), std::domain_error);

  // empty control sets are rejected
  stopping::ControlSet empty;
  CHECK_THROWS_AS(stopping::greedy_times_controls(empty, 0.5, rp.base.times, 0, 32),
                  std::domain_error);
  CHECK_THROWS_AS(stopping::greedy_times_discrete(empty, 0.5, rp.base.times, 0, 32),
                  std::domain_error);

  // Monte Carlo estimators need at least two paths
  CHECK_THROWS_AS(stopping::estimate_EN(spec, 2.5, 1.0, 1), std::domain_error);

  // stationary points +-c only exist for alpha > 0
  Mat flat = Mat::Zero(1, 33);
  auto path = rough::GridPath::uniform(0.0, 1.0 / 32.0, flat);
  CHECK_THROWS_AS(experiments::pitchfork_stationary_point(-1.0, 0.1, path, 1.0),
                  std::domain_error);

  // integrals demand a shared grid
  rough::ControlledPath ctrl{rough::GridPath::uniform(0.0, 0.5, Mat::Zero(1, 3)),
                             std::vector<Mat>(3, Mat::Zero(1, 1))};
  CHECK_THROWS_AS(rough::rough_integral(ctrl, rp, 0, 2), std::domain_error);

  // missing diffusion bounds surface as configuration errors
  fields::DiffusionBounds bad;
  bad.dg_inf = -1.0;
  CHECK_THROWS_AS(fields::Cg_constant(bad), std::invalid_argument);
}

TEST_SUITE_END();
