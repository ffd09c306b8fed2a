#pragma once

#include "rstab/fields.hpp"
#include "rstab/stopping.hpp"
#include "rstab/variation.hpp"

namespace rstab::schemes {

using fields::CriterionParams;
using fields::SystemModel;
using rough::GridPath;
using rough::RoughPathGrid;

// One explicit step: y + f(y) delta + g(y) x_inc + Dg g (X_inc).
Vec step(const SystemModel& model, const Vec& y, const Vec& x_inc, const Mat& X_inc, double delta);

struct SchemeRun {
  GridPath trajectory;  // on the coarse grid Pi
  double delta = 0.0;
};

// Iterates the scheme over the full coarse driver; throws std::runtime_error
// naming the step index if the state leaves the finite range.
SchemeRun simulate(const SystemModel& model, const RoughPathGrid& rp_coarse, const Vec& y0);

struct DiscreteNorms {
  double sup_norm = 0.0;
  double y_pvar = 0.0;
  double r_qvar = 0.0;        // R^y_{s,t} = y_{s,t} - g(y_s) x_{s,t}
  double joint = 0.0;         // max(y_pvar, r_qvar)
  double joint_anchored = 0.0;  // ||y_a|| + joint
};
DiscreteNorms discrete_norms(const GridPath& y, const RoughPathGrid& rp_coarse,
                             const SystemModel& model, double p, int i0, int i1);

// The discrete rough norm of the driver over Pi[i0,i1].
double pi_rough_norm(const RoughPathGrid& rp_coarse, double p, int i0, int i1);

// K = 5(1+lambda)(1+2C_p)^2 e^{12 lambda + 2 lambda^2}  v  (3/2) e^{6 L_f delta}
double constant_K(double lambda, double cp, double lipschitz_f, double delta);

// The four controls of the discrete stability section, built on the coarse
// grid: w1 = L_f (t-s), w2/w3 the powered driver norms with the (4C_p+1)^p
// L_g^p weight, w4 = 2 lambda ||f(a)||_{inf,Pi[s,t]} (t-s).
stopping::ControlSet discrete_controls(const SystemModel& model, const RoughPathGrid& rp_coarse,
                                       const GridPath& stationary, const CriterionParams& params);

struct HnewWindowAudit {
  int i0 = 0, i1 = 0;
  bool hypothesis_ok = false;  // 4 C_p L_g |||x||| <= lambda < 1/2
  double lhs = 0.0;            // |||h, R^h|||
  double coefficient = 0.0;    // bracketed factor of the contraction
  double rhs = 0.0;            // coefficient * ||h, R^h||
  bool case1_applicable = false;
  double decay_lhs = 0.0;  // ||h_{tau_1}||
  double decay_rhs = 0.0;  // exp{[Mbar + L_f^2 delta / 2](b-a) + K L_g |||x|||} ||h_{tau_0}||
  bool holds() const;
};

// Audits the contraction of the difference h = y - a over [i0,i1] of Pi, and
// the per-window decay factor when the one-step hypothesis and the
// r/(16(1+C_p)) smallness both hold.
HnewWindowAudit audit_hnew(const SystemModel& model, const RoughPathGrid& rp_coarse,
                           const GridPath& y, const GridPath& a, int i0, int i1,
                           const CriterionParams& params);

struct BurnIn {
  GridPath trajectory;  // from pullback start to the end of the driver
  int origin_index = 0;  // index of t = end of burn-in
  bool converged = false;
  double gap = 0.0;  // distance between the two starts at the origin
};

// Stationary candidate by pullback burn-in: simulate from two distant starts
// over [0, t_burn + horizon] and keep the run once they agree at t_burn.
BurnIn burn_in_stationary(const SystemModel& model, const RoughPathGrid& rp_coarse, double t_burn,
                          const Vec& start_a, const Vec& start_b, double tol = 1e-6);

}  // namespace rstab::schemes
