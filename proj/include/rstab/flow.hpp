#pragma once

#include "rstab/fields.hpp"
#include "rstab/variation.hpp"

namespace rstab::flow {

using fields::SystemModel;
using rough::GridPath;
using rough::RoughPathGrid;

struct FlowSolution {
  GridPath phi;            // solution of d phi = g(phi) dx on [i0, i1]
  std::vector<Mat> jac;    // d phi / d phi_a, jac[0] = Id
  int i0 = 0, i1 = 0;
  double lambda = 0.0;     // realized C_p C_g |||x|||_{p-var,[i0,i1]}
};

// Fine-grid Milstein stepping of the pure flow with the Jacobian flow
// attached (the exact linearization of the step map).
FlowSolution solve_pure(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                        const Vec& phi_a, double p = 2.5, double cp = 0.0);

struct DossResult {
  GridPath z;
  GridPath y;  // reconstruction y_t = phi_t(x, z_t)
  double lambda = 0.0;
};

// Doss-Sussmann: integrates z' = [d phi/d z]^{-1} f(phi_t(x, z_t)) by classic
// RK4 on the fine grid; phi(t, x, z) and its z-Jacobian come from re-solving
// the pure flow per stage (midpoint stages use the piecewise-linear half
// step). Throws std::domain_error when lambda over the window exceeds 1/8.
DossResult doss_sussmann(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                         const Vec& y_a, double p = 2.5, double cp = 0.0);

struct Inequality {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs * (1.0 + 1e-9) + 1e-12; }
};

struct SolestReport {
  double lambda = 0.0;
  bool precondition_ok = false;  // lambda <= 1/8
  std::vector<Inequality> checks;
  bool all_hold() const;
};

// Audits (solest1a), optionally (solest1) when the model has g(0) = 0, and
// (solest3) on the numerically solved flow.
SolestReport audit_solest(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                          const Vec& phi_a, bool g_vanishes_at_zero, double p = 2.5,
                          double cp = 0.0);

// Audits the two (difference) estimates for flows started at z and z_bar.
SolestReport audit_solestdiff(const SystemModel& model, const RoughPathGrid& rp, int i0, int i1,
                              const Vec& z, const Vec& z_bar, double p = 2.5, double cp = 0.0);

}  // namespace rstab::flow
