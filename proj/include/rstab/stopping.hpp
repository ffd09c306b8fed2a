#pragma once

#include "rstab/noise.hpp"
#include "rstab/variation.hpp"

namespace rstab::stopping {

using rough::GridPath;
using rough::RoughPathGrid;

// A superadditive two-parameter control w with exponent beta, evaluated on
// grid indices of the grid it was built for.
struct Control {
  std::function<double(int, int)> eval;
  double beta = 1.0;
  std::string label;
};

struct ControlSet {
  std::vector<Control> items;

  double beta_min() const;
  // sum_w (w_{i,j})^{beta_w}, the greedy trigger
  double trigger(int i, int j) const;
};

// Randomized audit of the control axioms (zero diagonal, monotone under
// interval inclusion, superadditive). Throws std::logic_error on violation.
void audit_control(const Control& w, int grid_size, int trials, std::uint64_t seed);

struct StoppingSequence {
  std::vector<int> idx;        // tau*_0 = i0, strictly increasing, last = i1
  std::vector<double> times;
  std::vector<double> trigger_at_stop;  // trigger over [tau_k, tau_{k+1}]
  double gamma = 0.0;
  int i0 = 0, i1 = 0;
  bool exhausted = false;  // last time hit the right end without crossing

  // N* = sup{ i : tau*_i < max I } + 1
  int count() const { return static_cast<int>(idx.size()) - 1; }
};

// tau_{i+1} = first grid instant with |||x|||_{p-var,[tau_i, t]} >= gamma,
// capped at the window end.
StoppingSequence greedy_times(const RoughPathGrid& rp, double p, double gamma, int i0, int i1);

int count_Nstar(const StoppingSequence& seq);

// Eq-style rough estimate 1 + gamma^{-p} |||x|||^p_{p-var,I}
double bound_Nstar(const RoughPathGrid& rp, double p, double gamma, int i0, int i1);

// Control-set greedy: trigger sum_w w^{beta_w} first reaching >= gamma.
// `times` supplies the instants backing the control indices.
StoppingSequence greedy_times_controls(const ControlSet& S, double gamma,
                                       const std::vector<double>& times, int i0, int i1);

// Two-branch discrete rule on the grid Pi backing the controls:
// if trigger over one step exceeds gamma take that step, else the largest
// instant keeping the trigger <= gamma.
StoppingSequence greedy_times_discrete(const ControlSet& S, double gamma,
                                       const std::vector<double>& times, int i0, int i1);

// 1 + gamma^{-1/beta} |S|^{1/beta - 1} sum_w (w_{min I, max I})^{beta_w/beta}
double bound_Nstar_controls(const ControlSet& S, double gamma, int i0, int i1);
// 2 + 2 gamma^{-1/beta} |S|^{1/beta - 1} sum_w (w_{min I, max I})^{beta_w/beta}
double bound_Nhat(const ControlSet& S, double gamma, int i0, int i1);

struct NsumAudit {
  double lhs = 0.0;  // sum_j N*(gamma, [t_j, t_{j+1}])
  double rhs = 0.0;  // N*(gamma, [t_0, t_n]) + n
  bool holds = false;
};
NsumAudit check_nsum(const RoughPathGrid& rp, double p, double gamma, const std::vector<int>& cuts);

struct EnEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n_paths = 0;
  // liminf proxy along one long path: tau_n / n at n = birkhoff_n versus
  // (1 - tol) / mean
  double birkhoff_ratio = 0.0;
  double birkhoff_bound = 0.0;
  int birkhoff_n = 0;
  bool birkhoff_ok = true;
};

// Monte Carlo E N*(gamma, x, [0,1]) over independent seeds. When
// control_factory is set the count uses the control-set greedy with controls
// built per path; otherwise the rough-norm greedy.
using ControlFactory = std::function<ControlSet(const RoughPathGrid&)>;
EnEstimate estimate_EN(const noise::NoiseSpec& spec, double p, double gamma, int n_paths,
                       const ControlFactory& control_factory = nullptr, int jobs = 0,
                       bool birkhoff_check = false, int birkhoff_n = 200);

}  // namespace rstab::stopping
