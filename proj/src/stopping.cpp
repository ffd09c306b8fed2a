#include "rstab/stopping.hpp"

#include <cmath>

namespace rstab::stopping {

double ControlSet::beta_min() const {
  if (items.empty()) throw std::domain_error("empty control set");
  double b = items.front().beta;
  for (const auto& w : items) b = std::min(b, w.beta);
  return b;
}

double ControlSet::trigger(int i, int j) const {
  double acc = 0.0;
  for (const auto& w : items) acc += std::pow(w.eval(i, j), w.beta);
  return acc;
}

void audit_control(const Control& w, int grid_size, int trials, std::uint64_t seed) {
  const double tol = 1e-9;
  for (int t = 0; t < trials; ++t) {
    std::uint64_t h = split_seed(seed, t);
    int a = static_cast<int>(h % grid_size);
    int b = static_cast<int>((h >> 16) % grid_size);
    int c = static_cast<int>((h >> 32) % grid_size);
    int lo = std::min({a, b, c}), mid = a + b + c - std::min({a, b, c}) - std::max({a, b, c}),
        hi = std::max({a, b, c});
    if (w.eval(lo, lo) > tol) throw std::logic_error("control not zero on the diagonal: " + w.label);
    double whole = w.eval(lo, hi);
    if (w.eval(mid, hi) > whole * (1.0 + 1e-9) + tol || w.eval(lo, mid) > whole * (1.0 + 1e-9) + tol)
      throw std::logic_error("control not monotone under inclusion: " + w.label);
    if (w.eval(lo, mid) + w.eval(mid, hi) > whole * (1.0 + 1e-9) + tol)
      throw std::logic_error("control not superadditive: " + w.label);
  }
}

namespace {

StoppingSequence greedy_generic(double gamma, int i0, int i1, const std::vector<double>& times,
                                const std::function<int(int, double*)>& advance) {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
  if (i0 < 0 || i1 <= i0 || i1 >= static_cast<int>(times.size()))
    throw std::domain_error("stopping window off grid");
  StoppingSequence seq;
  seq.gamma = gamma;
  seq.i0 = i0;
  seq.i1 = i1;
  seq.idx.push_back(i0);
  seq.times.push_back(times[static_cast<std::size_t>(i0)]);
  int cur = i0;
  while (cur < i1) {
    double trig = 0.0;
    int next = advance(cur, &trig);
    seq.idx.push_back(next);
    seq.times.push_back(times[static_cast<std::size_t>(next)]);
    seq.trigger_at_stop.push_back(trig);
    seq.exhausted = (next == i1 && trig < gamma);
    cur = next;
  }
  return seq;
}

}  // namespace

StoppingSequence greedy_times(const RoughPathGrid& rp, double p, double gamma, int i0, int i1) {
  auto advance = [&](int cur, double* trig) {
    rough::RoughNormScanner scan(rp, p, cur);
    for (int t = cur + 1; t <= i1; ++t) {
      scan.extend_to(t);
      double v = scan.rough();
      if (v >= gamma || t == i1) {
        *trig = v;
        return t;
      }
    }
    *trig = scan.rough();
    return i1;
  };
  return greedy_generic(gamma, i0, i1, rp.base.times, advance);
}

int count_Nstar(const StoppingSequence& seq) { return seq.count(); }

double bound_Nstar(const RoughPathGrid& rp, double p, double gamma, int i0, int i1) {
  double norm = rough::rough_norm(rp, p, i0, i1);
  return 1.0 + std::pow(norm / gamma, p);
}

StoppingSequence greedy_times_controls(const ControlSet& S, double gamma,
                                       const std::vector<double>& times, int i0, int i1) {
  if (S.items.empty()) throw std::domain_error("empty control set");
  auto advance = [&](int cur, double* trig) {
    for (int t = cur + 1; t <= i1; ++t) {
      double v = S.trigger(cur, t);
      if (v >= gamma || t == i1) {
        *trig = v;
        return t;
      }
    }
    *trig = S.trigger(cur, i1);
    return i1;
  };
  return greedy_generic(gamma, i0, i1, times, advance);
}

StoppingSequence greedy_times_discrete(const ControlSet& S, double gamma,
                                       const std::vector<double>& times, int i0, int i1) {
  if (S.items.empty()) throw std::domain_error("empty control set");
  auto advance = [&](int cur, double* trig) {
    double one_step = S.trigger(cur, cur + 1);
    if (one_step > gamma) {
      *trig = one_step;
      return cur + 1;
    }
    // sup{ t_l > t_k : trigger <= gamma }; controls are monotone in t so a
    // single forward pass suffices
    int t = cur + 1;
    double v = one_step;
    while (t < i1) {
      double nxt = S.trigger(cur, t + 1);
      if (nxt > gamma) break;
      ++t;
      v = nxt;
    }
    *trig = v;
    return t;
  };
  return greedy_generic(gamma, i0, i1, times, advance);
}

namespace {

double controls_tail(const ControlSet& S, double gamma, int i0, int i1) {
  double beta = S.beta_min();
  double acc = 0.0;
  for (const auto& w : S.items) acc += std::pow(w.eval(i0, i1), w.beta / beta);
  double card = static_cast<double>(S.items.size());
  return std::pow(gamma, -1.0 / beta) * std::pow(card, 1.0 / beta - 1.0) * acc;
}

}  // namespace

double bound_Nstar_controls(const ControlSet& S, double gamma, int i0, int i1) {
  return 1.0 + controls_tail(S, gamma, i0, i1);
}

double bound_Nhat(const ControlSet& S, double gamma, int i0, int i1) {
  return 2.0 + 2.0 * controls_tail(S, gamma, i0, i1);
}

NsumAudit check_nsum(const RoughPathGrid& rp, double p, double gamma, const std::vector<int>& cuts) {
  if (cuts.size() < 2) throw std::domain_error("need at least two cut points");
  NsumAudit audit;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
    audit.lhs += count_Nstar(greedy_times(rp, p, gamma, cuts[j], cuts[j + 1]));
  audit.rhs = count_Nstar(greedy_times(rp, p, gamma, cuts.front(), cuts.back())) +
              static_cast<double>(cuts.size() - 1);
  audit.holds = audit.lhs <= audit.rhs;
  return audit;
}

EnEstimate estimate_EN(const noise::NoiseSpec& spec, double p, double gamma, int n_paths,
                       const ControlFactory& control_factory, int jobs, bool birkhoff_check,
                       int birkhoff_n) {
  if (n_paths < 2) throw std::domain_error("need at least 2 paths");
  noise::NoiseSpec unit = spec;
  unit.horizon = 1.0;
  std::vector<double> counts(static_cast<std::size_t>(n_paths));
  parallel_for(static_cast<std::size_t>(n_paths), jobs, [&](std::size_t i) {
    noise::NoiseSpec s = unit;
    s.seed = split_seed(spec.seed, i);
    RoughPathGrid rp = noise::sample_lift(s);
    int last = rp.size() - 1;
    StoppingSequence seq =
        control_factory
            ? greedy_times_controls(control_factory(rp), gamma, rp.base.times, 0, last)
            : greedy_times(rp, p, gamma, 0, last);
    counts[i] = static_cast<double>(count_Nstar(seq));
  });
  auto ms = mean_stderr(counts);
  EnEstimate out;
  out.mean = ms.mean;
  out.stderr_ = ms.stderr_;
  out.n_paths = n_paths;
  if (!birkhoff_check) return out;

  // One long path holding >= birkhoff_n stopping times; tau_n/n should
  // approach 1/E N* from above (10% proxy tolerance).
  double horizon = std::ceil(1.3 * static_cast<double>(birkhoff_n) / std::max(out.mean, 1.0)) + 2.0;
  noise::NoiseSpec long_spec = spec;
  long_spec.seed = split_seed(spec.seed, 0xb1f);
  for (int attempt = 0; attempt < 4; ++attempt) {
    long_spec.horizon = horizon;
    long_spec.fine_steps = static_cast<int>(horizon * unit.fine_steps);
    RoughPathGrid rp = noise::sample_lift(long_spec);
    StoppingSequence seq = control_factory ? greedy_times_controls(control_factory(rp), gamma,
                                                                   rp.base.times, 0, rp.size() - 1)
                                           : greedy_times(rp, p, gamma, 0, rp.size() - 1);
    int crossings = count_Nstar(seq) - 1;
    if (crossings >= birkhoff_n) {
      out.birkhoff_n = birkhoff_n;
      out.birkhoff_ratio = seq.times[static_cast<std::size_t>(birkhoff_n)] / birkhoff_n;
      out.birkhoff_bound = 0.9 / out.mean;
      out.birkhoff_ok = out.birkhoff_ratio >= out.birkhoff_bound;
      return out;
    }
    horizon *= 2.0;
  }
  out.birkhoff_ok = false;
  return out;
}

}  // namespace rstab::stopping
