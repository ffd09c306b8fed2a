#include <CLI11.hpp>
#include <json.hpp>

#include "rstab/experiments.hpp"
#include "rstab/flow.hpp"
#include "rstab/io.hpp"
#include "rstab/rough_integral.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace rstab;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitConfig = 65;

std::uint64_t seed_or_env(std::uint64_t seed, bool seed_given) {
  if (seed_given) return seed;
  if (const char* env = std::getenv("RSTAB_SEED")) return std::strtoull(env, nullptr, 10);
  return seed;
}

noise::NoiseKind parse_kind(const std::string& s) {
  if (s == "fbm") return noise::NoiseKind::fbm;
  if (s == "bm-ito") return noise::NoiseKind::bm_ito;
  if (s == "bm-strat") return noise::NoiseKind::bm_strat;
  throw CLI::ValidationError("--kind", "expected fbm|bm-ito|bm-strat");
}

std::pair<double, double> parse_window(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--window", "expected s,t");
  return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

rough::RoughPathGrid load_lift(const std::string& file) {
  if (file.size() > 4 && file.substr(file.size() - 4) == ".bin") return io::read_binary(file);
  return io::read_lift_csv(file);
}

json report_json(const stability::StabilityReport& rep) {
  json j;
  j["criterion"] = rep.criterion;
  j["verdict"] = stability::to_string(rep.verdict);
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["lhs_stderr"] = rep.lhs_se;
  j["rhs_stderr"] = rep.rhs_se;
  j["frame"] = rep.frame;
  j["inputs"] = rep.inputs;
  j["extras"] = rep.extras;
  if (std::isfinite(rep.mu_hat)) {
    j["mu_hat"] = rep.mu_hat;
    j["mu_band"] = {rep.mu_lo, rep.mu_hi};
  }
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

int verdict_code(stability::Verdict v) {
  switch (v) {
    case stability::Verdict::pass: return 0;
    case stability::Verdict::fail: return 1;
    default: return 2;
  }
}

// flat JSON config merged under CLI flags (CLI wins); nested blocks use the
// top-level key as a prefix, e.g. {"noise": {"hurst": 0.4}} -> noise.hurst
json load_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      std::ifstream is(argv[i + 1]);
      if (!is) throw std::runtime_error(std::string("config: cannot open ") + argv[i + 1]);
      json j;
      try {
        is >> j;
      } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
      }
      return j;
    }
  return json::object();
}

template <typename T>
void config_default(const json& cfg, const std::string& dotted, T& target) {
  const json* cur = &cfg;
  std::size_t pos = 0;
  std::string key = dotted;
  while (true) {
    auto dot = key.find('.');
    if (dot == std::string::npos) break;
    std::string head = key.substr(0, dot);
    if (!cur->contains(head)) return;
    cur = &(*cur)[head];
    key = key.substr(dot + 1);
    (void)pos;
  }
  if (cur->contains(key)) {
    try {
      target = (*cur)[key].get<T>();
    } catch (const json::exception& e) {
      throw std::runtime_error("config field '" + dotted + "': " + e.what());
    }
  }
}

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error("expected a matrix (array of rows) in field: " + field);
  Mat out(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw std::runtime_error("ragged matrix in field: " + field);
    for (std::size_t c = 0; c < j[r].size(); ++c) out(static_cast<int>(r), static_cast<int>(c)) =
        j[r][c].get<double>();
  }
  return out;
}

// declared-model families beyond the presets: linear drift or polynomial
// drift with a constant diffusion block, plus optional declared bounds
fields::SystemModel model_from_config(const json& m) {
  const std::string family = m.at("family").get<std::string>();
  fields::SystemModel out;
  if (family == "linear") {
    out = models::linear(matrix_from_json(m.at("drift"), "model.drift"),
                         matrix_from_json(m.at("diffusion"), "model.diffusion"));
  } else if (family == "polynomial") {
    int dim = m.at("dim").get<int>();
    std::vector<std::vector<models::PolyTerm>> comps;
    for (const auto& comp : m.at("components")) {
      std::vector<models::PolyTerm> terms;
      for (const auto& t : comp) {
        models::PolyTerm term;
        term.coef = t.at("coef").get<double>();
        term.exponents = t.at("exponents").get<std::vector<int>>();
        if (static_cast<int>(term.exponents.size()) != dim)
          throw std::runtime_error("exponent list length must equal dim (field: model.components)");
        terms.push_back(std::move(term));
      }
      comps.push_back(std::move(terms));
    }
    out = models::polynomial(dim, comps, matrix_from_json(m.at("diffusion"), "model.diffusion"),
                             m.value("ball_radius", 1.0));
  } else {
    throw std::runtime_error("unknown model family '" + family + "' (field: model.family)");
  }
  if (m.contains("bounds")) {
    const auto& b = m.at("bounds");
    out.bounds.g_inf = b.value("g_inf", out.bounds.g_inf);
    out.bounds.dg_inf = b.value("dg_inf", out.bounds.dg_inf);
    out.bounds.d2g_inf = b.value("d2g_inf", out.bounds.d2g_inf);
    out.bounds.d3g_inf = b.value("d3g_inf", out.bounds.d3g_inf);
    out.bounds.ball_radius = b.value("ball_radius", out.bounds.ball_radius);
  }
  if (m.contains("lipschitz_f")) out.lipschitz_f = m.at("lipschitz_f").get<double>();
  return out;
}

fields::SystemModel model_from_flags(const std::string& preset, double alpha, double sigma,
                                     double ball, double mu, double scale, const json& cfg) {
  if (preset == "pitchfork") return models::pitchfork(alpha, sigma, ball);
  if (preset == "counterexample") return models::counterexample(mu, sigma, ball);
  if (preset == "fhn") {
    auto fp = experiments::fhn_fixed_point();
    return models::fhn(models::FhnParams{}, scale, fp.point(0) - 1.0, fp.point(1) - 1.0);
  }
  if (preset == "config") {
    if (!cfg.contains("model"))
      throw std::runtime_error("--preset config needs a model block (field: model)");
    return model_from_config(cfg.at("model"));
  }
  throw std::runtime_error("unknown preset '" + preset + "' (field: preset)");
}

struct ManifestTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rough-path stability toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  json cfg;
  try {
    cfg = load_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::string config_file;
  app.add_option("--config", config_file, "JSON config merged under CLI flags");

  int jobs = 0;
  app.add_option("--jobs", jobs, "worker count (default: available parallelism)");
  std::string format = "json";
  app.add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  // shared noise flags, initialized from the config block
  noise::NoiseSpec noise_spec;
  std::string kind_str = "fbm";
  config_default(cfg, "noise.kind", kind_str);
  config_default(cfg, "noise.hurst", noise_spec.hurst);
  config_default(cfg, "noise.dim", noise_spec.dim);
  config_default(cfg, "noise.horizon", noise_spec.horizon);
  config_default(cfg, "noise.steps", noise_spec.fine_steps);
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_noise_flags = [&](CLI::App* cmd) {
    cmd->add_option("--kind", kind_str, "fbm|bm-ito|bm-strat");
    cmd->add_option("--hurst", noise_spec.hurst, "Hurst exponent in (1/3, 1]");
    cmd->add_option("--dim", noise_spec.dim, "driver dimension");
    cmd->add_option("--horizon", noise_spec.horizon, "time horizon T");
    cmd->add_option("--steps", noise_spec.fine_steps, "fine steps over the horizon");
    cmd->add_option("--seed", seed, "RNG seed (RSTAB_SEED fallback)")
        ->each([&](const std::string&) { seed_given = true; });
  };

  // --- sample-noise ---
  auto* cmd_sample = app.add_subcommand("sample-noise", "sample a driver path or lift");
  std::string out_file = "noise.csv";
  bool emit_lift = false, emit_binary = false;
  add_noise_flags(cmd_sample);
  cmd_sample->add_option("--out", out_file, "output file (.csv or .bin)");
  cmd_sample->add_flag("--lift", emit_lift, "emit the level-2 lift, not just the path");
  cmd_sample->add_flag("--binary", emit_binary, "write the versioned binary container");

  // --- pvar ---
  auto* cmd_pvar = app.add_subcommand("pvar", "p-variation norms of a stored path/lift");
  std::string in_file, window_str = "", pvar_kind = "rough";
  double p = 2.5;
  cmd_pvar->add_option("--input", in_file, "CSV or .bin produced by sample-noise")->required();
  cmd_pvar->add_option("--p", p, "variation exponent");
  cmd_pvar->add_option("--window", window_str, "s,t (default: whole horizon)");
  cmd_pvar->add_option("--norm", pvar_kind, "path|area|rough")
      ->check(CLI::IsMember({"path", "area", "rough"}));

  // --- stopping-times ---
  auto* cmd_stop = app.add_subcommand("stopping-times", "greedy stopping times of a driver");
  double gamma = 0.5;
  add_noise_flags(cmd_stop);
  cmd_stop->add_option("--input", in_file, "stored lift (otherwise sampled from noise flags)");
  cmd_stop->add_option("--gamma", gamma, "threshold")->required();
  cmd_stop->add_option("--p", p, "variation exponent");
  cmd_stop->add_option("--window", window_str, "s,t (default: whole horizon)");

  // --- estimate-en ---
  auto* cmd_en = app.add_subcommand("estimate-en", "Monte Carlo E N*(gamma, x, [0,1])");
  int en_paths = 200;
  bool birkhoff = false;
  add_noise_flags(cmd_en);
  cmd_en->add_option("--gamma", gamma, "threshold")->required();
  cmd_en->add_option("--p", p, "variation exponent");
  cmd_en->add_option("--paths", en_paths, "Monte Carlo paths");
  cmd_en->add_flag("--birkhoff", birkhoff, "also audit tau_n/n along one long path");

  // --- simulate ---
  auto* cmd_sim = app.add_subcommand("simulate", "run the Milstein-type scheme");
  std::string preset = "pitchfork";
  double alpha = 1.0, sigma = 0.05, ball = 4.0, mu = -1.0, fhn_scale = 1e-4, delta = 0.01;
  std::string y0_str = "0.5";
  config_default(cfg, "model.preset", preset);
  config_default(cfg, "model.alpha", alpha);
  config_default(cfg, "model.sigma", sigma);
  config_default(cfg, "model.ball_radius", ball);
  config_default(cfg, "model.mu", mu);
  config_default(cfg, "model.scale", fhn_scale);
  add_noise_flags(cmd_sim);
  cmd_sim->add_option("--preset", preset, "pitchfork|counterexample|fhn");
  cmd_sim->add_option("--alpha", alpha);
  cmd_sim->add_option("--sigma", sigma);
  cmd_sim->add_option("--mu", mu);
  cmd_sim->add_option("--scale", fhn_scale, "FHN diffusion scale");
  cmd_sim->add_option("--ball", ball, "bound-declaration ball radius");
  cmd_sim->add_option("--delta", delta, "scheme step");
  cmd_sim->add_option("--y0", y0_str, "comma-separated initial state");
  cmd_sim->add_option("--out", out_file, "trajectory CSV");

  // --- audit ---
  auto* cmd_audit = app.add_subcommand("audit", "pathwise proposition audits");
  std::string prop = "solest";
  int audit_paths = 20;
  double audit_scale = 0.002;
  add_noise_flags(cmd_audit);
  cmd_audit->add_option("--prop", prop, "solest|solestdiff|hnew")
      ->check(CLI::IsMember({"solest", "solestdiff", "hnew"}));
  cmd_audit->add_option("--paths", audit_paths, "number of sampled windows");
  cmd_audit->add_option("--scale", audit_scale, "diffusion scale of the audited model");

  // --- criterion ---
  auto* cmd_crit = app.add_subcommand("criterion", "evaluate a stability criterion");
  std::string theorem = "continuous";
  fields::CriterionParams params;
  int members = 200;
  double t_burn = 50.0, trunc = 50.0, gamma_bar = 1.0, eps0 = 0.5;
  config_default(cfg, "criterion.lambda", params.lambda);
  config_default(cfg, "criterion.gamma_star", params.gamma_star);
  config_default(cfg, "criterion.r", params.r);
  config_default(cfg, "criterion.cp", params.cp_override);
  config_default(cfg, "criterion.p", params.p);
  add_noise_flags(cmd_crit);
  cmd_crit->add_option("--theorem", theorem, "continuous|discrete|discrete-dissipative|trivial")
      ->check(CLI::IsMember({"continuous", "discrete", "discrete-dissipative", "trivial"}));
  cmd_crit->add_option("--preset", preset, "pitchfork|counterexample|fhn");
  cmd_crit->add_option("--alpha", alpha);
  cmd_crit->add_option("--sigma", sigma);
  cmd_crit->add_option("--mu", mu);
  cmd_crit->add_option("--scale", fhn_scale);
  cmd_crit->add_option("--ball", ball);
  cmd_crit->add_option("--lambda", params.lambda);
  cmd_crit->add_option("--gamma-star", params.gamma_star);
  cmd_crit->add_option("--r", params.r);
  cmd_crit->add_option("--cp", params.cp_override, "override the sewing constant");
  cmd_crit->add_option("--p", params.p);
  cmd_crit->add_option("--paths", en_paths, "Monte Carlo paths for the expectations");
  cmd_crit->add_option("--members", members, "stationary ensemble size");
  cmd_crit->add_option("--delta", delta, "scheme step (discrete theorems)");
  cmd_crit->add_option("--t-burn", t_burn, "burn-in span (discrete theorems)");
  cmd_crit->add_option("--truncation", trunc, "pitchfork stationary-integral truncation");
  cmd_crit->add_option("--gamma-bar", gamma_bar, "Gamma-bar constant (dissipative theorem)");
  cmd_crit->add_option("--eps0", eps0, "ball radius for the trivial-solution constants");

  // --- experiment ---
  auto* cmd_exp = app.add_subcommand("experiment", "reproducible paper presets");
  std::string out_dir = "out";
  int exp_seeds = 200;
  add_noise_flags(cmd_exp);
  cmd_exp->add_option("--preset", preset, "pitchfork|counterexample|fhn");
  cmd_exp->add_option("--out", out_dir, "output directory")->required();
  cmd_exp->add_option("--paths", exp_seeds, "Monte Carlo size");
  cmd_exp->add_option("--sigma", sigma);
  cmd_exp->add_option("--alpha", alpha);
  cmd_exp->add_option("--mu", mu);
  cmd_exp->add_option("--delta", delta);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::cout.precision(17);
    noise_spec.kind = parse_kind(kind_str);
    noise_spec.seed = seed_or_env(seed, seed_given);
    ManifestTimer timer;

    if (*cmd_sample) {
      noise_spec.validate();
      json j;
      if (emit_lift || emit_binary) {
        auto rp = noise::sample_lift(noise_spec);
        if (emit_binary)
          io::write_binary(out_file, rp);
        else
          io::write_csv(out_file, rp);
        j["points"] = rp.size();
      } else {
        auto path = noise::sample_path(noise_spec);
        io::write_csv(out_file, path);
        j["points"] = path.size();
      }
      j["file"] = out_file;
      j["seed"] = noise_spec.seed;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*cmd_pvar) {
      double value = 0.0;
      if (pvar_kind == "path") {
        auto path = io::read_path_csv(in_file);
        auto [s, t] = window_str.empty()
                          ? std::pair{path.times.front(), path.times.back()}
                          : parse_window(window_str);
        value = rough::pvar_norm(path, p, s, t);
      } else {
        auto rp = load_lift(in_file);
        auto [s, t] = window_str.empty()
                          ? std::pair{rp.base.times.front(), rp.base.times.back()}
                          : parse_window(window_str);
        value = pvar_kind == "area" ? rough::qvar_area_norm(rp, p / 2.0, s, t)
                                    : rough::rough_norm(rp, p, s, t);
      }
      if (format == "csv")
        std::cout << value << "\n";
      else
        std::cout << json{{"norm", value}, {"p", p}}.dump(2) << "\n";
      return 0;
    }

    if (*cmd_stop) {
      rough::RoughPathGrid rp = in_file.empty() ? noise::sample_lift(noise_spec)
                                                : load_lift(in_file);
      auto [s, t] = window_str.empty() ? std::pair{rp.base.times.front(), rp.base.times.back()}
                                       : parse_window(window_str);
      auto seq = stopping::greedy_times(rp, p, gamma, rp.index_of(s), rp.index_of(t));
      json j;
      j["gamma"] = gamma;
      j["times"] = seq.times;
      j["count"] = stopping::count_Nstar(seq);
      j["bound"] = stopping::bound_Nstar(rp, p, gamma, rp.index_of(s), rp.index_of(t));
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*cmd_en) {
      auto est = stopping::estimate_EN(noise_spec, p, gamma, en_paths, nullptr, jobs, birkhoff);
      json j{{"mean", est.mean}, {"stderr", est.stderr_}, {"n_paths", est.n_paths}};
      if (birkhoff) {
        j["birkhoff_ratio"] = est.birkhoff_ratio;
        j["birkhoff_bound"] = est.birkhoff_bound;
        j["birkhoff_ok"] = est.birkhoff_ok;
      }
      if (format == "csv")
        std::cout << est.mean << "," << est.stderr_ << "," << est.n_paths << "\n";
      else
        std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*cmd_sim) {
      auto model = model_from_flags(preset, alpha, sigma, ball, mu, fhn_scale, cfg);
      noise_spec.dim = model.noise_dim;
      if (preset == "counterexample") noise_spec.kind = noise::NoiseKind::bm_ito;
      noise_spec.validate();
      auto fine = noise::sample_lift(noise_spec);
      double fine_dt = fine.base.step();
      int stride = static_cast<int>(std::lround(delta / fine_dt));
      if (stride < 1 || std::abs(stride * fine_dt - delta) > 1e-12)
        throw std::runtime_error("delta must be a multiple of the fine mesh (field: delta)");
      auto rp = stride == 1 ? fine : rough::coarsen(fine, stride);
      Vec y0(model.dim);
      {
        std::stringstream ss(y0_str);
        std::string cell;
        int i = 0;
        while (std::getline(ss, cell, ',') && i < model.dim) y0(i++) = std::stod(cell);
        if (i != model.dim) throw std::runtime_error("y0 needs dim entries (field: y0)");
      }
      auto run = schemes::simulate(model, rp, y0);
      io::write_csv(out_file, run.trajectory, "y");
      std::cout << json{{"file", out_file},
                        {"points", run.trajectory.size()},
                        {"delta", run.delta},
                        {"seed", noise_spec.seed}}
                       .dump(2)
                << "\n";
      return 0;
    }

    if (*cmd_audit) {
      json margins = json::array();
      bool all_ok = true;
      for (int i = 0; i < audit_paths; ++i) {
        noise::NoiseSpec s = noise_spec;
        s.dim = 2;
        s.seed = split_seed(noise_spec.seed, i);
        auto rp = noise::sample_lift(s);
        int last = rp.size() - 1;
        if (prop == "hnew") {
          auto model = models::pitchfork(-1.0, audit_scale, 1.0);
          fields::CriterionParams prm;
          prm.lambda = 0.1;
          prm.r = 0.25;
          noise::NoiseSpec s1 = s;
          s1.dim = 1;
          auto rp1 = noise::sample_lift(s1);
          Vec a0 = Vec::Zero(1);
          Vec y0 = Vec::Constant(1, prm.r / (16.0 * (1.0 + prm.cp())));
          auto a_run = schemes::simulate(model, rp1, a0);
          auto y_run = schemes::simulate(model, rp1, y0);
          auto S = schemes::discrete_controls(model, rp1, a_run.trajectory, prm);
          auto seq = stopping::greedy_times_controls(S, prm.lambda, rp1.base.times, 0,
                                                     rp1.size() - 1);
          for (std::size_t w = 0; w + 1 < seq.idx.size(); ++w) {
            auto audit = schemes::audit_hnew(model, rp1, y_run.trajectory, a_run.trajectory,
                                             seq.idx[w], seq.idx[w + 1], prm);
            if (!audit.hypothesis_ok) continue;
            json entry;
            entry["seed"] = s1.seed;
            entry["window"] = {seq.idx[w], seq.idx[w + 1]};
            entry["lhs"] = audit.lhs;
            entry["rhs"] = audit.rhs;
            entry["holds"] = audit.holds();
            margins.push_back(std::move(entry));
            all_ok = all_ok && audit.holds();
          }
          continue;
        }
        fields::SystemModel model;
        {
          // bounded saturated diffusion with g(0) = 0 for the solest audits
          double c = audit_scale;
          model.dim = 2;
          model.noise_dim = 2;
          model.f = [](const Vec& y) { return Vec(-y); };
          model.jac = [](const Vec&) { return Mat(-Mat::Identity(2, 2)); };
          model.g = [c](const Vec& y) {
            Mat G = Mat::Zero(2, 2);
            G(0, 0) = c * std::tanh(y(0));
            G(1, 1) = c * std::tanh(y(1));
            return G;
          };
          model.dg = [c](const Vec& y, const Vec& v) {
            Mat G = Mat::Zero(2, 2);
            for (int k = 0; k < 2; ++k) {
              double ch = std::cosh(y(k));
              G(k, k) = c * v(k) / (ch * ch);
            }
            return G;
          };
          double rt = std::sqrt(2.0);
          model.bounds.g_inf = c * rt;
          model.bounds.dg_inf = c * rt;
          model.bounds.d2g_inf = 0.77 * c * rt;
          model.bounds.d3g_inf = 2.0 * c * rt;
        }
        Vec start = (Vec(2) << 0.4, -0.2).finished();
        auto rep = prop == "solest"
                       ? flow::audit_solest(model, rp, 0, last, start, true, params.p)
                       : flow::audit_solestdiff(model, rp, 0, last, start,
                                                (Vec(2) << -0.1, 0.3).finished(), params.p);
        json entry;
        entry["seed"] = s.seed;
        entry["lambda"] = rep.lambda;
        entry["precondition"] = rep.precondition_ok;
        for (const auto& c2 : rep.checks) {
          json side;
          side["lhs"] = c2.lhs;
          side["rhs"] = c2.rhs;
          side["holds"] = c2.holds();
          entry[c2.label] = side;
          if (rep.precondition_ok) all_ok = all_ok && c2.holds();
        }
        margins.push_back(std::move(entry));
      }
      std::cout << margins.dump(2) << "\n";
      return all_ok ? 0 : 1;
    }

    if (*cmd_crit) {
      params.validate_discrete();  // broadest range; theorem-specific below
      stability::StabilityReport rep;
      int code = 2;
      if (theorem == "continuous" || theorem == "trivial") {
        auto model = model_from_flags(preset, alpha, sigma, ball, mu, fhn_scale, cfg);
        stability::StationaryEnsemble ens;
        if (theorem == "trivial") {
          // trivial solution: a = 0 with the ball-restricted constant C*_g
          if (model.f(Vec::Zero(model.dim)).norm() > 1e-12 ||
              model.g(Vec::Zero(model.dim)).norm() > 1e-12)
            throw std::runtime_error("trivial criterion needs f(0) = 0 and g(0) = 0");
          model.bounds.ball_radius = eps0;
          model.bounds.g_inf = std::min(model.bounds.g_inf, model.bounds.dg_inf * eps0);
          for (int i = 0; i < std::max(members, 2); ++i) {
            stability::EnsembleMember mem;
            mem.a0 = Vec::Zero(model.dim);
            mem.traj = rough::GridPath::uniform(0.0, 0.5, Mat::Zero(model.dim, 3));
            ens.members.push_back(std::move(mem));
          }
        } else if (preset == "pitchfork") {
          experiments::PitchforkEnsembleConfig ecfg;
          ecfg.alpha = alpha;
          ecfg.sigma = sigma;
          ecfg.hurst = noise_spec.hurst;
          ecfg.truncation = trunc;
          ecfg.fine_per_unit = noise_spec.fine_steps;
          ecfg.n_members = members;
          ecfg.seed = noise_spec.seed;
          ecfg.ball_radius = ball;
          ens = experiments::pitchfork_ensemble(ecfg, jobs);
        } else {
          throw std::runtime_error(
              "continuous criterion needs a stationary ensemble; supported presets: pitchfork "
              "(closed form) or use --theorem trivial (field: preset)");
        }
        params.validate_continuous();
        rep = stability::criterion_continuous(model, params, ens, noise_spec, en_paths, true, jobs);
        if (theorem == "trivial") rep.criterion = "trivial(main1 via Anegdef)";
        code = verdict_code(rep.verdict);
        std::cout << report_json(rep).dump(2) << "\n";
      } else if (theorem == "discrete") {
        auto model = model_from_flags(preset, alpha, sigma, ball, mu, fhn_scale, cfg);
        Vec sa = Vec::Constant(model.dim, 0.5), sb = Vec::Constant(model.dim, -0.5);
        auto result = stability::criterion_discrete(model, params, noise_spec, delta, en_paths,
                                                    t_burn, sa, sb, jobs);
        json j;
        j["cond"] = report_json(result.cond);
        j["criterion"] = report_json(result.criterion);
        j["hnew_windows"] = result.hnew_windows;
        j["hnew_hypothesis_windows"] = result.hnew_hypothesis_windows;
        j["hnew_violations"] = result.hnew_violations;
        std::cout << j.dump(2) << "\n";
        bool pass = result.cond.verdict == stability::Verdict::pass &&
                    result.criterion.verdict == stability::Verdict::pass;
        bool fail = result.cond.verdict == stability::Verdict::fail ||
                    result.criterion.verdict == stability::Verdict::fail;
        code = pass ? 0 : (fail ? 1 : 2);
      } else {  // discrete-dissipative
        auto model = model_from_flags(preset, alpha, sigma, ball, mu, fhn_scale, cfg);
        Vec sa = Vec::Constant(model.dim, 0.5), sb = Vec::Constant(model.dim, -0.5);
        auto inner = stability::criterion_discrete(model, params, noise_spec, delta,
                                                   std::min(en_paths, 32), t_burn, sa, sb, jobs);
        rep = stability::criterion_discrete_dissipative(model, params, noise_spec, delta,
                                                        gamma_bar, inner.cond.lhs,
                                                        inner.cond.lhs_se, en_paths, jobs);
        code = verdict_code(rep.verdict);
        std::cout << report_json(rep).dump(2) << "\n";
      }
      return code;
    }

    if (*cmd_exp) {
      std::filesystem::create_directories(out_dir);
      std::string cmdline;
      for (int i = 0; i < argc; ++i) cmdline += std::string(i ? " " : "") + argv[i];
      json summary;
      std::vector<std::string> outputs;

      if (preset == "counterexample") {
        auto rep = experiments::run_counterexample(mu, sigma, delta, exp_seeds, noise_spec.seed,
                                                   jobs);
        summary["decay_rate_eta"] = rep.decay_rate_eta;
        summary["track_rel_err_t1"] = rep.track_rel_err_t1;
        summary["threshold_estimate"] = rep.threshold_estimate;
        summary["sweep"] = rep.sweep;
        // gnuplot-ready (t, ||y||^2, logistic) table for one path
        auto model = models::counterexample(mu, sigma);
        noise::NoiseSpec s = noise_spec;
        s.kind = noise::NoiseKind::bm_ito;
        s.dim = 1;
        s.fine_steps = static_cast<int>(std::lround(1.0 / delta));
        s.horizon = 1.0;
        s.seed = split_seed(noise_spec.seed, 0);
        auto rp = noise::sample_lift(s);
        Vec y0 = (Vec(2) << 0.12, 0.16).finished();
        auto run = schemes::simulate(model, rp, y0);
        std::ofstream table(out_dir + "/eta_vs_logistic.dat");
        table.precision(12);
        for (int k = 0; k < run.trajectory.size(); ++k) {
          double tt = run.trajectory.times[static_cast<std::size_t>(k)];
          table << tt << " " << run.trajectory.value(k).squaredNorm() << " "
                << experiments::logistic_eta(mu, sigma, y0.squaredNorm(), tt) << "\n";
        }
        outputs.push_back(out_dir + "/eta_vs_logistic.dat");
      } else if (preset == "fhn") {
        experiments::FhnSweepConfig fcfg;
        fcfg.seed = noise_spec.seed;
        fcfg.members = std::min(exp_seeds, 48);
        auto rep = experiments::run_fhn(fcfg, jobs);
        summary["fixed_point"] = {rep.fixed_point.point(0), rep.fixed_point.point(1)};
        summary["residual"] = rep.fixed_point.residual;
        summary["ell_raw"] = rep.ell_raw;
        summary["ell_transformed"] = rep.ell_transformed;
        summary["spearman"] = rep.spearman;
        summary["first_passing_level"] = rep.first_passing;
        json levels = json::array();
        for (const auto& lv : rep.levels)
          levels.push_back(json{{"scale", lv.scale},
                                {"cg", lv.cg},
                                {"verdict", stability::to_string(lv.report.verdict)},
                                {"distance", lv.distance},
                                {"decay_fraction", lv.decay_fraction}});
        summary["levels"] = levels;
      } else {  // pitchfork
        experiments::PitchforkEnsembleConfig ecfg;
        ecfg.alpha = alpha;
        ecfg.sigma = sigma;
        ecfg.hurst = noise_spec.hurst;
        ecfg.n_members = exp_seeds;
        ecfg.fine_per_unit = noise_spec.fine_steps;
        ecfg.seed = noise_spec.seed;
        auto ens = experiments::pitchfork_ensemble(ecfg, jobs);
        double mean_c2 = 0.0;
        for (const auto& mem : ens.members) mean_c2 += mem.a0(0) * mem.a0(0);
        mean_c2 /= static_cast<double>(ens.members.size());
        summary["mean_c_squared"] = mean_c2;
        summary["alpha"] = alpha;
        // gnuplot-ready mean log-distance of perturbed runs
        auto model = models::pitchfork(alpha, sigma, 4.0);
        int nplot = std::min<int>(16, static_cast<int>(ens.members.size()));
        std::vector<double> acc;
        int npts = ens.members.front().traj.size();
        acc.assign(static_cast<std::size_t>(npts), 0.0);
        for (int i = 0; i < nplot; ++i) {
          const auto& mem = ens.members[static_cast<std::size_t>(i)];
          Vec y0 = mem.a0 + Vec::Constant(1, 1e-4);
          auto run = schemes::simulate(model, mem.driver, y0);
          for (int k = 0; k < npts; ++k)
            acc[static_cast<std::size_t>(k)] +=
                std::log((run.trajectory.value(k) - mem.traj.value(k)).norm() + 1e-300);
          if (i < 4) {
            std::string pf = out_dir + "/member_" + std::to_string(i) + ".csv";
            io::write_csv(pf, mem.traj);
            outputs.push_back(pf);
          }
        }
        std::ofstream table(out_dir + "/mean_log_distance.dat");
        table.precision(12);
        for (int k = 0; k < npts; ++k)
          table << ens.members.front().traj.times[static_cast<std::size_t>(k)] << " "
                << acc[static_cast<std::size_t>(k)] / nplot << "\n";
        outputs.push_back(out_dir + "/mean_log_distance.dat");
      }

      summary["seed"] = noise_spec.seed;
      std::ofstream sf(out_dir + "/summary.json");
      sf << summary.dump(2) << "\n";
      outputs.push_back(out_dir + "/summary.json");
      {
        std::ofstream cf(out_dir + "/config_echo.json");
        json echo = cfg;
        echo["command_line"] = cmdline;
        cf << echo.dump(2) << "\n";
        outputs.push_back(out_dir + "/config_echo.json");
      }
      io::Manifest man;
      man.command_line = cmdline;
      char hash_buf[32];
      std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                    static_cast<unsigned long long>(io::fnv1a(cmdline + cfg.dump())));
      man.config_hash = hash_buf;
      man.seed = noise_spec.seed;
      man.wall_seconds = timer.seconds();
      man.outputs = outputs;
      io::write_manifest(out_dir, man);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << " at line " << e.line << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}
