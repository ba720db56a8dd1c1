#include "bts_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <list>
#include <sstream>
#include <string>

#include "bts/bounds.hpp"
#include "bts/chain.hpp"
#include "bts/errors.hpp"
#include "bts/exact.hpp"
#include "bts/marking.hpp"
#include "bts/parallel.hpp"
#include "bts/stats.hpp"
#include "bts/type_chain.hpp"

namespace bts::cli {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string f(double x) { return format_double(x); }

class Output {
 public:
  Output(const ExperimentConfig& cfg, const RunSettings& settings)
      : cfg_(cfg), dir_(settings.out_dir.empty() ? fs::path(".") : fs::path(settings.out_dir)) {}

  std::ostringstream& csv(const std::string& name, const std::string& columns) {
    auto& s = csv_.emplace_back(name, std::ostringstream{}).second;
    s << header_line(cfg_) << '\n' << columns << '\n';
    return s;
  }

  ordered_json& json(const std::string& name) {
    auto& j = json_.emplace_back(name, ordered_json{}).second;
    j["version"] = version();
    j["config"] = to_json(cfg_);
    return j;
  }

  std::vector<fs::path> flush() {
    fs::create_directories(dir_);
    std::vector<fs::path> written;
    auto put = [&](const std::string& name, const std::string& body) {
      const auto path = dir_ / name;
      std::ofstream os(path, std::ios::binary | std::ios::trunc);
      os << body;
      if (!os) throw std::runtime_error("cannot write " + path.string());
      written.push_back(path);
    };
    for (auto& [name, s] : csv_) put(name, s.str());
    for (auto& [name, j] : json_) put(name, j.dump(2) + "\n");
    return written;
  }

 private:
  const ExperimentConfig& cfg_;
  fs::path dir_;
  std::list<std::pair<std::string, std::ostringstream>> csv_;
  std::list<std::pair<std::string, ordered_json>> json_;
};

std::size_t workers_of(const RunSettings& s) {
  return s.workers == 0 ? default_workers() : s.workers;
}

MarkingOptions marking_options(const ExperimentConfig& cfg) {
  MarkingOptions o;
  o.c1 = cfg.c1;
  o.always_accept = cfg.always_accept;
  return o;
}

std::vector<fs::path> run_exact(const ExperimentConfig& cfg, const RunSettings& rs) {
  const auto profile = BiasProfile::make(cfg.n, cfg.a);
  const auto op = build_operator(profile, cfg.deck_cap);
  const auto workers = workers_of(rs);
  const auto times = mixing_times(op, cfg.eps, 1u << 20, workers);

  std::vector<std::uint64_t> ts = cfg.t;
  if (ts.empty()) {
    const std::uint64_t last = cfg.t_max > 0 ? cfg.t_max : times.separation;
    for (std::uint64_t t = 0; t <= last; ++t) ts.push_back(t);
  }
  const auto curve = cutoff_profile(op, ts, workers);

  Output out(cfg, rs);
  auto& csv = out.csv("exact.csv", "t,tv,sep");
  for (const auto& p : curve) csv << p.t << ',' << f(p.tv) << ',' << f(p.sep) << '\n';
  auto& j = out.json("exact.json");
  j["deck_size"] = profile.deck_size();
  j["states"] = op.state_count();
  j["eps"] = cfg.eps;
  j["tv_mixing_time"] = times.tv;
  j["separation_mixing_time"] = times.separation;
  return out.flush();
}

std::vector<fs::path> run_simulate(const ExperimentConfig& cfg, const RunSettings& rs) {
  const auto profile = BiasProfile::make(cfg.n, cfg.a);
  const auto opts = marking_options(cfg);
  const std::size_t trials = cfg.trials;
  std::vector<std::uint64_t> t1(trials), tn(trials);
  parallel_for(trials, workers_of(rs), [&](std::size_t i) {
    auto rng = trial_rng(cfg.seed, i);
    const auto rec = run_to_full_marking(profile, opts, rng);
    t1[i] = rec.t_phase1;
    tn[i] = rec.t_full;
  });

  Output out(cfg, rs);
  auto& csv = out.csv("simulate.csv", "trial,T_phase1,T_full");
  std::vector<double> full(trials), phase1(trials), phase2(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    csv << i << ',' << t1[i] << ',' << tn[i] << '\n';
    full[i] = static_cast<double>(tn[i]);
    phase1[i] = static_cast<double>(t1[i]);
    phase2[i] = static_cast<double>(tn[i] - t1[i]);
  }

  const auto N = static_cast<double>(profile.deck_size());
  const auto mf = stats::moments(full);
  const auto m1 = stats::moments(phase1);
  const auto m2 = stats::moments(phase2);
  const double med = stats::median(full);

  auto& j = out.json("simulate.json");
  j["deck_size"] = profile.deck_size();
  j["threshold"] = phase_two_threshold(profile.deck_size(), cfg.c1);
  j["T_full"] = {{"mean", mf.mean}, {"stderr", mf.stderr_mean}, {"median", med},
                 {"variance", mf.variance}};
  j["T_phase1"] = {{"mean", m1.mean}, {"stderr", m1.stderr_mean}};
  j["T_phase2"] = {{"mean", m2.mean}, {"stderr", m2.stderr_mean}, {"variance", m2.variance}};
  j["expected_T_full"] = expected_full_marking_time(profile, cfg.c1);
  j["expected_T_phase1"] = expected_phase_one_time(profile, cfg.c1);
  j["variance_bound"] = variance_bound(profile.deck_size(), cfg.a, cfg.c1);
  if (profile.deck_size() >= 3) {
    j["phase2_upper_bound"] = phase2_upper_bound(profile.deck_size(), cfg.a, cfg.c1, cfg.const_term);
    j["N_loglogN"] = N * std::log(std::log(N));
  }
  if (profile.deck_size() >= 2) j["cutoff_ratio"] = 2.0 * cfg.a * med / (N * std::log(N));
  return out.flush();
}

ordered_json conditional_json(const ConditionalUniformity& c) {
  return {{"m", c.m},
          {"classes_seen", c.classes_seen},
          {"classes_tested", c.classes_tested},
          {"chi2", c.statistic},
          {"dof", c.dof},
          {"p_value", c.p_value},
          {"min_class_p_value", c.min_class_p_value}};
}

std::vector<fs::path> run_marking(const ExperimentConfig& cfg, const RunSettings& rs) {
  const auto profile = BiasProfile::make(cfg.n, cfg.a);
  UniformityOptions u;
  u.marking = marking_options(cfg);
  u.conditional_m = cfg.conditional_m;
  u.workers = workers_of(rs);
  const auto rep = uniformity_test(profile, u, cfg.trials, cfg.seed);

  Output out(cfg, rs);
  auto& j = out.json("marking.json");
  j["deck_size"] = rep.deck_size;
  j["trials"] = rep.trials;
  j["cells"] = rep.cells;
  j["chi2"] = rep.statistic;
  j["dof"] = rep.dof;
  j["p_value"] = rep.p_value;
  j["counts"] = rep.counts;
  j["conditional"] = conditional_json(rep.conditional);
  return out.flush();
}

std::vector<fs::path> run_typechain(const ExperimentConfig& cfg, const RunSettings& rs) {
  const auto profile = BiasProfile::make(cfg.n, cfg.a);
  const std::size_t n = cfg.n;
  Output out(cfg, rs);
  auto& rows = out.csv("typechain_rows.csv", "k_a,k_b,p_b_up,p_a_up,p_move,p_stay");
  for (std::size_t ka = 0; ka <= n; ++ka)
    for (std::size_t kb = 0; kb <= n; ++kb) {
      const auto r = k_transitions(n, cfg.a, {ka, kb});
      rows << ka << ',' << kb << ',' << f(r.p_b_up) << ',' << f(r.p_a_up) << ','
           << f(r.p_move) << ',' << f(r.p_stay) << '\n';
    }
  const auto E = expected_absorption_table(n, cfg.a);
  auto& abs = out.csv("typechain_absorption.csv", "k_a,k_b,E");
  for (std::size_t ka = 0; ka <= n; ++ka)
    for (std::size_t kb = 0; kb <= n; ++kb) abs << ka << ',' << kb << ',' << f(E.at(ka, kb)) << '\n';

  auto& j = out.json("typechain.json");
  j["expected_T_phase1"] = expected_phase_one_time(profile, cfg.c1);
  j["expected_T_full"] = expected_full_marking_time(profile, cfg.c1);
  j["variance_bound"] = variance_bound(profile.deck_size(), cfg.a, cfg.c1);
  if (profile.deck_size() >= 3)
    j["phase2_upper_bound"] = phase2_upper_bound(profile.deck_size(), cfg.a, cfg.c1, cfg.const_term);
  return out.flush();
}

std::vector<std::uint64_t> lowerbound_grid(const ExperimentConfig& cfg) {
  if (!cfg.t.empty()) return cfg.t;
  const auto N = static_cast<double>(2 * cfg.n);
  const double unit = N * std::log(N) / (2.0 * cfg.a);
  std::vector<std::uint64_t> ts;
  for (double s : cfg.t_scale) ts.push_back(static_cast<std::uint64_t>(std::llround(s * unit)));
  return ts;
}

std::vector<fs::path> run_lowerbound(const ExperimentConfig& cfg, const RunSettings& rs) {
  const auto profile = BiasProfile::make(cfg.n, cfg.a);
  const std::size_t K = cfg.K > 0 ? cfg.K : threshold_from_delta(profile.deck_size(), cfg.delta);
  const auto ts = lowerbound_grid(cfg);
  const auto curve = tv_lower_bound_curve(profile, ts, K, cfg.trials, cfg.seed, workers_of(rs));

  Output out(cfg, rs);
  auto& csv = out.csv("lowerbound.csv", "t,K,estimate,stderr,uniform_mass,tv_lower_bound");
  for (const auto& p : curve)
    csv << p.estimate.t << ',' << p.estimate.K << ',' << f(p.estimate.estimate) << ','
        << f(p.std_error) << ',' << f(p.uniform_mass) << ',' << f(p.bound) << '\n';
  return out.flush();
}

std::vector<fs::path> run_conjecture(const ExperimentConfig& cfg, const RunSettings& rs) {
  const auto row = harmonic_conjecture_probe(cfg.n, cfg.c1, cfg.a);
  Output out(cfg, rs);
  auto& csv = out.csv("conjecture.csv", "n,c1,a,weighted_sum,harmonic,ratio");
  csv << row.n << ',' << f(row.c1) << ',' << f(row.a) << ',' << f(row.weighted_sum) << ','
      << f(row.harmonic) << ',' << f(row.ratio) << '\n';
  return out.flush();
}

bool is_monte_carlo(const std::string& cmd) {
  return cmd == "simulate" || cmd == "marking" || cmd == "lowerbound";
}

}  // namespace

void resolve_defaults(ExperimentConfig& cfg) {
  if (cfg.c1 == 0.0 && cfg.mark_eps > 0.0) cfg.c1 = c1_from_epsilon(cfg.mark_eps);
  if (cfg.trials == 0) {
    if (cfg.command == "simulate") cfg.trials = 1000;
    if (cfg.command == "marking") cfg.trials = 1'000'000;
    if (cfg.command == "lowerbound") cfg.trials = 10'000;
  }
  if (cfg.command == "lowerbound" && cfg.t.empty() && cfg.t_scale.empty())
    cfg.t_scale = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
}

void validate(const ExperimentConfig& cfg) {
  using detail::require;
  require(std::find(std::begin(kCommands), std::end(kCommands), cfg.command) != std::end(kCommands),
          "unknown command '" + cfg.command + "'");
  (void)BiasProfile::make(cfg.n, cfg.a);
  require(cfg.c1 > 0.5 && cfg.c1 < 1.0, "c1 must lie in (1/2, 1) (got " + f(cfg.c1) + ")");
  require(cfg.mark_eps > 0.0, "mark-eps must be > 0");
  require(cfg.eps > 0.0, "eps must be > 0 (got " + f(cfg.eps) + ")");
  require(cfg.const_term >= 0.0, "const_term must be >= 0");
  require(cfg.K <= cfg.n, "K must be <= n");
  require(cfg.delta > 0.0 && cfg.delta < 1.0, "delta must lie in (0, 1)");
  for (double s : cfg.t_scale) require(s >= 0.0, "t-scale values must be >= 0");
  if (is_monte_carlo(cfg.command)) require(cfg.trials >= 1, "trials must be >= 1");
}

std::vector<fs::path> run_command(const ExperimentConfig& cfg, const RunSettings& settings) {
  validate(cfg);
  if (cfg.command == "exact") return run_exact(cfg, settings);
  if (cfg.command == "simulate") return run_simulate(cfg, settings);
  if (cfg.command == "marking") return run_marking(cfg, settings);
  if (cfg.command == "typechain") return run_typechain(cfg, settings);
  if (cfg.command == "lowerbound") return run_lowerbound(cfg, settings);
  return run_conjecture(cfg, settings);
}

}  // namespace bts::cli
