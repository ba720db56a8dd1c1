#include "bts_cli/app.hpp"

#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "bts/errors.hpp"
#include "bts/rng.hpp"
#include "bts_cli/commands.hpp"

namespace bts::cli {

namespace {

struct Described {
  const char* name;
  const char* text;
};

constexpr Described kDescriptions[] = {
    {"exact", "exact distance curve and mixing times on S_N (N <= 8)"},
    {"simulate", "full marking runs: per-trial phase-one and full marking times"},
    {"marking", "chi-square uniformity of the deck at full marking (N <= 8)"},
    {"typechain", "transition rows and expected absorption times of the type chain"},
    {"lowerbound", "Monte Carlo lower bound on total variation from fixed type-A cards"},
    {"conjecture", "binomial-weighted harmonic sum probe"},
};

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BTS_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

}  // namespace

ParseOutcome parse_config(int argc, const char* const* argv) {
  ParseOutcome po;
  auto& cfg = po.config;
  cfg.seed = kDefaultSeed;

  CLI::App app{"Biased transposition shuffle laboratory", "bts"};
  app.set_version_flag("--version", version());
  app.set_config("--config", "", "TOML file of parameter values; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.allow_extras();
  app.require_subcommand(1, 1);

  app.add_option("--n", cfg.n, "cards per type (deck size N = 2n)")->capture_default_str();
  app.add_option("--a", cfg.a, "weight of type-A cards, 0 < a <= 1; type B gets 2 - a")
      ->capture_default_str();
  app.add_option("--c1", cfg.c1, "phase-two threshold fraction, in (1/2, 1); 0 derives it from --mark-eps")
      ->capture_default_str();
  app.add_option("--mark-eps", cfg.mark_eps, "sets c1 = (1 + 1/(1 + mark-eps)) / 2 when --c1 is 0")
      ->capture_default_str();
  app.add_option("--eps", cfg.eps, "distance level for mixing times")->capture_default_str();
  app.add_option("--K", cfg.K, "fixed-point threshold; 0 derives K = ceil(N^delta)")
      ->capture_default_str();
  app.add_option("--delta", cfg.delta, "exponent for K when --K is 0")->capture_default_str();
  app.add_option("--t", cfg.t, "explicit time grid (comma separated)")->delimiter(',');
  app.add_option("--t-max", cfg.t_max, "exact: last time of the curve; 0 runs to the mixing time")
      ->capture_default_str();
  app.add_option("--t-scale", cfg.t_scale,
                 "lowerbound: times as multiples of N log N / (2a) (comma separated)")
      ->delimiter(',');
  app.add_option("--trials", cfg.trials, "Monte Carlo trials; 0 picks the command default")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  app.add_option("--const-term", cfg.const_term, "additive constant in the phase-two bound")
      ->capture_default_str();
  app.add_option("--conditional-m", cfg.conditional_m,
                 "marking: conditional test at the first time m cards are marked (0: threshold)")
      ->capture_default_str();
  app.add_flag("--always-accept", cfg.always_accept,
               "marking: accept every marking proposal (negative control)");
  app.add_option("--deck-cap", cfg.deck_cap, "exact: largest deck accepted (at most 8)")
      ->capture_default_str();
  app.add_option("--out-dir", po.settings.out_dir,
                 "output directory (default: $BTS_OUTPUT_DIR, else the working directory)");
  app.add_option("--workers", po.settings.workers, "worker threads; 0 uses $BTS_WORKERS or all cores")
      ->capture_default_str();

  for (const auto& d : kDescriptions) {
    auto* sub = app.add_subcommand(d.name, d.text);
    sub->fallthrough();
    sub->allow_extras();
    sub->callback([&cfg, name = std::string(d.name)] { cfg.command = name; });
  }

  if (argc <= 1) {
    po.exit_code = kExitUsage;
    po.message = app.help();
    return po;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    po.exit_code = kExitOk;
    po.message = app.help();
    return po;
  } catch (const CLI::CallForAllHelp&) {
    po.exit_code = kExitOk;
    po.message = app.help("", CLI::AppFormatMode::All);
    return po;
  } catch (const CLI::CallForVersion&) {
    po.exit_code = kExitOk;
    po.message = std::string(version()) + "\n";
    return po;
  } catch (const CLI::ParseError& e) {
    po.exit_code = kExitUsage;
    po.message = std::string("error: ") + e.what() + "\n";
    return po;
  }

  std::vector<std::string> extras = app.remaining(true);
  if (!extras.empty()) {
    std::string msg = "error: unrecognized arguments:";
    for (const auto& x : extras) msg += " " + x;
    po.exit_code = kExitUsage;
    po.message = msg + "\n";
    return po;
  }

  po.settings.out_dir = resolve_out_dir(po.settings.out_dir);
  resolve_defaults(cfg);
  try {
    validate(cfg);
  } catch (const PreconditionError& e) {
    po.exit_code = kExitUsage;
    po.message = std::string("error: ") + e.what() + "\n";
    return po;
  }
  po.proceed = true;
  return po;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto po = parse_config(argc, argv);
  if (!po.proceed) {
    (po.exit_code == kExitOk ? out : err) << po.message;
    return po.exit_code;
  }
  try {
    for (const auto& path : run_command(po.config, po.settings)) out << path.string() << '\n';
    return kExitOk;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace bts::cli
