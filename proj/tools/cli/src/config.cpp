#include "bts_cli/config.hpp"

#include <charconv>
#include <string_view>

namespace bts::cli {

const char* version() { return BTS_VERSION; }

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["n"] = cfg.n;
  j["a"] = cfg.a;
  j["c1"] = cfg.c1;
  j["mark_eps"] = cfg.mark_eps;
  j["eps"] = cfg.eps;
  j["K"] = cfg.K;
  j["delta"] = cfg.delta;
  j["t"] = cfg.t;
  j["t_max"] = cfg.t_max;
  j["t_scale"] = cfg.t_scale;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["const_term"] = cfg.const_term;
  j["conditional_m"] = cfg.conditional_m;
  j["always_accept"] = cfg.always_accept;
  j["deck_cap"] = cfg.deck_cap;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  j.at("command").get_to(cfg.command);
  j.at("n").get_to(cfg.n);
  j.at("a").get_to(cfg.a);
  j.at("c1").get_to(cfg.c1);
  j.at("mark_eps").get_to(cfg.mark_eps);
  j.at("eps").get_to(cfg.eps);
  j.at("K").get_to(cfg.K);
  j.at("delta").get_to(cfg.delta);
  j.at("t").get_to(cfg.t);
  j.at("t_max").get_to(cfg.t_max);
  j.at("t_scale").get_to(cfg.t_scale);
  j.at("trials").get_to(cfg.trials);
  j.at("seed").get_to(cfg.seed);
  j.at("const_term").get_to(cfg.const_term);
  j.at("conditional_m").get_to(cfg.conditional_m);
  j.at("always_accept").get_to(cfg.always_accept);
  j.at("deck_cap").get_to(cfg.deck_cap);
  return cfg;
}

std::string header_line(const ExperimentConfig& cfg) {
  return std::string("# bts ") + version() + " " + to_json(cfg).dump();
}

std::optional<ExperimentConfig> parse_header_line(const std::string& line) {
  constexpr std::string_view prefix = "# bts ";
  if (line.rfind(prefix, 0) != 0) return std::nullopt;
  const auto brace = line.find('{');
  if (brace == std::string::npos) return std::nullopt;
  try {
    return config_from_json(nlohmann::json::parse(line.substr(brace)));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace bts::cli
