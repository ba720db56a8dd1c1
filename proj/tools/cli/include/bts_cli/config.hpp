#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bts::cli {

inline constexpr const char* kCommands[] = {"exact",      "simulate",   "marking",
                                            "typechain",  "lowerbound", "conjecture"};

// Everything that determines the numbers in an output file. Output location
// and worker count are run settings and are kept out of the recorded config.
struct ExperimentConfig {
  std::string command;
  std::size_t n = 2;
  double a = 1.0;
  double c1 = 0.0;        // 0: derive from mark_eps
  double mark_eps = 0.1;  // c1 = (1 + 1 / (1 + mark_eps)) / 2
  double eps = 0.25;
  std::size_t K = 0;  // 0: derive from delta
  double delta = 0.25;
  std::vector<std::uint64_t> t;
  std::uint64_t t_max = 0;  // exact: 0 means run to the separation mixing time
  std::vector<double> t_scale;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double const_term = 4.0;
  std::size_t conditional_m = 0;
  bool always_accept = false;
  unsigned deck_cap = 8;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct RunSettings {
  std::string out_dir;
  std::size_t workers = 0;
};

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

// "# bts <version> <config json>"
std::string header_line(const ExperimentConfig& cfg);
std::optional<ExperimentConfig> parse_header_line(const std::string& line);

const char* version();

// Shortest text that reads back to the same double.
std::string format_double(double x);

}  // namespace bts::cli
