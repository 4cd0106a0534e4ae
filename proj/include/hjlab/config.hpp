#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hjlab/env.hpp"
#include "hjlab/game.hpp"
#include "hjlab/pde.hpp"

namespace hjlab {

using Json = nlohmann::json;

struct CampaignConfig {
  std::vector<Point> thetas;
  std::vector<double> times;
  std::vector<double> eps_list;
  int M = 64;
  std::uint64_t base_seed = 1;
  std::uint64_t calibration_seed = 2;
  std::optional<int> workers;  ///< unset: environment variable, then hardware
  double R = 1.0;
  double T = 1.0;
  double dx = 0.05;  ///< unit-scale discretization of campaign solves
  double dt = 0.05;
  std::optional<double> k_hat;
  std::optional<double> h_bar;
  std::vector<double> m_grid;
  int probes = 2000;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"json", "csv"};
  bool wants(const std::string& f) const;
};

/// Fully defaulted, validated experiment description.
struct ExperimentConfig {
  Json effective;  ///< every parameter, defaults included
  EnvSpec env;
  std::string family;
  Json params;
  SolveConfig solver;
  double report_radius = 1.0;
  CampaignConfig campaign;
  OutputConfig output;
};

/// Defaults for every block; hamiltonian.params follows the default family.
Json default_config();
/// Defaults of hamiltonian.params for a family name.
Json family_defaults(const std::string& family);

/// Deep-merges user values over the defaults. Unknown keys are errors.
Json apply_defaults(const Json& user);
/// Sets a dotted path to a value (parsed as JSON when possible, else a string).
/// The path must already exist.
void apply_override(Json& cfg, const std::string& assignment);

/// Validates and converts; ConfigError messages start with the field path.
ExperimentConfig parse_config(const Json& effective);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// FNV-1a 64 of the canonical dump, ignoring campaign.workers.
std::string config_hash(const Json& effective);

GameHamiltonian build_hamiltonian(const ExperimentConfig& cfg);
/// Environment family adjusted to the Hamiltonian's channel needs.
EnvSpec env_family_for(const ExperimentConfig& cfg, const GameHamiltonian& gh);

}  // namespace hjlab
