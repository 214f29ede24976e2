#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacrl/env/scenario.hpp"
#include "hvacrl/es/trainer.hpp"
#include "hvacrl/mpc/solver.hpp"
#include "hvacrl/ppo/trainer.hpp"
#include "hvacrl/rom/synthetic.hpp"

namespace hvacrl::cli {

// Fully-resolved experiment description. Every run writes the resolved form
// next to its outputs, so artifacts carry their own provenance. All
// randomness fans out from `seed` through named substreams; a sub-config
// seed of 0 means "derive from the global seed", and empty evaluation seed
// lists are filled from the eval substream by resolve().
struct ExperimentConfig {
  std::uint64_t seed = 0;

  std::string data_dir = "data";
  std::string checkpoint_dir = "checkpoints";
  std::string output_dir = "outputs";

  int training_days = 31;
  int test_days = 10;
  rom::SyntheticConfig synthetic;

  int rom_n_a = 1;
  int rom_n_b = 1;

  env::ScenarioConfig scenario;

  std::vector<int> hidden_layers{256, 128, 128, 64, 64, 32, 16};
  double sigma_floor = 1e-3;
  double initial_sigma = 0.1;

  es::EsConfig es;
  ppo::PpoConfig ppo;
  mpc::MpcConfig mpc;

  int eval_episodes = 4;  // evaluation seeds drawn from the eval substream

  // Observation width for the configured scenario and zone count.
  int state_dimension() const;
  // Layer sizes including input and head: zones+1 outputs for the
  // deterministic stage, doubled for the Gaussian stage, 1 for the critic.
  std::vector<int> es_architecture() const;
  std::vector<int> ppo_architecture() const;
  std::vector<int> value_architecture() const;

  // Fills derived seeds: es/ppo seeds from their substreams and the shared
  // evaluation seed list (identical for both stages, so the fine-tuning
  // baseline is comparable to the first-stage result).
  void resolve();

  void validate() const;  // throws std::invalid_argument

  std::string to_json_string() const;
  static ExperimentConfig from_json_string(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace hvacrl::cli
