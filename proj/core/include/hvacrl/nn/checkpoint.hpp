#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hvacrl/nn/mlp.hpp"

namespace hvacrl::nn {

// Checkpoint sidecar data. `kind` names the network's role (for example
// "es_policy", "ppo_policy", "value"); extras carries scalar metadata such as
// the state-normalization constants.
struct CheckpointInfo {
  std::string kind;
  std::optional<double> sigma_floor;
  std::map<std::string, double> extras;
};

// File format: one JSON header line (format version, kind, layer sizes,
// sigma floor, extras), then the flat parameter vector as little-endian IEEE
// doubles in hex, 8 values per line. Round trips are bit exact.
void save_checkpoint(const std::filesystem::path& path, const Mlp& net,
                     const CheckpointInfo& info);

struct LoadedCheckpoint {
  Mlp net;
  CheckpointInfo info;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hvacrl::nn
