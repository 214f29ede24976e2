#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hvacrl/env/episode.hpp"
#include "hvacrl/mpc/solver.hpp"

namespace hvacrl::cli {

// Closed-loop command source driven by the episode's public observables.
// Controllers are single-episode objects in spirit: begin_episode() clears
// carried state such as MPC warm starts.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual const std::string& name() const = 0;
  virtual void begin_episode(const env::Episode& episode);
  virtual rom::HvacCommand act(const env::Episode& episode) = 0;
};

// Deterministic network controller: mean head for a Gaussian stage-two
// checkpoint, the full output for a stage-one checkpoint, squashed onto the
// command box exactly as during training.
std::unique_ptr<Controller> make_rl_controller(std::string name,
                                               const std::filesystem::path& checkpoint_path);

// Builds the perfect forecast for [step, step + horizon) from the episode's
// day, padding past the final record.
mpc::HorizonForecast forecast_from_episode(const env::Episode& episode, int step, int horizon);

class MpcEpisodeController : public Controller {
 public:
  MpcEpisodeController(std::string name, rom::BuildingModel model, mpc::MpcConfig config);

  const std::string& name() const override { return name_; }
  void begin_episode(const env::Episode& episode) override;
  rom::HvacCommand act(const env::Episode& episode) override;

  // One entry per act() since begin_episode, for the extended trace columns.
  const std::vector<mpc::MpcController::StepResult>& step_log() const { return log_; }

 private:
  std::string name_;
  mpc::MpcController controller_;
  std::vector<mpc::MpcController::StepResult> log_;
};

std::unique_ptr<MpcEpisodeController> make_mpc_controller(std::string name,
                                                          rom::BuildingModel model,
                                                          mpc::MpcConfig config);

// Sanity-floor schedule: every flow at mid-range while the building is
// occupied and at minimum otherwise, discharge air fixed at 13 degC.
std::unique_ptr<Controller> make_rule_based_controller(std::string name = "rule-based");

}  // namespace hvacrl::cli
