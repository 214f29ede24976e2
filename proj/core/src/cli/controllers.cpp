#include "hvacrl/cli/controllers.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "hvacrl/nn/checkpoint.hpp"
#include "hvacrl/nn/policy.hpp"

namespace hvacrl::cli {

void Controller::begin_episode(const env::Episode&) {}

namespace {

class RlController : public Controller {
 public:
  RlController(std::string name, nn::Mlp net, bool gaussian_head, double sigma_floor)
      : name_(std::move(name)), gaussian_(gaussian_head) {
    if (gaussian_)
      policy_ = nn::GaussianPolicy(std::move(net), sigma_floor);
    else
      net_ = std::move(net);
  }

  const std::string& name() const override { return name_; }

  rom::HvacCommand act(const env::Episode& episode) override {
    const Eigen::VectorXd state = episode.state().vector(episode.scenario());
    const Eigen::VectorXd raw = gaussian_ ? policy_.mean_action(state) : net_.forward(state);
    return env::denormalize_action(
        std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())),
        episode.model());
  }

 private:
  std::string name_;
  bool gaussian_ = false;
  nn::GaussianPolicy policy_;
  nn::Mlp net_;
};

class RuleBasedController : public Controller {
 public:
  explicit RuleBasedController(std::string name) : name_(std::move(name)) {}

  const std::string& name() const override { return name_; }

  rom::HvacCommand act(const env::Episode& episode) override {
    const auto& scenario = episode.scenario();
    const auto& model = episode.model();
    const int step = episode.current_step();
    const double hour = scenario.hour_of_day(step);
    const std::size_t day_idx =
        std::min(static_cast<std::size_t>(step), episode.day().size() - 1);
    const bool occupied = episode.day()[day_idx].is_weekday &&
                          hour >= scenario.occupied_start_hour &&
                          hour < scenario.occupied_end_hour;
    rom::HvacCommand cmd;
    cmd.mdot.resize(static_cast<std::size_t>(model.zone_count()));
    for (int i = 0; i < model.zone_count(); ++i) {
      const auto& b = model.mdot_bounds[static_cast<std::size_t>(i)];
      cmd.mdot[static_cast<std::size_t>(i)] = occupied ? b.mid() : b.lo;
    }
    cmd.t_da = 13.0;
    return cmd;
  }

 private:
  std::string name_;
};

}  // namespace

std::unique_ptr<Controller> make_rl_controller(std::string name,
                                               const std::filesystem::path& checkpoint_path) {
  nn::LoadedCheckpoint loaded;
  try {
    loaded = nn::load_checkpoint(checkpoint_path);
  } catch (const std::exception& e) {
    throw std::runtime_error("controller \"" + name + "\": " + e.what());
  }
  const bool gaussian = loaded.info.kind == "ppo_policy";
  const double floor = loaded.info.sigma_floor.value_or(1e-3);
  return std::make_unique<RlController>(std::move(name), std::move(loaded.net), gaussian, floor);
}

mpc::HorizonForecast forecast_from_episode(const env::Episode& episode, int step, int horizon) {
  const auto& day = episode.day();
  mpc::HorizonForecast forecast;
  forecast.kappa = episode.scenario().kappa;
  forecast.exo.reserve(static_cast<std::size_t>(horizon));
  forecast.p_limit_kw.reserve(static_cast<std::size_t>(horizon));
  forecast.weights.reserve(static_cast<std::size_t>(horizon));
  forecast.comfort.reserve(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const int t = step + k;
    const std::size_t idx = std::min(static_cast<std::size_t>(t), day.size() - 1);
    forecast.exo.push_back(day[idx]);
    forecast.p_limit_kw.push_back(episode.p_limit_at(t));
    forecast.weights.push_back(episode.weights_at(t));
    forecast.comfort.push_back(episode.band_at(t));
  }
  return forecast;
}

MpcEpisodeController::MpcEpisodeController(std::string name, rom::BuildingModel model,
                                           mpc::MpcConfig config)
    : name_(std::move(name)), controller_(std::move(model), config) {}

void MpcEpisodeController::begin_episode(const env::Episode&) {
  controller_.reset();
  log_.clear();
}

rom::HvacCommand MpcEpisodeController::act(const env::Episode& episode) {
  const auto forecast =
      forecast_from_episode(episode, episode.current_step(), controller_.config().horizon);
  auto result = controller_.step(
      std::span<const double>(episode.state().zone_temps.data(),
                              episode.state().zone_temps.size()),
      forecast);
  rom::HvacCommand cmd = result.command;
  log_.push_back(std::move(result));
  return cmd;
}

std::unique_ptr<MpcEpisodeController> make_mpc_controller(std::string name,
                                                          rom::BuildingModel model,
                                                          mpc::MpcConfig config) {
  return std::make_unique<MpcEpisodeController>(std::move(name), std::move(model), config);
}

std::unique_ptr<Controller> make_rule_based_controller(std::string name) {
  return std::make_unique<RuleBasedController>(std::move(name));
}

}  // namespace hvacrl::cli
