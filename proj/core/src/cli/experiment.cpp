#include "hvacrl/cli/experiment.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "hvacrl/common/rng.hpp"

namespace hvacrl::cli {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

json bounds_to_json(const rom::Bounds& b) { return json::array({b.lo, b.hi}); }

void read_bounds_if(const json& j, const char* key, rom::Bounds& out) {
  if (!j.contains(key)) return;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 2)
    throw std::invalid_argument(std::string("config: ") + key + " must be a [lo, hi] pair");
  out.lo = arr[0].get<double>();
  out.hi = arr[1].get<double>();
}

json synthetic_to_json(const rom::SyntheticConfig& c) {
  return json{{"zone_count", c.zone_count},
              {"dt_hours", c.dt_hours},
              {"t_out_mean", c.t_out_mean},
              {"t_out_amplitude", c.t_out_amplitude},
              {"t_out_peak_hour", c.t_out_peak_hour},
              {"noise_std", c.noise_std},
              {"noise_phi", c.noise_phi},
              {"solar_peak_kw", c.solar_peak_kw},
              {"solar_width_hours", c.solar_width_hours},
              {"daylight_start_hour", c.daylight_start_hour},
              {"daylight_end_hour", c.daylight_end_hour},
              {"solar_scale", c.solar_scale},
              {"solar_peak_hour", c.solar_peak_hour},
              {"internal_occupied_kw", c.internal_occupied_kw},
              {"internal_floor_kw", c.internal_floor_kw},
              {"occupied_start_hour", c.occupied_start_hour},
              {"occupied_end_hour", c.occupied_end_hour},
              {"first_day_of_week", c.first_day_of_week}};
}

void synthetic_from_json(const json& j, rom::SyntheticConfig& c) {
  read_if(j, "zone_count", c.zone_count);
  read_if(j, "dt_hours", c.dt_hours);
  read_if(j, "t_out_mean", c.t_out_mean);
  read_if(j, "t_out_amplitude", c.t_out_amplitude);
  read_if(j, "t_out_peak_hour", c.t_out_peak_hour);
  read_if(j, "noise_std", c.noise_std);
  read_if(j, "noise_phi", c.noise_phi);
  read_if(j, "solar_peak_kw", c.solar_peak_kw);
  read_if(j, "solar_width_hours", c.solar_width_hours);
  read_if(j, "daylight_start_hour", c.daylight_start_hour);
  read_if(j, "daylight_end_hour", c.daylight_end_hour);
  read_if(j, "solar_scale", c.solar_scale);
  read_if(j, "solar_peak_hour", c.solar_peak_hour);
  read_if(j, "internal_occupied_kw", c.internal_occupied_kw);
  read_if(j, "internal_floor_kw", c.internal_floor_kw);
  read_if(j, "occupied_start_hour", c.occupied_start_hour);
  read_if(j, "occupied_end_hour", c.occupied_end_hour);
  read_if(j, "first_day_of_week", c.first_day_of_week);
}

json scenario_to_json(const env::ScenarioConfig& c) {
  return json{{"horizon", c.horizon},
              {"dt_hours", c.dt_hours},
              {"k_history", c.k_history},
              {"k_forecast", c.k_forecast},
              {"weights_normal", c.weights_normal},
              {"weights_dr", c.weights_dr},
              {"kappa", c.kappa},
              {"p_limit_normal_kw", c.p_limit_normal_kw},
              {"dr_probability", c.dr_probability},
              {"dr_window_start_hour", c.dr_window_start_hour},
              {"dr_window_end_hour", c.dr_window_end_hour},
              {"comfort_occupied", bounds_to_json(c.comfort_occupied)},
              {"comfort_unoccupied", bounds_to_json(c.comfort_unoccupied)},
              {"occupied_start_hour", c.occupied_start_hour},
              {"occupied_end_hour", c.occupied_end_hour},
              {"temp_offset", c.temp_offset},
              {"temp_scale", c.temp_scale},
              {"p_limit_scale", c.p_limit_scale}};
}

void scenario_from_json(const json& j, env::ScenarioConfig& c) {
  read_if(j, "horizon", c.horizon);
  read_if(j, "dt_hours", c.dt_hours);
  read_if(j, "k_history", c.k_history);
  read_if(j, "k_forecast", c.k_forecast);
  read_if(j, "weights_normal", c.weights_normal);
  read_if(j, "weights_dr", c.weights_dr);
  read_if(j, "kappa", c.kappa);
  read_if(j, "p_limit_normal_kw", c.p_limit_normal_kw);
  read_if(j, "dr_probability", c.dr_probability);
  read_if(j, "dr_window_start_hour", c.dr_window_start_hour);
  read_if(j, "dr_window_end_hour", c.dr_window_end_hour);
  read_bounds_if(j, "comfort_occupied", c.comfort_occupied);
  read_bounds_if(j, "comfort_unoccupied", c.comfort_unoccupied);
  read_if(j, "occupied_start_hour", c.occupied_start_hour);
  read_if(j, "occupied_end_hour", c.occupied_end_hour);
  read_if(j, "temp_offset", c.temp_offset);
  read_if(j, "temp_scale", c.temp_scale);
  read_if(j, "p_limit_scale", c.p_limit_scale);
}

json es_to_json(const es::EsConfig& c) {
  return json{{"iterations", c.iterations},
              {"population_size", c.population_size},
              {"perturbation_std", c.perturbation_std},
              {"learning_rate", c.learning_rate},
              {"episodes_per_fitness", c.episodes_per_fitness},
              {"eval_seeds", c.eval_seeds},
              {"worker_count", c.worker_count},
              {"checkpoint_interval", c.checkpoint_interval},
              {"seed", c.seed}};
}

void es_from_json(const json& j, es::EsConfig& c) {
  read_if(j, "iterations", c.iterations);
  read_if(j, "population_size", c.population_size);
  read_if(j, "perturbation_std", c.perturbation_std);
  read_if(j, "learning_rate", c.learning_rate);
  read_if(j, "episodes_per_fitness", c.episodes_per_fitness);
  read_if(j, "eval_seeds", c.eval_seeds);
  read_if(j, "worker_count", c.worker_count);
  read_if(j, "checkpoint_interval", c.checkpoint_interval);
  read_if(j, "seed", c.seed);
}

json ppo_to_json(const ppo::PpoConfig& c) {
  return json{{"iterations", c.iterations},
              {"learning_rate", c.learning_rate},
              {"clip_ratio", c.clip_ratio},
              {"gae_lambda", c.gae_lambda},
              {"discount", c.discount},
              {"epochs_per_batch", c.epochs_per_batch},
              {"minibatch_size", c.minibatch_size},
              {"rollout_episodes", c.rollout_episodes},
              {"entropy_coefficient", c.entropy_coefficient},
              {"value_loss_coefficient", c.value_loss_coefficient},
              {"max_grad_norm", c.max_grad_norm},
              {"divergence_factor", c.divergence_factor},
              {"eval_seeds", c.eval_seeds},
              {"worker_count", c.worker_count},
              {"checkpoint_interval", c.checkpoint_interval},
              {"seed", c.seed}};
}

void ppo_from_json(const json& j, ppo::PpoConfig& c) {
  read_if(j, "iterations", c.iterations);
  read_if(j, "learning_rate", c.learning_rate);
  read_if(j, "clip_ratio", c.clip_ratio);
  read_if(j, "gae_lambda", c.gae_lambda);
  read_if(j, "discount", c.discount);
  read_if(j, "epochs_per_batch", c.epochs_per_batch);
  read_if(j, "minibatch_size", c.minibatch_size);
  read_if(j, "rollout_episodes", c.rollout_episodes);
  read_if(j, "entropy_coefficient", c.entropy_coefficient);
  read_if(j, "value_loss_coefficient", c.value_loss_coefficient);
  read_if(j, "max_grad_norm", c.max_grad_norm);
  read_if(j, "divergence_factor", c.divergence_factor);
  read_if(j, "eval_seeds", c.eval_seeds);
  read_if(j, "worker_count", c.worker_count);
  read_if(j, "checkpoint_interval", c.checkpoint_interval);
  read_if(j, "seed", c.seed);
}

json mpc_to_json(const mpc::MpcConfig& c) {
  return json{{"horizon", c.horizon},
              {"variant", c.variant == mpc::Variant::Lin ? "lin" : "rom"},
              {"max_inner_iterations", c.max_inner_iterations},
              {"step_tolerance", c.step_tolerance},
              {"sqp_iterations", c.sqp_iterations},
              {"trajectory_tolerance", c.trajectory_tolerance},
              {"armijo_initial_step", c.armijo_initial_step},
              {"armijo_shrink", c.armijo_shrink},
              {"armijo_slope", c.armijo_slope},
              {"max_backtracks", c.max_backtracks}};
}

void mpc_from_json(const json& j, mpc::MpcConfig& c) {
  read_if(j, "horizon", c.horizon);
  if (j.contains("variant")) {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "lin")
      c.variant = mpc::Variant::Lin;
    else if (v == "rom")
      c.variant = mpc::Variant::Rom;
    else
      throw std::invalid_argument("config: mpc variant must be \"lin\" or \"rom\", got \"" + v + "\"");
  }
  read_if(j, "max_inner_iterations", c.max_inner_iterations);
  read_if(j, "step_tolerance", c.step_tolerance);
  read_if(j, "sqp_iterations", c.sqp_iterations);
  read_if(j, "trajectory_tolerance", c.trajectory_tolerance);
  read_if(j, "armijo_initial_step", c.armijo_initial_step);
  read_if(j, "armijo_shrink", c.armijo_shrink);
  read_if(j, "armijo_slope", c.armijo_slope);
  read_if(j, "max_backtracks", c.max_backtracks);
}

}  // namespace

int ExperimentConfig::state_dimension() const {
  return synthetic.zone_count + scenario.k_history + scenario.k_forecast + 7;
}

std::vector<int> ExperimentConfig::es_architecture() const {
  std::vector<int> sizes;
  sizes.push_back(state_dimension());
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(synthetic.zone_count + 1);
  return sizes;
}

std::vector<int> ExperimentConfig::ppo_architecture() const {
  std::vector<int> sizes = es_architecture();
  sizes.back() *= 2;
  return sizes;
}

std::vector<int> ExperimentConfig::value_architecture() const {
  std::vector<int> sizes = es_architecture();
  sizes.back() = 1;
  return sizes;
}

void ExperimentConfig::resolve() {
  if (es.seed == 0) es.seed = derive_seed(seed, "es");
  if (ppo.seed == 0) ppo.seed = derive_seed(seed, "ppo");
  if (es.eval_seeds.empty() || ppo.eval_seeds.empty()) {
    std::vector<std::uint64_t> shared;
    shared.reserve(static_cast<std::size_t>(eval_episodes));
    for (int i = 0; i < eval_episodes; ++i)
      shared.push_back(derive_seed(seed, "eval", static_cast<std::uint64_t>(i)));
    if (es.eval_seeds.empty()) es.eval_seeds = shared;
    if (ppo.eval_seeds.empty()) ppo.eval_seeds = shared;
  }
}

void ExperimentConfig::validate() const {
  if (training_days < 1) throw std::invalid_argument("config: training_days must be >= 1");
  if (test_days < 1) throw std::invalid_argument("config: test_days must be >= 1");
  if (rom_n_a != 1 || rom_n_b != 1)
    throw std::invalid_argument("config: the control stack requires single-lag zone models");
  if (hidden_layers.empty()) throw std::invalid_argument("config: hidden_layers must not be empty");
  for (int h : hidden_layers)
    if (h < 1) throw std::invalid_argument("config: hidden layer sizes must be positive");
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("config: sigma_floor must be > 0");
  if (!(initial_sigma > sigma_floor))
    throw std::invalid_argument("config: initial_sigma must exceed sigma_floor");
  if (eval_episodes < 1) throw std::invalid_argument("config: eval_episodes must be >= 1");
  if (data_dir.empty() || checkpoint_dir.empty() || output_dir.empty())
    throw std::invalid_argument("config: paths must not be empty");
  synthetic.validate();
  scenario.validate();
  es.validate();
  ppo.validate();
  mpc.validate();
  if (scenario.dt_hours != synthetic.dt_hours)
    throw std::invalid_argument("config: scenario and synthetic dt_hours must match");
}

std::string ExperimentConfig::to_json_string() const {
  json j{{"format_version", 1},
         {"seed", seed},
         {"data_dir", data_dir},
         {"checkpoint_dir", checkpoint_dir},
         {"output_dir", output_dir},
         {"training_days", training_days},
         {"test_days", test_days},
         {"synthetic", synthetic_to_json(synthetic)},
         {"rom_n_a", rom_n_a},
         {"rom_n_b", rom_n_b},
         {"scenario", scenario_to_json(scenario)},
         {"hidden_layers", hidden_layers},
         {"sigma_floor", sigma_floor},
         {"initial_sigma", initial_sigma},
         {"es", es_to_json(es)},
         {"ppo", ppo_to_json(ppo)},
         {"mpc", mpc_to_json(mpc)},
         {"eval_episodes", eval_episodes},
         {"es_architecture", es_architecture()},
         {"ppo_architecture", ppo_architecture()}};
  return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    read_if(j, "seed", c.seed);
    read_if(j, "data_dir", c.data_dir);
    read_if(j, "checkpoint_dir", c.checkpoint_dir);
    read_if(j, "output_dir", c.output_dir);
    read_if(j, "training_days", c.training_days);
    read_if(j, "test_days", c.test_days);
    if (j.contains("synthetic")) synthetic_from_json(j.at("synthetic"), c.synthetic);
    read_if(j, "rom_n_a", c.rom_n_a);
    read_if(j, "rom_n_b", c.rom_n_b);
    if (j.contains("scenario")) scenario_from_json(j.at("scenario"), c.scenario);
    read_if(j, "hidden_layers", c.hidden_layers);
    read_if(j, "sigma_floor", c.sigma_floor);
    read_if(j, "initial_sigma", c.initial_sigma);
    if (j.contains("es")) es_from_json(j.at("es"), c.es);
    if (j.contains("ppo")) ppo_from_json(j.at("ppo"), c.ppo);
    if (j.contains("mpc")) mpc_from_json(j.at("mpc"), c.mpc);
    read_if(j, "eval_episodes", c.eval_episodes);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("config: cannot write " + path.string());
  out << to_json_string();
  if (!out) throw std::runtime_error("config: write failed for " + path.string());
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace hvacrl::cli
