#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hvacrl/env/scenario.hpp"
#include "hvacrl/rom/model.hpp"

namespace hvacrl::env {

// Observation at one control step, stored in physical units. vector() emits
// the normalized feature vector in the fixed segment order:
//   [zone temps | outdoor history | weekday flag, sin, cos |
//    power-limit forecast | step fraction | objective weights]
// For the default five-zone day (K = 48) that is 5+48+3+48+1+3 = 108 dims.
struct EnvState {
  std::vector<double> zone_temps;       // deg C
  std::vector<double> t_out_history;    // deg C, chronological, size k_history
  double weekday_flag = 0.0;            // 1 on weekdays
  double time_sin = 0.0;                // sin/cos of the time-of-day angle
  double time_cos = 1.0;
  std::vector<double> p_limit_forecast; // kW, size k_forecast
  double step_frac = 0.0;               // step / horizon
  std::array<double, 3> weights{};      // active objective weights

  int dimension() const;
  Eigen::VectorXd vector(const ScenarioConfig& config) const;
};

// Assembles the observation for `step`. p_limit_schedule must cover
// [step, step + k_forecast); t_out_history is the chronological outdoor
// buffer ending at the current step (size k_history).
EnvState build_state(const std::vector<double>& zone_temps,
                     const std::vector<double>& t_out_history, bool is_weekday, int step,
                     std::span<const double> p_limit_schedule,
                     const std::array<double, 3>& weights, const ScenarioConfig& config);

// Maps a raw policy output in R^(N+1) through tanh onto the command box:
// entries 0..N-1 are zone flows, entry N is the discharge temperature.
rom::HvacCommand denormalize_action(std::span<const double> raw, const rom::BuildingModel& model);

// One simulated day. reset() samples the DR event (deterministic in the
// seed) and returns the initial state; step() applies one command.
class Episode {
 public:
  Episode(ScenarioConfig scenario, rom::BuildingModel model,
          std::vector<rom::ExogenousRecord> day, std::uint64_t seed);

  // Fixed-event form for evaluation runs: reset() installs `event` (or none)
  // instead of sampling one.
  Episode(ScenarioConfig scenario, rom::BuildingModel model,
          std::vector<rom::ExogenousRecord> day, std::optional<DrEvent> event);

  const EnvState& reset();

  struct StepOutcome {
    EnvState next_state;
    double reward = 0.0;
    // cost breakdown for the step that was just taken
    double discomfort_sum = 0.0;
    double energy_kwh = 0.0;
    double violation = 0.0;
    double power_kw = 0.0;
    bool done = false;
  };

  // Raw policy action, squashed onto the command box internally.
  StepOutcome step(std::span<const double> raw_action);
  // Pre-validated physical command (baselines): must lie within bounds.
  StepOutcome step_command(const rom::HvacCommand& cmd);

  bool done() const { return started_ && current_step_ >= scenario_.horizon; }
  int current_step() const { return current_step_; }
  const EnvState& state() const;
  const std::optional<DrEvent>& dr_event() const { return event_; }
  const ScenarioConfig& scenario() const { return scenario_; }
  const rom::BuildingModel& model() const { return model_; }
  const std::vector<rom::ExogenousRecord>& day() const { return day_; }

  std::array<double, 3> weights_at(int step) const;
  double p_limit_at(int step) const;  // beyond-horizon steps fall back to normal
  Bounds band_at(int step) const;

  // Undiscounted return so far, and its negation (the episodic cost).
  double episode_return() const { return return_; }
  double episode_cost() const { return -return_; }

  struct TraceRow {
    int step = 0;
    std::vector<double> zone_temps;
    rom::HvacCommand cmd;
    double power_kw = 0.0;
    double p_limit_kw = 0.0;
    double reward = 0.0;
    double discomfort_sum = 0.0;
    double energy_kwh = 0.0;
    double violation = 0.0;
  };
  const std::vector<TraceRow>& trace() const { return trace_; }
  void write_trace_csv(const std::filesystem::path& path) const;

 private:
  StepOutcome step_impl(const rom::HvacCommand& cmd);
  EnvState make_state(int step) const;

  ScenarioConfig scenario_;
  rom::BuildingModel model_;
  std::vector<rom::ExogenousRecord> day_;
  std::uint64_t seed_ = 0;
  bool sample_event_ = true;
  std::optional<DrEvent> fixed_event_;

  bool started_ = false;
  int current_step_ = 0;
  std::vector<double> temps_;
  std::vector<double> t_out_buffer_;       // chronological, k_history long
  std::vector<double> p_limit_schedule_;   // horizon + k_forecast entries
  std::optional<DrEvent> event_;
  EnvState state_;
  double return_ = 0.0;
  std::vector<TraceRow> trace_;
};

// Deterministic episode source over a pool of exogenous days: the seed picks
// the day and the episode's DR draw.
struct EpisodeFactory {
  ScenarioConfig scenario;
  rom::BuildingModel model;
  std::vector<std::vector<rom::ExogenousRecord>> days;

  Episode make(std::uint64_t seed) const;
};

// Runs `act` (raw pre-squash action as a function of the normalized state)
// from reset to the horizon and returns the episodic cost.
double rollout_cost(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& act,
                    Episode episode);

}  // namespace hvacrl::env
