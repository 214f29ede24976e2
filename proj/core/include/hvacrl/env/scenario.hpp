#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "hvacrl/rom/model.hpp"

namespace hvacrl::env {

using rom::Bounds;

// Episode-level scenario parameters: objective weights, comfort schedule,
// demand-response sampling, and state-encoding constants.
struct ScenarioConfig {
  int horizon = 288;             // control steps per episode (one day)
  double dt_hours = 1.0 / 12.0;  // five minutes
  int k_history = 48;            // outdoor-temperature history length
  int k_forecast = 48;           // power-limit forecast length

  std::array<double, 3> weights_normal{0.7, 0.2, 0.1};  // discomfort, energy, violation
  std::array<double, 3> weights_dr{0.5, 0.0, 0.5};
  std::array<double, 3> kappa{1.0, 1.0, 1.0};  // monetization factors

  double p_limit_normal_kw = 80.0;
  double dr_probability = 0.5;
  double dr_window_start_hour = 11.0;  // earliest event start
  double dr_window_end_hour = 18.0;    // latest event start

  Bounds comfort_occupied{23.0, 25.0};
  Bounds comfort_unoccupied{22.0, 28.0};
  double occupied_start_hour = 7.0;
  double occupied_end_hour = 19.0;

  // State normalization constants.
  double temp_offset = 23.0;
  double temp_scale = 10.0;
  double p_limit_scale = 80.0;

  int steps_per_day() const { return horizon; }
  double hour_of_day(int step) const {
    return 24.0 * static_cast<double>(step % horizon) / static_cast<double>(horizon);
  }

  void validate() const;  // throws std::invalid_argument
};

// One demand-response event: the utility caps building power at
// power_limit_kw for duration_minutes starting at start_step. chi ~ U(0,1)
// sets both the duration, 120*(chi+1) minutes, and the cap, 30 + 20*chi kW.
struct DrEvent {
  int start_step = 0;
  int duration_steps = 0;  // control steps covered by the event window
  double power_limit_kw = 0.0;
  double chi = 0.0;

  double duration_minutes() const { return 120.0 * (chi + 1.0); }
  bool covers(int step) const { return step >= start_step && step < start_step + duration_steps; }
};

DrEvent make_dr_event(double chi, int start_step, const ScenarioConfig& config);

// Draw order: occurrence (probability dr_probability), then chi, then the
// start step uniform over control steps whose clock time lies in the DR
// window. Returns nullopt on no event.
std::optional<DrEvent> sample_dr_event(std::mt19937_64& rng, const ScenarioConfig& config);

// Thermal discomfort of one zone temperature against a comfort band:
// zero inside, max(delta, delta^2) outside where delta is the band distance.
double discomfort(double t_zone, const Bounds& band);

// Squared hinge on the power limit: (p - limit)^2 when p >= limit, else 0.
double violation_penalty(double power_kw, double p_limit_kw);

// r = -(w1*k1*discomfort_sum + w2*k2*energy + w3*k3*violation); never positive.
double reward(const std::array<double, 3>& weights, const std::array<double, 3>& kappa,
              double discomfort_sum, double energy_kwh, double violation);

// Comfort band for a control step: the tight band during weekday business
// hours, the relaxed band otherwise.
Bounds comfort_band(int step, bool is_weekday, const ScenarioConfig& config);

}  // namespace hvacrl::env
