#include "hvacrl/env/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace hvacrl::env {

void ScenarioConfig::validate() const {
  if (horizon <= 0) throw std::invalid_argument("scenario: horizon must be positive");
  if (dt_hours <= 0.0) throw std::invalid_argument("scenario: dt_hours must be positive");
  if (std::fabs(horizon * dt_hours - 24.0) > 1e-9)
    throw std::invalid_argument("scenario: horizon * dt_hours must equal 24 hours");
  if (k_history <= 0 || k_forecast <= 0)
    throw std::invalid_argument("scenario: history/forecast lengths must be positive");
  auto check_weights = [](const std::array<double, 3>& w, const char* name) {
    double sum = w[0] + w[1] + w[2];
    if (std::fabs(sum - 1.0) > 1e-9)
      throw std::invalid_argument(std::string("scenario: ") + name + " must sum to 1");
    for (double v : w)
      if (v < 0.0) throw std::invalid_argument(std::string("scenario: ") + name + " has a negative entry");
  };
  check_weights(weights_normal, "weights_normal");
  check_weights(weights_dr, "weights_dr");
  for (double k : kappa)
    if (k < 0.0) throw std::invalid_argument("scenario: kappa has a negative entry");
  if (p_limit_normal_kw <= 0.0) throw std::invalid_argument("scenario: p_limit_normal must be positive");
  if (dr_probability < 0.0 || dr_probability > 1.0)
    throw std::invalid_argument("scenario: dr_probability must be in [0, 1]");
  if (dr_window_start_hour > dr_window_end_hour)
    throw std::invalid_argument("scenario: dr window start after end");
  if (dr_window_end_hour >= 24.0)
    throw std::invalid_argument("scenario: dr window must start within the day");
  if (comfort_occupied.lo >= comfort_occupied.hi || comfort_unoccupied.lo >= comfort_unoccupied.hi)
    throw std::invalid_argument("scenario: bad comfort band");
  if (occupied_start_hour >= occupied_end_hour)
    throw std::invalid_argument("scenario: bad occupancy window");
  if (temp_scale <= 0.0 || p_limit_scale <= 0.0)
    throw std::invalid_argument("scenario: bad normalization constants");
}

DrEvent make_dr_event(double chi, int start_step, const ScenarioConfig& config) {
  if (chi < 0.0 || chi > 1.0) throw std::invalid_argument("dr event: chi must be in [0, 1]");
  DrEvent e;
  e.chi = chi;
  e.start_step = start_step;
  e.power_limit_kw = 30.0 + 20.0 * chi;
  // Steps whose start time falls inside [start, start + duration) — the last
  // partially covered interval counts as limited.
  const double step_minutes = config.dt_hours * 60.0;
  e.duration_steps = static_cast<int>(std::ceil(e.duration_minutes() / step_minutes - 1e-12));
  return e;
}

std::optional<DrEvent> sample_dr_event(std::mt19937_64& rng, const ScenarioConfig& config) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double occurrence = unit(rng);
  if (occurrence >= config.dr_probability) return std::nullopt;
  const double chi = unit(rng);
  // Admissible start steps: clock time within the DR window.
  const double steps_per_hour = static_cast<double>(config.horizon) / 24.0;
  const int lo = static_cast<int>(std::ceil(config.dr_window_start_hour * steps_per_hour - 1e-9));
  const int hi = static_cast<int>(std::floor(config.dr_window_end_hour * steps_per_hour + 1e-9));
  std::uniform_int_distribution<int> start(lo, hi);
  return make_dr_event(chi, start(rng), config);
}

double discomfort(double t_zone, const Bounds& band) {
  double delta = 0.0;
  if (t_zone > band.hi)
    delta = t_zone - band.hi;
  else if (t_zone < band.lo)
    delta = band.lo - t_zone;
  else
    return 0.0;
  return std::max(delta, delta * delta);
}

double violation_penalty(double power_kw, double p_limit_kw) {
  if (power_kw < p_limit_kw) return 0.0;
  const double over = power_kw - p_limit_kw;
  return over * over;
}

double reward(const std::array<double, 3>& weights, const std::array<double, 3>& kappa,
              double discomfort_sum, double energy_kwh, double violation) {
  return -(weights[0] * kappa[0] * discomfort_sum + weights[1] * kappa[1] * energy_kwh +
           weights[2] * kappa[2] * violation);
}

Bounds comfort_band(int step, bool is_weekday, const ScenarioConfig& config) {
  const double hour = config.hour_of_day(step);
  const bool occupied =
      is_weekday && hour >= config.occupied_start_hour && hour < config.occupied_end_hour;
  return occupied ? config.comfort_occupied : config.comfort_unoccupied;
}

}  // namespace hvacrl::env
