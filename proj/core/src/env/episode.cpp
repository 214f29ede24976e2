#include "hvacrl/env/episode.hpp"

#include <cmath>
#include <stdexcept>

#include "hvacrl/common/csv.hpp"
#include "hvacrl/common/math.hpp"
#include "hvacrl/common/rng.hpp"

namespace hvacrl::env {

int EnvState::dimension() const {
  return static_cast<int>(zone_temps.size() + t_out_history.size() + 3 +
                          p_limit_forecast.size() + 1 + 3);
}

Eigen::VectorXd EnvState::vector(const ScenarioConfig& config) const {
  Eigen::VectorXd v(dimension());
  Eigen::Index k = 0;
  for (double t : zone_temps) v(k++) = (t - config.temp_offset) / config.temp_scale;
  for (double t : t_out_history) v(k++) = (t - config.temp_offset) / config.temp_scale;
  v(k++) = weekday_flag;
  v(k++) = time_sin;
  v(k++) = time_cos;
  for (double p : p_limit_forecast) v(k++) = p / config.p_limit_scale;
  v(k++) = step_frac;
  for (double w : weights) v(k++) = w;
  return v;
}

EnvState build_state(const std::vector<double>& zone_temps,
                     const std::vector<double>& t_out_history, bool is_weekday, int step,
                     std::span<const double> p_limit_schedule,
                     const std::array<double, 3>& weights, const ScenarioConfig& config) {
  if (static_cast<int>(t_out_history.size()) != config.k_history)
    throw std::invalid_argument("build_state: outdoor history must have k_history entries");
  if (static_cast<int>(p_limit_schedule.size()) < step + config.k_forecast)
    throw std::invalid_argument("build_state: power-limit schedule too short");
  EnvState s;
  s.zone_temps = zone_temps;
  s.t_out_history = t_out_history;
  s.weekday_flag = is_weekday ? 1.0 : 0.0;
  // Time-of-day angle in turns; dyadic fractions stay exact so noon encodes
  // as exactly (0, -1).
  const double turns = static_cast<double>(step % config.horizon) / config.horizon;
  s.time_sin = sinpi(2.0 * turns);
  s.time_cos = cospi(2.0 * turns);
  s.p_limit_forecast.assign(p_limit_schedule.begin() + step,
                            p_limit_schedule.begin() + step + config.k_forecast);
  s.step_frac = static_cast<double>(step) / config.horizon;
  s.weights = weights;
  return s;
}

rom::HvacCommand denormalize_action(std::span<const double> raw, const rom::BuildingModel& model) {
  const std::size_t n = model.zones.size();
  if (raw.size() != n + 1)
    throw std::invalid_argument("denormalize_action: expected " + std::to_string(n + 1) +
                                " entries, got " + std::to_string(raw.size()));
  rom::HvacCommand cmd;
  cmd.mdot.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const rom::Bounds& b = model.mdot_bounds[i];
    cmd.mdot.push_back(b.mid() + 0.5 * b.width() * std::tanh(raw[i]));
  }
  const rom::Bounds& tb = model.t_da_bounds;
  cmd.t_da = tb.mid() + 0.5 * tb.width() * std::tanh(raw[n]);
  return cmd;
}

Episode::Episode(ScenarioConfig scenario, rom::BuildingModel model,
                 std::vector<rom::ExogenousRecord> day, std::uint64_t seed)
    : scenario_(std::move(scenario)), model_(std::move(model)), day_(std::move(day)), seed_(seed) {
  scenario_.validate();
  model_.validate();
  if (static_cast<int>(day_.size()) < scenario_.horizon)
    throw std::invalid_argument("episode: exogenous day shorter than the horizon");
  for (const auto& rec : day_)
    if (rec.q_solar.size() != model_.zones.size() || rec.q_int.size() != model_.zones.size())
      throw std::invalid_argument("episode: exogenous zone width mismatch");
  if (model_.max_lag() != 1)
    throw std::invalid_argument("episode: the environment drives single-lag models only");
  if (std::fabs(model_.dt_hours - scenario_.dt_hours) > 1e-12)
    throw std::invalid_argument("episode: model and scenario dt differ");
}

Episode::Episode(ScenarioConfig scenario, rom::BuildingModel model,
                 std::vector<rom::ExogenousRecord> day, std::optional<DrEvent> event)
    : Episode(std::move(scenario), std::move(model), std::move(day), std::uint64_t{0}) {
  sample_event_ = false;
  fixed_event_ = std::move(event);
}

const EnvState& Episode::reset() {
  started_ = true;
  current_step_ = 0;
  return_ = 0.0;
  trace_.clear();
  temps_.assign(model_.zones.size(), 24.0);

  if (sample_event_) {
    auto rng = make_rng(seed_);
    event_ = sample_dr_event(rng, scenario_);
  } else {
    event_ = fixed_event_;
  }

  p_limit_schedule_.assign(static_cast<std::size_t>(scenario_.horizon + scenario_.k_forecast),
                           scenario_.p_limit_normal_kw);
  if (event_)
    for (int t = event_->start_step; t < event_->start_step + event_->duration_steps; ++t)
      if (t >= 0 && t < static_cast<int>(p_limit_schedule_.size()))
        p_limit_schedule_[static_cast<std::size_t>(t)] = event_->power_limit_kw;

  t_out_buffer_.assign(static_cast<std::size_t>(scenario_.k_history), day_.front().t_out);

  state_ = make_state(0);
  return state_;
}

std::array<double, 3> Episode::weights_at(int step) const {
  return (event_ && event_->covers(step)) ? scenario_.weights_dr : scenario_.weights_normal;
}

double Episode::p_limit_at(int step) const {
  if (step < 0 || step >= static_cast<int>(p_limit_schedule_.size()))
    return scenario_.p_limit_normal_kw;
  return p_limit_schedule_[static_cast<std::size_t>(step)];
}

Bounds Episode::band_at(int step) const {
  const int idx = std::min(step, static_cast<int>(day_.size()) - 1);
  return comfort_band(step, day_[static_cast<std::size_t>(idx)].is_weekday, scenario_);
}

const EnvState& Episode::state() const {
  if (!started_) throw std::logic_error("episode: state() before reset()");
  return state_;
}

EnvState Episode::make_state(int step) const {
  const int idx = std::min(step, static_cast<int>(day_.size()) - 1);
  return build_state(temps_, t_out_buffer_, day_[static_cast<std::size_t>(idx)].is_weekday, step,
                     p_limit_schedule_, weights_at(step), scenario_);
}

Episode::StepOutcome Episode::step(std::span<const double> raw_action) {
  return step_impl(denormalize_action(raw_action, model_));
}

Episode::StepOutcome Episode::step_command(const rom::HvacCommand& cmd) {
  if (!rom::command_within_bounds(cmd, model_, 1e-9))
    throw std::invalid_argument("episode: command outside the actuator bounds");
  return step_impl(cmd);
}

Episode::StepOutcome Episode::step_impl(const rom::HvacCommand& cmd) {
  if (!started_) throw std::logic_error("episode: step() before reset()");
  if (done()) throw std::logic_error("episode: step() after the episode finished");

  const int t = current_step_;
  const auto& exo = day_[static_cast<std::size_t>(t)];

  // Stage cost: discomfort of the current temperatures plus the energy and
  // limit violation produced by this command.
  const Bounds band = band_at(t);
  double discomfort_sum = 0.0;
  for (double temp : temps_) discomfort_sum += discomfort(temp, band);

  const double power = rom::hvac_power(cmd, exo.t_out, model_);
  const double energy = rom::interval_energy(power, model_.dt_hours);
  const double violation = violation_penalty(power, p_limit_at(t));
  const auto w = weights_at(t);
  const double r = reward(w, scenario_.kappa, discomfort_sum, energy, violation);

  TraceRow row;
  row.step = t;
  row.zone_temps = temps_;
  row.cmd = cmd;
  row.power_kw = power;
  row.p_limit_kw = p_limit_at(t);
  row.reward = r;
  row.discomfort_sum = discomfort_sum;
  row.energy_kwh = energy;
  row.violation = violation;
  trace_.push_back(std::move(row));

  // Advance the thermal state.
  std::span<const std::vector<double>> temp_hist(&temps_, 1);
  temps_ = rom::step_temperature(model_, temp_hist, cmd, exo);

  const int next = t + 1;
  const int next_idx = std::min(next, static_cast<int>(day_.size()) - 1);
  t_out_buffer_.erase(t_out_buffer_.begin());
  t_out_buffer_.push_back(day_[static_cast<std::size_t>(next_idx)].t_out);

  current_step_ = next;
  return_ += r;
  state_ = make_state(next);

  StepOutcome out;
  out.next_state = state_;
  out.reward = r;
  out.discomfort_sum = discomfort_sum;
  out.energy_kwh = energy;
  out.violation = violation;
  out.power_kw = power;
  out.done = done();
  return out;
}

void Episode::write_trace_csv(const std::filesystem::path& path) const {
  const int n = model_.zone_count();
  std::vector<std::string> header{"step"};
  for (int i = 1; i <= n; ++i) header.push_back("t_zone_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("mdot_" + std::to_string(i));
  header.insert(header.end(), {"t_da", "power_kw", "p_limit_kw", "reward", "discomfort", "energy_kwh",
                               "violation"});
  CsvWriter w(header);
  for (const auto& row : trace_) {
    std::vector<std::string> cells{std::to_string(row.step)};
    for (double v : row.zone_temps) cells.push_back(format_double(v));
    for (double v : row.cmd.mdot) cells.push_back(format_double(v));
    cells.push_back(format_double(row.cmd.t_da));
    cells.push_back(format_double(row.power_kw));
    cells.push_back(format_double(row.p_limit_kw));
    cells.push_back(format_double(row.reward));
    cells.push_back(format_double(row.discomfort_sum));
    cells.push_back(format_double(row.energy_kwh));
    cells.push_back(format_double(row.violation));
    w.add_row(cells);
  }
  w.write(path);
}

Episode EpisodeFactory::make(std::uint64_t seed) const {
  if (days.empty()) throw std::invalid_argument("episode factory: empty day pool");
  auto rng = make_rng(seed);
  const std::size_t day_index = static_cast<std::size_t>(rng() % days.size());
  const std::uint64_t episode_seed = rng();
  return Episode(scenario, model, days[day_index], episode_seed);
}

double rollout_cost(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& act,
                    Episode episode) {
  episode.reset();
  while (!episode.done()) {
    const Eigen::VectorXd a = act(episode.state().vector(episode.scenario()));
    episode.step(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
  }
  return episode.episode_cost();
}

}  // namespace hvacrl::env
