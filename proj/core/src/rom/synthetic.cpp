#include "hvacrl/rom/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hvacrl/common/rng.hpp"

namespace hvacrl::rom {

void SyntheticConfig::validate() const {
  if (zone_count <= 0) throw std::invalid_argument("synthetic: zone_count must be positive");
  if (dt_hours <= 0.0) throw std::invalid_argument("synthetic: dt_hours must be positive");
  if (noise_phi < 0.0 || noise_phi >= 1.0)
    throw std::invalid_argument("synthetic: noise_phi must be in [0, 1)");
  if (solar_scale.size() != static_cast<std::size_t>(zone_count) ||
      solar_peak_hour.size() != static_cast<std::size_t>(zone_count))
    throw std::invalid_argument("synthetic: per-zone solar arrays must match zone_count");
  if (occupied_start_hour >= occupied_end_hour)
    throw std::invalid_argument("synthetic: bad occupancy window");
}

std::vector<ExogenousRecord> generate_synthetic_exogenous(const SyntheticConfig& config, int days,
                                                          std::uint64_t seed) {
  config.validate();
  if (days <= 0) throw std::invalid_argument("synthetic: days must be positive");

  const int steps_per_day = static_cast<int>(std::lround(24.0 / config.dt_hours));
  const int total = days * steps_per_day;
  std::mt19937_64 rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Stationary AR(1) start, innovations scaled to keep the stationary std at
  // noise_std.
  const double innov_std = config.noise_std * std::sqrt(1.0 - config.noise_phi * config.noise_phi);
  double ar = config.noise_std > 0.0 ? config.noise_std * gauss(rng) : 0.0;

  std::vector<ExogenousRecord> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int t = 0; t < total; ++t) {
    const int day = t / steps_per_day;
    const int step_in_day = t % steps_per_day;
    const double hour = 24.0 * static_cast<double>(step_in_day) / steps_per_day;
    const int dow = (config.first_day_of_week + day) % 7;
    const bool weekday = dow < 5;

    ExogenousRecord rec;
    rec.step = t;
    rec.is_weekday = weekday;

    const double phase =
        2.0 * std::numbers::pi * (hour - (config.t_out_peak_hour - 6.0)) / 24.0;
    rec.t_out = config.t_out_mean + config.t_out_amplitude * std::sin(phase) + ar;
    if (t + 1 < total) ar = config.noise_phi * ar + (innov_std > 0.0 ? innov_std * gauss(rng) : 0.0);

    const bool daylight = hour >= config.daylight_start_hour && hour < config.daylight_end_hour;
    const bool occupied =
        weekday && hour >= config.occupied_start_hour && hour < config.occupied_end_hour;
    for (int z = 0; z < config.zone_count; ++z) {
      double solar = 0.0;
      if (daylight) {
        const double d = hour - config.solar_peak_hour[static_cast<std::size_t>(z)];
        solar = config.solar_peak_kw * config.solar_scale[static_cast<std::size_t>(z)] *
                std::exp(-d * d / (2.0 * config.solar_width_hours * config.solar_width_hours));
      }
      rec.q_solar.push_back(solar);
      rec.q_int.push_back(occupied ? config.internal_occupied_kw : config.internal_floor_kw);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

struct ZoneRow {
  double a;
  double b_out;
  double b_hvac;
  double b_sol;  // <= 0 marks "no solar feature"
  double b_int;
  std::vector<std::pair<int, double>> couplings;  // (other zone, coefficient)
};

ZoneArxModel make_zone(int id, const ZoneRow& row) {
  ZoneArxModel z;
  z.zone_id = id;
  z.n_a = 1;
  z.n_b = 1;
  z.a_coeffs = {row.a};
  std::vector<double> b;
  z.feature_spec.push_back({FeatureKind::OutdoorTemp, -1});
  b.push_back(row.b_out);
  z.feature_spec.push_back({FeatureKind::DeliveredCooling, -1});
  b.push_back(row.b_hvac);
  if (row.b_sol > 0.0) {
    z.feature_spec.push_back({FeatureKind::SolarGain, -1});
    b.push_back(row.b_sol);
  }
  z.feature_spec.push_back({FeatureKind::InternalGain, -1});
  b.push_back(row.b_int);
  for (auto [other, c] : row.couplings) {
    z.feature_spec.push_back({FeatureKind::OtherZoneTemp, other});
    b.push_back(c);
  }
  z.b_coeffs = {b};
  return z;
}

}  // namespace

BuildingModel reference_building_model() {
  // Zone order: 0 south, 1 east, 2 north, 3 west, 4 core. Self coefficients
  // sit near 1 so free-floating temperatures track the outdoor sinusoid with
  // a few-hour time constant; the core zone has no exterior solar gain and a
  // weak outdoor tie.
  std::vector<ZoneRow> rows = {
      {0.963, 0.0200, -0.0150, 0.0140, 0.0075, {{1, 0.004}, {3, 0.004}, {4, 0.008}}},
      {0.965, 0.0180, -0.0145, 0.0150, 0.0070, {{0, 0.004}, {2, 0.004}, {4, 0.008}}},
      {0.967, 0.0160, -0.0148, 0.0145, 0.0078, {{1, 0.004}, {3, 0.004}, {4, 0.008}}},
      {0.962, 0.0210, -0.0155, 0.0155, 0.0072, {{0, 0.004}, {2, 0.004}, {4, 0.008}}},
      {0.972, 0.0100, -0.0140, 0.0, 0.0090, {{0, 0.004}, {1, 0.004}, {2, 0.004}, {3, 0.004}}},
  };
  BuildingModel m;
  for (int i = 0; i < 5; ++i) m.zones.push_back(make_zone(i, rows[static_cast<std::size_t>(i)]));
  m.mdot_bounds = {{0.22, 2.2}, {0.22, 2.2}, {0.22, 2.2}, {0.22, 2.2}, {0.32, 3.2}};
  m.validate();
  return m;
}

OperationDataset simulate_operation(const BuildingModel& model,
                                    std::vector<ExogenousRecord> exogenous,
                                    std::uint64_t excitation_seed, double initial_temp) {
  model.validate();
  if (exogenous.empty()) throw std::invalid_argument("simulate_operation: no exogenous records");
  const int n = model.zone_count();
  for (const auto& rec : exogenous)
    if (rec.q_solar.size() != static_cast<std::size_t>(n) ||
        rec.q_int.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("simulate_operation: exogenous zone width mismatch");

  std::mt19937_64 rng = make_rng(excitation_seed);
  OperationDataset data;
  data.zone_count = n;
  data.dt_hours = model.dt_hours;

  // Histories front-padded to the model's lag depth so the first steps are
  // well defined: pre-history temperatures equal the initial temperature and
  // pre-history inputs repeat the first real entry.
  const auto lag = static_cast<std::size_t>(model.max_lag());
  std::vector<std::vector<double>> temp_hist(
      lag, std::vector<double>(static_cast<std::size_t>(n), initial_temp));
  std::vector<HvacCommand> cmd_hist;
  std::vector<ExogenousRecord> exo_hist;

  for (std::size_t t = 0; t < exogenous.size(); ++t) {
    HvacCommand cmd;
    for (int z = 0; z < n; ++z) {
      std::uniform_real_distribution<double> u(model.mdot_bounds[static_cast<std::size_t>(z)].lo,
                                               model.mdot_bounds[static_cast<std::size_t>(z)].hi);
      cmd.mdot.push_back(u(rng));
    }
    std::uniform_real_distribution<double> u_tda(model.t_da_bounds.lo, model.t_da_bounds.hi);
    cmd.t_da = u_tda(rng);

    if (cmd_hist.empty()) {
      cmd_hist.assign(lag, cmd);
      exo_hist.assign(lag, exogenous[t]);
    } else {
      cmd_hist.erase(cmd_hist.begin());
      cmd_hist.push_back(cmd);
      exo_hist.erase(exo_hist.begin());
      exo_hist.push_back(exogenous[t]);
    }

    data.exogenous.push_back(exogenous[t]);
    data.zone_temps.push_back(temp_hist.back());
    data.commands.push_back(cmd);

    if (t + 1 < exogenous.size()) {
      auto next = step_temperature(model, temp_hist, cmd_hist, exo_hist);
      temp_hist.erase(temp_hist.begin());
      temp_hist.push_back(std::move(next));
    }
  }
  data.validate();
  return data;
}

}  // namespace hvacrl::rom
