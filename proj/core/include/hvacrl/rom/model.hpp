#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hvacrl::rom {

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool operator==(const Bounds&) const = default;
};

// Regressor kinds for the per-zone input vector. A zone's input vector is
// assembled in the order of its feature_spec.
enum class FeatureKind {
  OutdoorTemp,       // outdoor dry bulb, deg C
  DeliveredCooling,  // sensible cooling delivered to the zone, kW
  SolarGain,         // solar heat gain, kW
  InternalGain,      // internal (people/plug/light) gain, kW
  OtherZoneTemp,     // a neighbouring zone's air temperature, deg C
};

struct Feature {
  FeatureKind kind = FeatureKind::OutdoorTemp;
  int other_zone = -1;  // only meaningful for OtherZoneTemp
  bool operator==(const Feature&) const = default;
};

std::string feature_name(const Feature& f);
Feature feature_from_name(const std::string& name);

// One zone of the autoregressive-with-exogenous-inputs temperature model:
//   T[t] = sum_j a[j] * T[t-j] + sum_j b[j] . u[t-j]
// with n_a temperature lags and n_b input-vector lags.
struct ZoneArxModel {
  int zone_id = 0;
  int n_a = 1;
  int n_b = 1;
  std::vector<double> a_coeffs;               // size n_a
  std::vector<std::vector<double>> b_coeffs;  // n_b rows, each feature_spec.size() wide
  std::vector<Feature> feature_spec;

  void validate(int zone_count) const;  // throws std::invalid_argument
};

// Per-step HVAC command: one supply mass flow per zone plus the shared
// discharge air temperature.
struct HvacCommand {
  std::vector<double> mdot;  // kg/s, one entry per zone
  double t_da = 0.0;         // deg C
};

struct ExogenousRecord {
  std::int64_t step = 0;
  double t_out = 0.0;           // deg C
  std::vector<double> q_solar;  // kW per zone
  std::vector<double> q_int;    // kW per zone
  bool is_weekday = true;
};

struct BuildingModel {
  std::vector<ZoneArxModel> zones;

  // Electric power model P = a*(t_out - t_da)*sum(mdot) + b*sum(mdot)^3 + c
  double power_a = 1.0;
  double power_b = 0.0076;
  double power_c = 4.8865;  // kW, idle draw

  double c_p = 1.0;  // kWh/(kg K), delivered-cooling coefficient

  Bounds t_da_bounds{10.0, 16.0};
  std::vector<Bounds> mdot_bounds;  // per zone
  double dt_hours = 1.0 / 12.0;     // control interval

  int zone_count() const { return static_cast<int>(zones.size()); }
  int max_lag() const;

  void validate() const;  // throws std::invalid_argument

  std::string to_json_string() const;
  static BuildingModel from_json_string(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static BuildingModel load(const std::filesystem::path& path);
};

// Total electric power drawn by the air loop, kW.
double hvac_power(const HvacCommand& cmd, double t_out, const BuildingModel& model);

// Energy over one control interval, kWh.
double interval_energy(double power_kw, double dt_hours);

// Sensible cooling delivered to one zone, kW: c_p * mdot * (t_zone - t_da).
double delivered_cooling(double mdot, double t_da, double t_zone, double c_p);

// Advances every zone temperature by one step. Histories are chronological:
// element [size-1] is the current step t, [size-2] is t-1, and so on.
// temp_history needs depth >= max(n_a, n_b); cmd/exo histories need depth
// >= n_b. The returned vector is T[t+1] for every zone.
std::vector<double> step_temperature(const BuildingModel& model,
                                     std::span<const std::vector<double>> temp_history,
                                     std::span<const HvacCommand> cmd_history,
                                     std::span<const ExogenousRecord> exo_history);

// Single-lag convenience form (every zone must have n_b == 1): the current
// command and exogenous record are the only inputs the step depends on.
std::vector<double> step_temperature(const BuildingModel& model,
                                     std::span<const std::vector<double>> temp_history,
                                     const HvacCommand& cmd, const ExogenousRecord& exo);

bool command_within_bounds(const HvacCommand& cmd, const BuildingModel& model, double tol = 0.0);
HvacCommand clamp_command(HvacCommand cmd, const BuildingModel& model);

}  // namespace hvacrl::rom
