#include "hvacrl/rom/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hvacrl::rom {

using nlohmann::json;

std::string feature_name(const Feature& f) {
  switch (f.kind) {
    case FeatureKind::OutdoorTemp: return "t_out";
    case FeatureKind::DeliveredCooling: return "q_hvac";
    case FeatureKind::SolarGain: return "q_solar";
    case FeatureKind::InternalGain: return "q_int";
    case FeatureKind::OtherZoneTemp: return "t_zone_" + std::to_string(f.other_zone + 1);
  }
  throw std::logic_error("feature_name: bad kind");
}

Feature feature_from_name(const std::string& name) {
  if (name == "t_out") return {FeatureKind::OutdoorTemp, -1};
  if (name == "q_hvac") return {FeatureKind::DeliveredCooling, -1};
  if (name == "q_solar") return {FeatureKind::SolarGain, -1};
  if (name == "q_int") return {FeatureKind::InternalGain, -1};
  const std::string prefix = "t_zone_";
  if (name.rfind(prefix, 0) == 0) {
    int z = std::stoi(name.substr(prefix.size()));
    return {FeatureKind::OtherZoneTemp, z - 1};
  }
  throw std::invalid_argument("unknown feature name: " + name);
}

void ZoneArxModel::validate(int zone_count) const {
  if (n_a < 1) throw std::invalid_argument("zone " + std::to_string(zone_id) + ": n_a must be >= 1");
  if (n_b < 1) throw std::invalid_argument("zone " + std::to_string(zone_id) + ": n_b must be >= 1");
  if (static_cast<int>(a_coeffs.size()) != n_a)
    throw std::invalid_argument("zone " + std::to_string(zone_id) + ": a_coeffs size != n_a");
  if (static_cast<int>(b_coeffs.size()) != n_b)
    throw std::invalid_argument("zone " + std::to_string(zone_id) + ": b_coeffs rows != n_b");
  for (const auto& row : b_coeffs)
    if (row.size() != feature_spec.size())
      throw std::invalid_argument("zone " + std::to_string(zone_id) +
                                  ": b_coeffs row width != feature_spec size");
  for (const auto& f : feature_spec) {
    if (f.kind == FeatureKind::OtherZoneTemp) {
      if (f.other_zone < 0 || f.other_zone >= zone_count)
        throw std::invalid_argument("zone " + std::to_string(zone_id) +
                                    ": other-zone feature out of range");
      if (f.other_zone == zone_id)
        throw std::invalid_argument("zone " + std::to_string(zone_id) +
                                    ": other-zone feature refers to itself");
    }
  }
}

int BuildingModel::max_lag() const {
  int m = 1;
  for (const auto& z : zones) m = std::max({m, z.n_a, z.n_b});
  return m;
}

void BuildingModel::validate() const {
  if (zones.empty()) throw std::invalid_argument("building model has no zones");
  if (mdot_bounds.size() != zones.size())
    throw std::invalid_argument("mdot_bounds size != zone count");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (zones[i].zone_id != static_cast<int>(i))
      throw std::invalid_argument("zone_id mismatch at index " + std::to_string(i));
    zones[i].validate(zone_count());
  }
  if (t_da_bounds.lo >= t_da_bounds.hi) throw std::invalid_argument("bad t_da bounds");
  for (const auto& b : mdot_bounds)
    if (b.lo >= b.hi || b.lo < 0.0) throw std::invalid_argument("bad mdot bounds");
  if (dt_hours <= 0.0) throw std::invalid_argument("dt_hours must be positive");
  if (c_p <= 0.0) throw std::invalid_argument("c_p must be positive");
}

double hvac_power(const HvacCommand& cmd, double t_out, const BuildingModel& model) {
  if (cmd.mdot.size() != model.zones.size())
    throw std::invalid_argument("hvac_power: command zone count mismatch");
  double total_mdot = 0.0;
  for (double m : cmd.mdot) total_mdot += m;
  return model.power_a * (t_out - cmd.t_da) * total_mdot +
         model.power_b * total_mdot * total_mdot * total_mdot + model.power_c;
}

double interval_energy(double power_kw, double dt_hours) { return power_kw * dt_hours; }

double delivered_cooling(double mdot, double t_da, double t_zone, double c_p) {
  return c_p * mdot * (t_zone - t_da);
}

namespace {

// Input-vector entry for `zone` at lag j (j = 1 is the current step).
double feature_value(const Feature& f, int zone, const std::vector<double>& temps,
                     const HvacCommand& cmd, const ExogenousRecord& exo, double c_p) {
  switch (f.kind) {
    case FeatureKind::OutdoorTemp: return exo.t_out;
    case FeatureKind::DeliveredCooling:
      return delivered_cooling(cmd.mdot.at(static_cast<std::size_t>(zone)), cmd.t_da,
                               temps.at(static_cast<std::size_t>(zone)), c_p);
    case FeatureKind::SolarGain: return exo.q_solar.at(static_cast<std::size_t>(zone));
    case FeatureKind::InternalGain: return exo.q_int.at(static_cast<std::size_t>(zone));
    case FeatureKind::OtherZoneTemp: return temps.at(static_cast<std::size_t>(f.other_zone));
  }
  throw std::logic_error("feature_value: bad kind");
}

}  // namespace

std::vector<double> step_temperature(const BuildingModel& model,
                                     std::span<const std::vector<double>> temp_history,
                                     std::span<const HvacCommand> cmd_history,
                                     std::span<const ExogenousRecord> exo_history) {
  const int n = model.zone_count();
  const int depth = static_cast<int>(temp_history.size());
  std::vector<double> next(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const ZoneArxModel& zm = model.zones[static_cast<std::size_t>(i)];
    if (depth < std::max(zm.n_a, zm.n_b))
      throw std::invalid_argument("step_temperature: temp_history depth " + std::to_string(depth) +
                                  " < required " + std::to_string(std::max(zm.n_a, zm.n_b)) +
                                  " for zone " + std::to_string(i));
    if (static_cast<int>(cmd_history.size()) < zm.n_b ||
        static_cast<int>(exo_history.size()) < zm.n_b)
      throw std::invalid_argument("step_temperature: cmd/exo history depth < n_b for zone " +
                                  std::to_string(i));
    double acc = 0.0;
    // lag j pulls history element [size - j] (chronological storage)
    for (int j = 1; j <= zm.n_a; ++j)
      acc += zm.a_coeffs[static_cast<std::size_t>(j - 1)] *
             temp_history[temp_history.size() - static_cast<std::size_t>(j)]
                         [static_cast<std::size_t>(i)];
    for (int j = 1; j <= zm.n_b; ++j) {
      const auto& temps = temp_history[temp_history.size() - static_cast<std::size_t>(j)];
      const auto& cmd = cmd_history[cmd_history.size() - static_cast<std::size_t>(j)];
      const auto& exo = exo_history[exo_history.size() - static_cast<std::size_t>(j)];
      const auto& b = zm.b_coeffs[static_cast<std::size_t>(j - 1)];
      for (std::size_t k = 0; k < zm.feature_spec.size(); ++k)
        acc += b[k] * feature_value(zm.feature_spec[k], i, temps, cmd, exo, model.c_p);
    }
    next[static_cast<std::size_t>(i)] = acc;
  }
  return next;
}

std::vector<double> step_temperature(const BuildingModel& model,
                                     std::span<const std::vector<double>> temp_history,
                                     const HvacCommand& cmd, const ExogenousRecord& exo) {
  for (const auto& z : model.zones)
    if (z.n_b != 1)
      throw std::invalid_argument(
          "step_temperature: single-record form needs n_b == 1, zone " +
          std::to_string(z.zone_id) + " has n_b == " + std::to_string(z.n_b));
  return step_temperature(model, temp_history, std::span<const HvacCommand>(&cmd, 1),
                          std::span<const ExogenousRecord>(&exo, 1));
}

bool command_within_bounds(const HvacCommand& cmd, const BuildingModel& model, double tol) {
  if (cmd.mdot.size() != model.mdot_bounds.size()) return false;
  for (std::size_t i = 0; i < cmd.mdot.size(); ++i)
    if (!model.mdot_bounds[i].contains(cmd.mdot[i], tol)) return false;
  return model.t_da_bounds.contains(cmd.t_da, tol);
}

HvacCommand clamp_command(HvacCommand cmd, const BuildingModel& model) {
  for (std::size_t i = 0; i < cmd.mdot.size(); ++i)
    cmd.mdot[i] = std::clamp(cmd.mdot[i], model.mdot_bounds[i].lo, model.mdot_bounds[i].hi);
  cmd.t_da = std::clamp(cmd.t_da, model.t_da_bounds.lo, model.t_da_bounds.hi);
  return cmd;
}

namespace {

json feature_to_json(const Feature& f) { return feature_name(f); }

json zone_to_json(const ZoneArxModel& z) {
  json j;
  j["zone_id"] = z.zone_id;
  j["n_a"] = z.n_a;
  j["n_b"] = z.n_b;
  j["a_coeffs"] = z.a_coeffs;
  j["b_coeffs"] = z.b_coeffs;
  json feats = json::array();
  for (const auto& f : z.feature_spec) feats.push_back(feature_to_json(f));
  j["features"] = feats;
  return j;
}

ZoneArxModel zone_from_json(const json& j) {
  ZoneArxModel z;
  z.zone_id = j.at("zone_id").get<int>();
  z.n_a = j.at("n_a").get<int>();
  z.n_b = j.at("n_b").get<int>();
  z.a_coeffs = j.at("a_coeffs").get<std::vector<double>>();
  z.b_coeffs = j.at("b_coeffs").get<std::vector<std::vector<double>>>();
  for (const auto& f : j.at("features")) z.feature_spec.push_back(feature_from_name(f.get<std::string>()));
  return z;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

std::string BuildingModel::to_json_string() const {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["power"] = {{"a", power_a}, {"b", power_b}, {"c", power_c}};
  j["c_p"] = c_p;
  j["t_da_bounds"] = {t_da_bounds.lo, t_da_bounds.hi};
  json mb = json::array();
  for (const auto& b : mdot_bounds) mb.push_back({b.lo, b.hi});
  j["mdot_bounds"] = mb;
  j["dt_hours"] = dt_hours;
  json zs = json::array();
  for (const auto& z : zones) zs.push_back(zone_to_json(z));
  j["zones"] = zs;
  return j.dump(2) + "\n";
}

BuildingModel BuildingModel::from_json_string(const std::string& text) {
  json j = json::parse(text);
  int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw std::runtime_error("unsupported building model format version " +
                             std::to_string(version));
  BuildingModel m;
  m.power_a = j.at("power").at("a").get<double>();
  m.power_b = j.at("power").at("b").get<double>();
  m.power_c = j.at("power").at("c").get<double>();
  m.c_p = j.at("c_p").get<double>();
  auto tb = j.at("t_da_bounds").get<std::vector<double>>();
  m.t_da_bounds = {tb.at(0), tb.at(1)};
  for (const auto& b : j.at("mdot_bounds")) {
    auto v = b.get<std::vector<double>>();
    m.mdot_bounds.push_back({v.at(0), v.at(1)});
  }
  m.dt_hours = j.at("dt_hours").get<double>();
  for (const auto& z : j.at("zones")) m.zones.push_back(zone_from_json(z));
  m.validate();
  return m;
}

void BuildingModel::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << to_json_string();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

BuildingModel BuildingModel::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_json_string(ss.str());
}

}  // namespace hvacrl::rom
