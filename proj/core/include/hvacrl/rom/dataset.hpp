#pragma once

#include <filesystem>
#include <vector>

#include "hvacrl/rom/model.hpp"

namespace hvacrl::rom {

// Aligned operation history used for system identification: at step t the
// building had temperatures zone_temps[t], was driven by commands[t], and saw
// exogenous[t]. Columns (and the CSV layout) are:
//   step, t_out, q_solar_1..N, q_int_1..N, t_zone_1..N, mdot_1..N, t_da, is_weekday
struct OperationDataset {
  int zone_count = 0;
  double dt_hours = 1.0 / 12.0;
  std::vector<ExogenousRecord> exogenous;
  std::vector<std::vector<double>> zone_temps;
  std::vector<HvacCommand> commands;

  std::size_t size() const { return exogenous.size(); }
  void validate() const;  // equal lengths, consecutive step indices, positive dt

  void write_csv(const std::filesystem::path& path) const;
  static OperationDataset read_csv(const std::filesystem::path& path, double dt_hours = 1.0 / 12.0);

  // Splits into consecutive days of `steps_per_day` records each; the tail
  // shorter than a day is dropped.
  std::vector<std::vector<ExogenousRecord>> exogenous_days(int steps_per_day) const;
};

}  // namespace hvacrl::rom
