#include "hvacrl/rom/dataset.hpp"

#include <stdexcept>
#include <string>

#include "hvacrl/common/csv.hpp"

namespace hvacrl::rom {

void OperationDataset::validate() const {
  if (zone_count <= 0) throw std::invalid_argument("dataset zone_count must be positive");
  if (dt_hours <= 0.0) throw std::invalid_argument("dataset dt_hours must be positive");
  if (zone_temps.size() != exogenous.size() || commands.size() != exogenous.size())
    throw std::invalid_argument("dataset column lengths differ");
  for (std::size_t t = 0; t < exogenous.size(); ++t) {
    const auto n = static_cast<std::size_t>(zone_count);
    if (exogenous[t].q_solar.size() != n || exogenous[t].q_int.size() != n ||
        zone_temps[t].size() != n || commands[t].mdot.size() != n)
      throw std::invalid_argument("dataset row " + std::to_string(t) + " has wrong zone width");
    if (t > 0 && exogenous[t].step != exogenous[t - 1].step + 1)
      throw std::invalid_argument("dataset step indices are not consecutive at row " +
                                  std::to_string(t));
  }
}

void OperationDataset::write_csv(const std::filesystem::path& path) const {
  validate();
  std::vector<std::string> header{"step", "t_out"};
  for (int i = 1; i <= zone_count; ++i) header.push_back("q_solar_" + std::to_string(i));
  for (int i = 1; i <= zone_count; ++i) header.push_back("q_int_" + std::to_string(i));
  for (int i = 1; i <= zone_count; ++i) header.push_back("t_zone_" + std::to_string(i));
  for (int i = 1; i <= zone_count; ++i) header.push_back("mdot_" + std::to_string(i));
  header.push_back("t_da");
  header.push_back("is_weekday");

  CsvWriter w(header);
  for (std::size_t t = 0; t < size(); ++t) {
    std::vector<std::string> row;
    row.reserve(header.size());
    row.push_back(std::to_string(exogenous[t].step));
    row.push_back(format_double(exogenous[t].t_out));
    for (double v : exogenous[t].q_solar) row.push_back(format_double(v));
    for (double v : exogenous[t].q_int) row.push_back(format_double(v));
    for (double v : zone_temps[t]) row.push_back(format_double(v));
    for (double v : commands[t].mdot) row.push_back(format_double(v));
    row.push_back(format_double(commands[t].t_da));
    row.push_back(exogenous[t].is_weekday ? "1" : "0");
    w.add_row(row);
  }
  w.write(path);
}

OperationDataset OperationDataset::read_csv(const std::filesystem::path& path, double dt_hours) {
  CsvTable table = CsvTable::read(path);

  // Count zones from the q_solar_* columns.
  int n = 0;
  while (table.column("q_solar_" + std::to_string(n + 1)) >= 0) ++n;
  if (n == 0) throw std::runtime_error(path.string() + ": no q_solar_* columns found");

  OperationDataset d;
  d.zone_count = n;
  d.dt_hours = dt_hours;
  const int c_step = table.require_column("step");
  const int c_tout = table.require_column("t_out");
  const int c_tda = table.require_column("t_da");
  const int c_wd = table.require_column("is_weekday");
  std::vector<int> c_sol(static_cast<std::size_t>(n)), c_int(static_cast<std::size_t>(n)),
      c_tz(static_cast<std::size_t>(n)), c_md(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    c_sol[static_cast<std::size_t>(i)] = table.require_column("q_solar_" + std::to_string(i + 1));
    c_int[static_cast<std::size_t>(i)] = table.require_column("q_int_" + std::to_string(i + 1));
    c_tz[static_cast<std::size_t>(i)] = table.require_column("t_zone_" + std::to_string(i + 1));
    c_md[static_cast<std::size_t>(i)] = table.require_column("mdot_" + std::to_string(i + 1));
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ExogenousRecord exo;
    exo.step = static_cast<std::int64_t>(table.number(r, c_step));
    exo.t_out = table.number(r, c_tout);
    exo.is_weekday = table.number(r, c_wd) != 0.0;
    std::vector<double> temps;
    HvacCommand cmd;
    for (int i = 0; i < n; ++i) {
      exo.q_solar.push_back(table.number(r, c_sol[static_cast<std::size_t>(i)]));
      exo.q_int.push_back(table.number(r, c_int[static_cast<std::size_t>(i)]));
      temps.push_back(table.number(r, c_tz[static_cast<std::size_t>(i)]));
      cmd.mdot.push_back(table.number(r, c_md[static_cast<std::size_t>(i)]));
    }
    cmd.t_da = table.number(r, c_tda);
    d.exogenous.push_back(std::move(exo));
    d.zone_temps.push_back(std::move(temps));
    d.commands.push_back(std::move(cmd));
  }
  d.validate();
  return d;
}

std::vector<std::vector<ExogenousRecord>> OperationDataset::exogenous_days(int steps_per_day) const {
  if (steps_per_day <= 0) throw std::invalid_argument("steps_per_day must be positive");
  std::vector<std::vector<ExogenousRecord>> days;
  const std::size_t per = static_cast<std::size_t>(steps_per_day);
  for (std::size_t start = 0; start + per <= exogenous.size(); start += per)
    days.emplace_back(exogenous.begin() + static_cast<std::ptrdiff_t>(start),
                      exogenous.begin() + static_cast<std::ptrdiff_t>(start + per));
  return days;
}

}  // namespace hvacrl::rom
