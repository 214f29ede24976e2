#pragma once

#include <cstdint>
#include <vector>

#include "hvacrl/rom/dataset.hpp"
#include "hvacrl/rom/model.hpp"

namespace hvacrl::rom {

// Shape of the generated weather / load profiles. Zone order follows the
// five-zone office layout: 0 south, 1 east, 2 north, 3 west, 4 core.
struct SyntheticConfig {
  int zone_count = 5;
  double dt_hours = 1.0 / 12.0;

  // Outdoor temperature: mean + amplitude * daily sinusoid + AR(1) noise.
  double t_out_mean = 24.0;
  double t_out_amplitude = 8.0;
  double t_out_peak_hour = 15.0;
  double noise_std = 0.5;  // stationary standard deviation of the AR(1) term
  double noise_phi = 0.9;

  // Solar gains: zero outside the daylight window, a bell around each zone's
  // orientation-dependent peak hour inside it.
  double solar_peak_kw = 6.0;
  double solar_width_hours = 2.5;
  double daylight_start_hour = 6.0;
  double daylight_end_hour = 20.0;
  std::vector<double> solar_scale{1.0, 1.0, 0.45, 1.0, 0.0};
  std::vector<double> solar_peak_hour{13.0, 9.5, 12.0, 15.5, 12.0};

  // Internal gains: occupied level on weekdays during business hours, floor
  // level otherwise (including all weekend hours).
  double internal_occupied_kw = 4.0;
  double internal_floor_kw = 0.5;
  double occupied_start_hour = 7.0;
  double occupied_end_hour = 19.0;
  int first_day_of_week = 0;  // 0 = Monday; days 5 and 6 of each week are weekend

  void validate() const;
};

// Deterministic given (config, days, seed).
std::vector<ExogenousRecord> generate_synthetic_exogenous(const SyntheticConfig& config, int days,
                                                          std::uint64_t seed);

// The ground-truth five-zone building used to manufacture operation data.
BuildingModel reference_building_model();

// Simulates the building under seeded uniform-random excitation commands and
// packages the trajectory as an operation dataset.
OperationDataset simulate_operation(const BuildingModel& model,
                                    std::vector<ExogenousRecord> exogenous,
                                    std::uint64_t excitation_seed,
                                    double initial_temp = 24.0);

}  // namespace hvacrl::rom
