#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "hvacrl/rom/sysid.hpp"

using namespace hvacrl::rom;

namespace {

// Two zones driven by a known lag-1 ARX recurrence:
//   T0' = 0.85 T0 + 0.030 t_out - 0.040 q0 + 0.020 s0 + 0.060 T1
//   T1' = 0.90 T1 + 0.015 t_out - 0.025 q1 + 0.030 i1
OperationDataset known_arx_dataset(int steps, std::uint64_t seed) {
  OperationDataset data;
  data.zone_count = 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mdot(0.2, 2.0);
  std::uniform_real_distribution<double> tda(10.0, 16.0);
  std::uniform_real_distribution<double> weather(18.0, 34.0);
  std::uniform_real_distribution<double> gain(0.0, 6.0);

  std::vector<double> temps{24.0, 25.0};
  for (int t = 0; t < steps; ++t) {
    ExogenousRecord e;
    e.step = t;
    e.t_out = weather(rng);
    e.q_solar = {gain(rng), gain(rng)};
    e.q_int = {gain(rng), gain(rng)};
    HvacCommand cmd{{mdot(rng), mdot(rng)}, tda(rng)};

    data.exogenous.push_back(e);
    data.zone_temps.push_back(temps);
    data.commands.push_back(cmd);

    const double q0 = cmd.mdot[0] * (temps[0] - cmd.t_da);
    const double q1 = cmd.mdot[1] * (temps[1] - cmd.t_da);
    const std::vector<double> next{
        0.85 * temps[0] + 0.030 * e.t_out - 0.040 * q0 + 0.020 * e.q_solar[0] + 0.060 * temps[1],
        0.90 * temps[1] + 0.015 * e.t_out - 0.025 * q1 + 0.030 * e.q_int[1]};
    temps = next;
  }
  return data;
}

}  // namespace

TEST_CASE("fit_arx recovers the generating coefficients to solver precision") {
  const OperationDataset data = known_arx_dataset(2000, 21);
  ArxFitSpec spec;
  spec.features = {{FeatureKind::OutdoorTemp, -1},
                   {FeatureKind::DeliveredCooling, -1},
                   {FeatureKind::SolarGain, -1},
                   {FeatureKind::OtherZoneTemp, 1}};
  const ArxFitResult fit = fit_arx(data, 0, spec);
  CHECK(fit.rmse <= 1e-7);
  CHECK(std::fabs(fit.model.a_coeffs[0] - 0.85) <= 1e-7);
  CHECK(std::fabs(fit.model.b_coeffs[0][0] - 0.030) <= 1e-7);
  CHECK(std::fabs(fit.model.b_coeffs[0][1] + 0.040) <= 1e-7);
  CHECK(std::fabs(fit.model.b_coeffs[0][2] - 0.020) <= 1e-7);
  CHECK(std::fabs(fit.model.b_coeffs[0][3] - 0.060) <= 1e-7);
  CHECK(fit.model.zone_id == 0);
  CHECK_FALSE(fit.ridge_applied);
  CHECK(fit.condition_number > 1.0);
}

TEST_CASE("fit_arx names degenerate regressor columns") {
  OperationDataset data = known_arx_dataset(400, 3);
  ArxFitSpec spec;
  // Internal gain for zone 0 duplicated: two identical columns.
  spec.features = {{FeatureKind::InternalGain, -1}, {FeatureKind::InternalGain, -1}};
  try {
    (void)fit_arx(data, 0, spec);
    FAIL("expected a degeneracy error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("q_int") != std::string::npos);
  }
}

TEST_CASE("feature_select keeps the generating features and drops noise") {
  const OperationDataset data = known_arx_dataset(3000, 8);
  const std::vector<Feature> candidates{{FeatureKind::OutdoorTemp, -1},
                                        {FeatureKind::DeliveredCooling, -1},
                                        {FeatureKind::SolarGain, -1},
                                        {FeatureKind::InternalGain, -1},
                                        {FeatureKind::OtherZoneTemp, 1}};
  const FeatureSelectResult sel = feature_select(data, 0, candidates);
  auto has = [&](FeatureKind k) {
    for (const auto& f : sel.selected)
      if (f.kind == k) return true;
    return false;
  };
  CHECK(has(FeatureKind::OutdoorTemp));
  CHECK(has(FeatureKind::DeliveredCooling));
  CHECK(has(FeatureKind::SolarGain));
  CHECK(has(FeatureKind::OtherZoneTemp));
  CHECK_FALSE(has(FeatureKind::InternalGain));
  CHECK(sel.validation_rmse <= 1e-6);
  CHECK(sel.log.size() >= sel.selected.size());

  // Zone 1 has no solar or coupling term.
  const FeatureSelectResult sel1 = feature_select(data, 1, candidates);
  auto has1 = [&](FeatureKind k) {
    for (const auto& f : sel1.selected)
      if (f.kind == k) return true;
    return false;
  };
  CHECK(has1(FeatureKind::OutdoorTemp));
  CHECK(has1(FeatureKind::DeliveredCooling));
  CHECK(has1(FeatureKind::InternalGain));
  CHECK_FALSE(has1(FeatureKind::SolarGain));
}

TEST_CASE("one_step_rmse matches a manual residual computation") {
  const OperationDataset data = known_arx_dataset(500, 13);
  ZoneArxModel z;
  z.zone_id = 1;
  z.a_coeffs = {0.90};
  z.b_coeffs = {{0.015, -0.025, 0.030}};
  z.feature_spec = {{FeatureKind::OutdoorTemp, -1},
                    {FeatureKind::DeliveredCooling, -1},
                    {FeatureKind::InternalGain, -1}};
  CHECK(one_step_rmse(data, z, 1.0, 1, data.size()) <= 1e-8);

  // A wrong coefficient shows up as a nonzero residual.
  z.a_coeffs = {0.80};
  CHECK(one_step_rmse(data, z, 1.0, 1, data.size()) > 0.1);
}

TEST_CASE("fit ranges that are too small are rejected") {
  // Six usable sample pairs for six coefficients: exactly at the m > cols
  // boundary, so the fit must refuse.
  const OperationDataset data = known_arx_dataset(7, 2);
  ArxFitSpec spec;
  spec.features = {{FeatureKind::OutdoorTemp, -1}, {FeatureKind::DeliveredCooling, -1},
                   {FeatureKind::SolarGain, -1},   {FeatureKind::InternalGain, -1},
                   {FeatureKind::OtherZoneTemp, 1}};
  CHECK_THROWS_AS((void)fit_arx(data, 0, spec), std::invalid_argument);
}
