#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "hvacrl/common/rng.hpp"
#include "hvacrl/env/episode.hpp"
#include "hvacrl/env/scenario.hpp"

using namespace hvacrl;
using namespace hvacrl::env;

namespace {

rom::BuildingModel one_zone() {
  rom::BuildingModel m;
  rom::ZoneArxModel z;
  z.zone_id = 0;
  z.a_coeffs = {0.9};
  z.b_coeffs = {{0.05, -0.02}};
  z.feature_spec = {{rom::FeatureKind::OutdoorTemp, -1}, {rom::FeatureKind::DeliveredCooling, -1}};
  m.zones = {z};
  m.mdot_bounds = {{0.2, 2.0}};
  return m;
}

std::vector<rom::ExogenousRecord> flat_day(int steps, double t_out, bool weekday, int zones = 1) {
  std::vector<rom::ExogenousRecord> day(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    day[static_cast<std::size_t>(t)].step = t;
    day[static_cast<std::size_t>(t)].t_out = t_out;
    day[static_cast<std::size_t>(t)].q_solar.assign(static_cast<std::size_t>(zones), 0.0);
    day[static_cast<std::size_t>(t)].q_int.assign(static_cast<std::size_t>(zones), 0.0);
    day[static_cast<std::size_t>(t)].is_weekday = weekday;
  }
  return day;
}

}  // namespace

TEST_CASE("dr event arithmetic") {
  ScenarioConfig cfg;
  const DrEvent e = make_dr_event(0.3, 140, cfg);
  CHECK(e.duration_minutes() == 156.0);
  CHECK(e.power_limit_kw == 36.0);
  CHECK(e.duration_steps == 32);  // ceil(156 / 5)
  CHECK(e.covers(140));
  CHECK(e.covers(171));
  CHECK_FALSE(e.covers(172));
  CHECK_FALSE(e.covers(139));

  CHECK(make_dr_event(0.0, 0, cfg).duration_steps == 24);
  CHECK(make_dr_event(0.0, 0, cfg).power_limit_kw == 30.0);
  CHECK(make_dr_event(1.0, 0, cfg).duration_steps == 48);
  CHECK(make_dr_event(1.0, 0, cfg).power_limit_kw == 50.0);
  CHECK_THROWS_AS((void)make_dr_event(1.5, 0, cfg), std::invalid_argument);
}

TEST_CASE("dr sampling hits the clock window with the configured probability") {
  ScenarioConfig cfg;
  cfg.dr_probability = 1.0;
  std::set<int> starts;
  auto rng = make_rng(123);
  for (int i = 0; i < 4000; ++i) {
    const auto e = sample_dr_event(rng, cfg);
    REQUIRE(e.has_value());
    CHECK(e->chi >= 0.0);
    CHECK(e->chi <= 1.0);
    // Steps whose clock time lies in [11h, 18h]: 11 * 12 = 132 .. 18 * 12 = 216.
    CHECK(e->start_step >= 132);
    CHECK(e->start_step <= 216);
    starts.insert(e->start_step);
  }
  CHECK(starts.size() == 85);  // every admissible start step gets drawn

  cfg.dr_probability = 0.0;
  auto rng2 = make_rng(5);
  for (int i = 0; i < 50; ++i) CHECK_FALSE(sample_dr_event(rng2, cfg).has_value());

  cfg.dr_probability = 0.5;
  auto rng3 = make_rng(7);
  int events = 0;
  for (int i = 0; i < 2000; ++i) events += sample_dr_event(rng3, cfg).has_value() ? 1 : 0;
  CHECK(events > 2000 / 2 - 120);
  CHECK(events < 2000 / 2 + 120);

  auto rng4 = make_rng(11);
  auto rng5 = make_rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto a = sample_dr_event(rng4, cfg);
    const auto b = sample_dr_event(rng5, cfg);
    CHECK(a.has_value() == b.has_value());
    if (a) {
      CHECK(a->chi == b->chi);
      CHECK(a->start_step == b->start_step);
    }
  }
}

TEST_CASE("discomfort is a dead band with a linear-quadratic tail") {
  const Bounds band{23.0, 25.0};
  CHECK(discomfort(24.0, band) == 0.0);
  CHECK(discomfort(23.0, band) == 0.0);
  CHECK(discomfort(25.0, band) == 0.0);
  CHECK(discomfort(25.7, band) == doctest::Approx(0.7).epsilon(1e-14));    // max(0.7, 0.49)
  CHECK(discomfort(26.5, band) == doctest::Approx(2.25).epsilon(1e-14));   // max(1.5, 2.25)
  CHECK(discomfort(21.0, band) == doctest::Approx(4.0).epsilon(1e-14));    // below, delta 2
  CHECK(discomfort(22.5, band) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("violation penalty is a squared hinge") {
  CHECK(violation_penalty(83.0, 80.0) == doctest::Approx(9.0));
  CHECK(violation_penalty(79.9, 80.0) == 0.0);
  CHECK(violation_penalty(80.0, 80.0) == 0.0);
}

TEST_CASE("reward is the negative weighted monetized cost") {
  const std::array<double, 3> w{0.7, 0.2, 0.1};
  const std::array<double, 3> kappa{1.0, 1.0, 1.0};
  CHECK(reward(w, kappa, 2.0, 10.0, 4.0) == doctest::Approx(-3.8).epsilon(1e-14));
  CHECK(reward(w, kappa, 0.0, 0.0, 0.0) == 0.0);
  const std::array<double, 3> k2{2.0, 0.5, 1.0};
  CHECK(reward(w, k2, 2.0, 10.0, 4.0) == doctest::Approx(-(2.8 + 1.0 + 0.4)).epsilon(1e-14));
}

TEST_CASE("comfort band tightens during weekday business hours") {
  ScenarioConfig cfg;
  CHECK(comfort_band(0, true, cfg) == cfg.comfort_unoccupied);          // midnight
  CHECK(comfort_band(7 * 12, true, cfg) == cfg.comfort_occupied);       // 07:00
  CHECK(comfort_band(12 * 12, true, cfg) == cfg.comfort_occupied);     // noon
  CHECK(comfort_band(19 * 12, true, cfg) == cfg.comfort_unoccupied);   // 19:00
  CHECK(comfort_band(12 * 12, false, cfg) == cfg.comfort_unoccupied);  // weekend noon
}

TEST_CASE("state vector layout and normalization") {
  ScenarioConfig cfg;
  EnvState s;
  s.zone_temps = {24.5};
  s.t_out_history.assign(48, 30.0);
  s.weekday_flag = 1.0;
  s.time_sin = 0.25;
  s.time_cos = -0.5;
  s.p_limit_forecast.assign(48, 40.0);
  s.step_frac = 0.5;
  s.weights = {0.7, 0.2, 0.1};
  CHECK(s.dimension() == 1 + 48 + 3 + 48 + 1 + 3);

  const Eigen::VectorXd v = s.vector(cfg);
  REQUIRE(v.size() == 104);
  CHECK(v(0) == doctest::Approx(0.15).epsilon(1e-14));  // (24.5 - 23) / 10
  for (int i = 1; i <= 48; ++i) CHECK(v(i) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(v(49) == 1.0);
  CHECK(v(50) == 0.25);
  CHECK(v(51) == -0.5);
  for (int i = 52; i < 100; ++i) CHECK(v(i) == 0.5);  // 40 / 80
  CHECK(v(100) == 0.5);
  CHECK(v(101) == 0.7);
  CHECK(v(102) == 0.2);
  CHECK(v(103) == 0.1);
}

TEST_CASE("time of day encodes exactly at the quarter points") {
  ScenarioConfig cfg;
  std::vector<double> schedule(336, 80.0);
  const std::vector<double> hist(48, 24.0);
  const std::array<double, 3> w{0.7, 0.2, 0.1};

  const EnvState midnight = build_state({24.0}, hist, true, 0, schedule, w, cfg);
  CHECK(midnight.time_sin == 0.0);
  CHECK(midnight.time_cos == 1.0);
  const EnvState six = build_state({24.0}, hist, true, 72, schedule, w, cfg);
  CHECK(six.time_sin == 1.0);
  CHECK(six.time_cos == 0.0);
  const EnvState noon = build_state({24.0}, hist, true, 144, schedule, w, cfg);
  CHECK(noon.time_sin == 0.0);
  CHECK(noon.time_cos == -1.0);
  const EnvState evening = build_state({24.0}, hist, true, 216, schedule, w, cfg);
  CHECK(evening.time_sin == -1.0);
  CHECK(evening.time_cos == 0.0);
}

TEST_CASE("build_state slices the forecast at the current step") {
  ScenarioConfig cfg;
  std::vector<double> schedule(336);
  for (std::size_t i = 0; i < schedule.size(); ++i) schedule[i] = static_cast<double>(i);
  std::vector<double> hist(48);
  for (std::size_t i = 0; i < hist.size(); ++i) hist[i] = 20.0 + static_cast<double>(i);
  const std::array<double, 3> w{0.5, 0.0, 0.5};

  const EnvState s = build_state({24.0}, hist, false, 100, schedule, w, cfg);
  REQUIRE(s.p_limit_forecast.size() == 48);
  for (int i = 0; i < 48; ++i) CHECK(s.p_limit_forecast[static_cast<std::size_t>(i)] == 100.0 + i);
  CHECK(s.t_out_history == hist);
  CHECK(s.weekday_flag == 0.0);
  CHECK(s.step_frac == doctest::Approx(100.0 / 288.0).epsilon(1e-15));

  CHECK_THROWS_AS((void)build_state({24.0}, hist, false, 300, schedule, w, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)build_state({24.0}, {20.0}, false, 0, schedule, w, cfg),
                  std::invalid_argument);
}

TEST_CASE("denormalize_action squashes onto the command box") {
  const rom::BuildingModel m = one_zone();
  const std::vector<double> center{0.0, 0.0};
  const rom::HvacCommand mid = denormalize_action(center, m);
  CHECK(mid.mdot[0] == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(mid.t_da == doctest::Approx(13.0).epsilon(1e-14));

  const rom::HvacCommand hi = denormalize_action(std::vector<double>{40.0, 40.0}, m);
  CHECK(hi.mdot[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hi.t_da == doctest::Approx(16.0).epsilon(1e-12));
  const rom::HvacCommand lo = denormalize_action(std::vector<double>{-40.0, -40.0}, m);
  CHECK(lo.mdot[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(lo.t_da == doctest::Approx(10.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)denormalize_action(std::vector<double>{0.0}, m), std::invalid_argument);
}

TEST_CASE("episode step charges the pre-transition temperatures") {
  ScenarioConfig cfg;
  cfg.occupied_start_hour = 0.0;  // occupied band from midnight for this check
  Episode ep(cfg, one_zone(), flat_day(288, 30.0, true), std::optional<DrEvent>{});
  const EnvState& s0 = ep.reset();
  CHECK(s0.zone_temps[0] == 24.0);

  // Step 0: T = 24 inside [23, 25], so only energy is charged.
  const auto out0 = ep.step_command({{2.0}, 10.0});
  // P = (30 - 10) * 2 + 0.0076 * 8 + 4.8865 = 44.9473
  CHECK(out0.power_kw == doctest::Approx(44.9473).epsilon(1e-12));
  CHECK(out0.discomfort_sum == 0.0);
  CHECK(out0.violation == 0.0);
  CHECK(out0.reward == doctest::Approx(-0.2 * 44.9473 / 12.0).epsilon(1e-12));
  // T' = 0.9*24 + 0.05*30 - 0.02*2*(24 - 10) = 22.54
  CHECK(out0.next_state.zone_temps[0] == doctest::Approx(22.54).epsilon(1e-12));

  // Step 1: discomfort now reflects 22.54 against [23, 25], before this step moves it.
  const auto out1 = ep.step_command({{0.2}, 16.0});
  CHECK(out1.discomfort_sum == doctest::Approx(0.46).epsilon(1e-10));
  const double p1 = (30.0 - 16.0) * 0.2 + 0.0076 * 0.008 + 4.8865;
  CHECK(out1.reward ==
        doctest::Approx(-(0.7 * 0.46 + 0.2 * p1 / 12.0)).epsilon(1e-10));
  CHECK(ep.episode_cost() == doctest::Approx(-(out0.reward + out1.reward)).epsilon(1e-12));
}

TEST_CASE("episode enforces reset and bounds discipline") {
  ScenarioConfig cfg;
  Episode ep(cfg, one_zone(), flat_day(288, 30.0, true), std::optional<DrEvent>{});
  CHECK_THROWS_AS((void)ep.step_command({{1.0}, 14.0}), std::logic_error);
  ep.reset();
  CHECK_THROWS_AS((void)ep.step_command({{5.0}, 14.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)ep.step_command({{1.0}, 9.0}), std::invalid_argument);
}

TEST_CASE("episode runs to the horizon and then refuses to step") {
  ScenarioConfig cfg;
  Episode ep(cfg, one_zone(), flat_day(288, 28.0, true), std::optional<DrEvent>{});
  ep.reset();
  int steps = 0;
  while (!ep.done()) {
    const auto out = ep.step_command({{1.0}, 13.0});
    ++steps;
    CHECK(out.reward <= 0.0);
    if (steps == 288) CHECK(out.done);
  }
  CHECK(steps == 288);
  CHECK(ep.trace().size() == 288);
  CHECK_THROWS_AS((void)ep.step_command({{1.0}, 13.0}), std::logic_error);
}

TEST_CASE("a fixed dr event reshapes weights limits and the forecast") {
  ScenarioConfig cfg;
  DrEvent e = make_dr_event(0.3, 150, cfg);
  Episode ep(cfg, one_zone(), flat_day(288, 30.0, true), std::optional<DrEvent>{e});
  ep.reset();
  REQUIRE(ep.dr_event().has_value());

  CHECK(ep.p_limit_at(149) == 80.0);
  CHECK(ep.p_limit_at(150) == 36.0);
  CHECK(ep.p_limit_at(181) == 36.0);
  CHECK(ep.p_limit_at(182) == 80.0);
  CHECK(ep.weights_at(149) == cfg.weights_normal);
  CHECK(ep.weights_at(150) == cfg.weights_dr);
  CHECK(ep.weights_at(182) == cfg.weights_normal);

  // The forecast segment visible from step 110 already shows the event.
  const EnvState& s0 = ep.state();
  CHECK(s0.p_limit_forecast[0] == 80.0);
  Episode ep2(cfg, one_zone(), flat_day(288, 30.0, true), std::optional<DrEvent>{e});
  ep2.reset();
  for (int t = 0; t < 110; ++t) ep2.step_command({{1.0}, 13.0});
  const auto& fc = ep2.state().p_limit_forecast;
  CHECK(fc[39] == 80.0);   // step 149
  CHECK(fc[40] == 36.0);   // step 150
}

TEST_CASE("violation cost appears under an active dr cap") {
  ScenarioConfig cfg;
  DrEvent e = make_dr_event(0.0, 0, cfg);  // cap 30 kW from step 0
  Episode ep(cfg, one_zone(), flat_day(288, 30.0, true), std::optional<DrEvent>{e});
  ep.reset();
  const auto out = ep.step_command({{2.0}, 10.0});
  const double p = 44.9473;
  CHECK(out.violation == doctest::Approx((p - 30.0) * (p - 30.0)).epsilon(1e-10));
  // DR weights: energy drops out, violation gets 0.5.
  CHECK(out.reward == doctest::Approx(-0.5 * out.violation).epsilon(1e-12));
}

TEST_CASE("sampled events are deterministic in the episode seed") {
  ScenarioConfig cfg;
  Episode a(cfg, one_zone(), flat_day(288, 30.0, true), std::uint64_t{42});
  Episode b(cfg, one_zone(), flat_day(288, 30.0, true), std::uint64_t{42});
  a.reset();
  b.reset();
  CHECK(a.dr_event().has_value() == b.dr_event().has_value());
  if (a.dr_event()) {
    CHECK(a.dr_event()->start_step == b.dr_event()->start_step);
    CHECK(a.dr_event()->chi == b.dr_event()->chi);
  }
  bool saw_event = false, saw_none = false;
  for (std::uint64_t s = 0; s < 40; ++s) {
    Episode probe(cfg, one_zone(), flat_day(288, 30.0, true), s);
    probe.reset();
    (probe.dr_event() ? saw_event : saw_none) = true;
  }
  CHECK(saw_event);
  CHECK(saw_none);
}

TEST_CASE("episode factory picks days and events from the seed") {
  ScenarioConfig cfg;
  EpisodeFactory factory{cfg, one_zone(), {flat_day(288, 26.0, true), flat_day(288, 34.0, false)}};
  bool saw_cool = false, saw_warm = false;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Episode ep = factory.make(s);
    ep.reset();
    const double t = ep.day().front().t_out;
    if (t == 26.0) saw_cool = true;
    if (t == 34.0) saw_warm = true;
  }
  CHECK(saw_cool);
  CHECK(saw_warm);

  Episode x = factory.make(9);
  Episode y = factory.make(9);
  x.reset();
  y.reset();
  CHECK(x.day().front().t_out == y.day().front().t_out);
  CHECK(x.dr_event().has_value() == y.dr_event().has_value());
}

TEST_CASE("rollout_cost equals stepping the policy by hand") {
  ScenarioConfig cfg;
  EpisodeFactory factory{cfg, one_zone(), {flat_day(288, 30.0, true)}};
  auto act = [](const Eigen::VectorXd& state) {
    Eigen::VectorXd raw(2);
    raw << state(0), -0.5;
    return raw;
  };

  Episode manual = factory.make(4);
  const EnvState* s = &manual.reset();
  double total = 0.0;
  while (!manual.done()) {
    const Eigen::VectorXd raw = act(s->vector(cfg));
    const std::vector<double> rawv{raw(0), raw(1)};
    const auto out = manual.step_command(denormalize_action(rawv, manual.model()));
    total += out.reward;
    s = &manual.state();
  }
  const double cost = rollout_cost(act, factory.make(4));
  CHECK(cost == doctest::Approx(-total).epsilon(1e-12));
}

TEST_CASE("trace csv carries the evaluation schema") {
  ScenarioConfig cfg;
  Episode ep(cfg, one_zone(), flat_day(288, 30.0, true), std::optional<DrEvent>{});
  ep.reset();
  for (int i = 0; i < 3; ++i) ep.step_command({{1.0}, 13.0});
  const auto path = std::filesystem::temp_directory_path() / "hvacrl_test_trace.csv";
  ep.write_trace_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "step,t_zone_1,mdot_1,t_da,power_kw,p_limit_kw,reward,discomfort,energy_kwh,violation");
  std::string row, last;
  int rows = 0;
  while (std::getline(in, row))
    if (!row.empty()) {
      ++rows;
      last = row;
    }
  CHECK(rows == 3);
  std::filesystem::remove(path);
}
