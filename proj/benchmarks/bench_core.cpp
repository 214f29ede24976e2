// Micro benchmarks for the hot paths: the thermal step, network passes, one
// environment step, the population gradient, and a horizon solve.

#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <random>
#include <vector>

#include "hvacrl/common/rng.hpp"
#include "hvacrl/env/episode.hpp"
#include "hvacrl/es/trainer.hpp"
#include "hvacrl/mpc/solver.hpp"
#include "hvacrl/nn/mlp.hpp"
#include "hvacrl/rom/synthetic.hpp"

using namespace hvacrl;

namespace {

std::vector<rom::ExogenousRecord> bench_day() {
  return rom::generate_synthetic_exogenous(rom::SyntheticConfig{}, 1, derive_seed(77, "bench"));
}

rom::HvacCommand mid_command(const rom::BuildingModel& model) {
  rom::HvacCommand cmd;
  for (const rom::Bounds& b : model.mdot_bounds) cmd.mdot.push_back(b.mid());
  cmd.t_da = model.t_da_bounds.mid();
  return cmd;
}

void bm_rom_step(benchmark::State& state) {
  const rom::BuildingModel model = rom::reference_building_model();
  const std::vector<std::vector<double>> history{std::vector<double>(5, 24.0)};
  const rom::HvacCommand cmd = mid_command(model);
  const rom::ExogenousRecord exo = bench_day()[150];
  for (auto _ : state) {
    benchmark::DoNotOptimize(rom::step_temperature(model, history, cmd, exo));
  }
}
BENCHMARK(bm_rom_step);

void bm_mlp_forward(benchmark::State& state) {
  nn::Mlp net(nn::MlpSpec{{108, 256, 128, 128, 64, 64, 32, 16, 6}});
  std::mt19937_64 rng(derive_seed(77, "forward"));
  net.init_uniform(rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(108, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(x));
  }
}
BENCHMARK(bm_mlp_forward);

void bm_mlp_backward(benchmark::State& state) {
  nn::Mlp net(nn::MlpSpec{{108, 256, 128, 128, 64, 64, 32, 16, 12}});
  std::mt19937_64 rng(derive_seed(77, "backward"));
  net.init_uniform(rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(108, 32, 0.25);
  const Eigen::MatrixXd dy = Eigen::MatrixXd::Constant(12, 32, 1.0);
  nn::Mlp::Cache cache;
  Eigen::VectorXd grad(net.parameter_count());
  for (auto _ : state) {
    net.forward_cached(x, cache);
    grad.setZero();
    net.backward(cache, dy, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(bm_mlp_backward);

void bm_episode_step(benchmark::State& state) {
  const env::ScenarioConfig scenario;
  const rom::BuildingModel model = rom::reference_building_model();
  const std::vector<rom::ExogenousRecord> day = bench_day();
  const std::vector<double> raw(6, 0.1);
  env::Episode episode(scenario, model, day, std::uint64_t{1});
  episode.reset();
  for (auto _ : state) {
    if (episode.done()) {
      state.PauseTiming();
      episode = env::Episode(scenario, model, day, std::uint64_t{1});
      episode.reset();
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(episode.step(raw));
  }
}
BENCHMARK(bm_episode_step);

void bm_es_gradient(benchmark::State& state) {
  const int pairs = 16;
  const Eigen::Index dim = 10000;
  std::mt19937_64 rng(derive_seed(77, "gradient"));
  const Eigen::MatrixXd dirs = es::perturb_population(dim, pairs, rng);
  std::vector<double> fitness(static_cast<std::size_t>(2 * pairs));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (double& f : fitness) f = uniform(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(es::es_gradient(fitness, dirs, 0.02));
  }
}
BENCHMARK(bm_es_gradient);

void bm_mpc_solve(benchmark::State& state) {
  const rom::BuildingModel model = rom::reference_building_model();
  const std::vector<rom::ExogenousRecord> day = bench_day();
  const env::ScenarioConfig scenario;

  mpc::MpcConfig cfg;
  cfg.variant = state.range(0) == 0 ? mpc::Variant::Lin : mpc::Variant::Rom;

  mpc::HorizonForecast forecast;
  for (int t = 0; t < cfg.horizon; ++t) {
    forecast.exo.push_back(day[static_cast<std::size_t>(120 + t)]);
    forecast.p_limit_kw.push_back(scenario.p_limit_normal_kw);
    forecast.weights.push_back(scenario.weights_normal);
    forecast.comfort.push_back(scenario.comfort_occupied);
  }
  const std::vector<double> temps(5, 25.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc::solve_horizon(temps, forecast, model, cfg));
  }
}
BENCHMARK(bm_mpc_solve)->Arg(0)->Arg(1)->ArgNames({"rom"});

}  // namespace

BENCHMARK_MAIN();
