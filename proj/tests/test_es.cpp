#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvacrl/common/rng.hpp"
#include "hvacrl/es/trainer.hpp"

using namespace hvacrl;
using namespace hvacrl::es;

namespace {

EsConfig quick_config() {
  EsConfig cfg;
  cfg.iterations = 5;
  cfg.population_size = 8;
  cfg.episodes_per_fitness = 1;
  cfg.eval_seeds = {1, 2};
  cfg.seed = 50;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  EsConfig cfg = quick_config();
  cfg.validate();
  cfg.population_size = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = quick_config();
  cfg.eval_seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = quick_config();
  cfg.perturbation_std = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = quick_config();
  cfg.worker_count = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("perturbations are seeded standard normal directions") {
  auto r1 = make_rng(4);
  auto r2 = make_rng(4);
  const Eigen::MatrixXd a = perturb_population(30, 40, r1);
  const Eigen::MatrixXd b = perturb_population(30, 40, r2);
  REQUIRE(a.rows() == 30);
  REQUIRE(a.cols() == 40);
  CHECK((a - b).norm() == 0.0);
  const double mean = a.mean();
  const double var = (a.array() - mean).square().mean();
  CHECK(std::fabs(mean) < 0.1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.15));
  CHECK((a.col(0) - a.col(1)).norm() > 0.0);
}

TEST_CASE("centered ranks") {
  const std::vector<double> v{3.0, 1.0, 2.0};
  const auto r = centered_ranks(v);
  CHECK(r[0] == 0.5);
  CHECK(r[1] == -0.5);
  CHECK(r[2] == 0.0);

  const std::vector<double> tied{5.0, 5.0, 5.0, 5.0};
  for (double x : centered_ranks(tied)) CHECK(x == 0.0);

  // Tied pair shares the average of positions 0 and 1.
  const std::vector<double> mixed{1.0, 1.0, 2.0, 4.0};
  const auto rm = centered_ranks(mixed);
  CHECK(rm[0] == doctest::Approx(0.5 / 3.0 - 0.5).epsilon(1e-15));
  CHECK(rm[1] == rm[0]);
  CHECK(rm[2] == doctest::Approx(2.0 / 3.0 - 0.5).epsilon(1e-15));
  CHECK(rm[3] == 0.5);
  double sum = 0.0;
  for (double x : rm) sum += x;
  CHECK(sum == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("es gradient on a single antithetic pair") {
  Eigen::MatrixXd eps(1, 1);
  eps << 2.0;
  const std::vector<double> fitness{1.0, 0.0};  // +eps wins
  const Eigen::VectorXd g = es_gradient(fitness, eps, 0.02);
  // (0.5 - (-0.5)) * 2.0 / (2 * 0.02)
  CHECK(g(0) == doctest::Approx(50.0).epsilon(1e-14));

  const std::vector<double> flipped{0.0, 1.0};
  CHECK(es_gradient(flipped, eps, 0.02)(0) == doctest::Approx(-50.0).epsilon(1e-14));
  const std::vector<double> tie{1.0, 1.0};
  CHECK(es_gradient(tie, eps, 0.02)(0) == 0.0);
  CHECK_THROWS_AS((void)es_gradient(std::vector<double>{1.0}, eps, 0.02), std::invalid_argument);
}

TEST_CASE("es gradient aligns with a linear fitness direction") {
  const Eigen::Index dim = 6;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  c(2) = 1.0;
  auto rng = make_rng(19);
  const Eigen::MatrixXd eps = perturb_population(dim, 400, rng);
  std::vector<double> fitness(800);
  for (int k = 0; k < 400; ++k) {
    fitness[static_cast<std::size_t>(2 * k)] = c.dot(eps.col(k));
    fitness[static_cast<std::size_t>(2 * k + 1)] = -c.dot(eps.col(k));
  }
  const Eigen::VectorXd g = es_gradient(fitness, eps, 0.02);
  const Eigen::VectorXd dir = g / g.norm();
  CHECK(dir(2) > 0.95);
}

TEST_CASE("evaluate_fitness averages the episode costs") {
  const CostFn cost = [](const Eigen::VectorXd& theta, std::uint64_t seed) {
    return theta(0) + static_cast<double>(seed);
  };
  Eigen::VectorXd theta(1);
  theta << 10.0;
  const std::vector<std::uint64_t> seeds{1, 2, 6};
  CHECK(evaluate_fitness(theta, cost, seeds) == doctest::Approx(13.0).epsilon(1e-15));
}

TEST_CASE("training minimizes a seeded quadratic") {
  const Eigen::Index dim = 20;
  Eigen::VectorXd target = Eigen::VectorXd::LinSpaced(dim, -0.6, 0.7);
  const CostFn cost = [&](const Eigen::VectorXd& theta, std::uint64_t) {
    return (theta - target).squaredNorm();
  };
  EsConfig cfg;
  cfg.iterations = 200;
  cfg.population_size = 64;
  cfg.perturbation_std = 0.02;
  cfg.learning_rate = 1e-2;
  cfg.episodes_per_fitness = 2;
  cfg.eval_seeds = {0};
  cfg.seed = 7;

  const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(dim);
  const EsResult result = train_es(theta0, cost, cfg);
  CHECK_FALSE(result.aborted);
  REQUIRE(result.curve.size() == 201);
  CHECK(result.curve.front().iteration == 0);
  CHECK(std::isnan(result.curve.front().mean_cost));
  CHECK(std::isnan(result.curve.front().std_cost));
  CHECK(std::isnan(result.curve.front().min_cost));
  CHECK(result.curve.front().eval_cost == doctest::Approx(target.squaredNorm()).epsilon(1e-12));
  for (std::size_t i = 1; i < result.curve.size(); ++i) {
    CHECK(result.curve[i].iteration == static_cast<int>(i));
    CHECK(std::isfinite(result.curve[i].mean_cost));
    CHECK(result.curve[i].min_cost <= result.curve[i].mean_cost);
    CHECK(result.curve[i].std_cost >= 0.0);
  }
  CHECK(result.curve.back().eval_cost < 0.1 * result.curve.front().eval_cost);
  CHECK(cost(result.theta, 0) == doctest::Approx(result.curve.back().eval_cost).epsilon(1e-12));

  // Same seed, same run; different seed, different trajectory.
  const EsResult again = train_es(theta0, cost, cfg);
  CHECK((again.theta - result.theta).norm() == 0.0);
  EsConfig other = cfg;
  other.seed = 8;
  CHECK((train_es(theta0, cost, other).theta - result.theta).norm() > 0.0);
}

TEST_CASE("zero learning rate leaves the parameters alone") {
  const CostFn cost = [](const Eigen::VectorXd& theta, std::uint64_t) {
    return theta.squaredNorm();
  };
  EsConfig cfg = quick_config();
  cfg.learning_rate = 0.0;
  Eigen::VectorXd theta0(3);
  theta0 << 1.0, -2.0, 0.5;
  const EsResult result = train_es(theta0, cost, cfg);
  CHECK((result.theta - theta0).norm() == 0.0);
  for (const auto& row : result.curve)
    CHECK(row.eval_cost == doctest::Approx(theta0.squaredNorm()).epsilon(1e-15));
}

TEST_CASE("checkpoint callback fires on the configured cadence") {
  const CostFn cost = [](const Eigen::VectorXd& theta, std::uint64_t) {
    return theta.squaredNorm();
  };
  EsConfig cfg = quick_config();
  cfg.iterations = 12;
  cfg.checkpoint_interval = 5;
  std::vector<int> seen;
  (void)train_es(Eigen::VectorXd::Ones(4), cost, cfg,
                 [&](int iter, const Eigen::VectorXd&) { seen.push_back(iter); });
  CHECK(seen == std::vector<int>{5, 10});
}

TEST_CASE("one bad population is retried and two abort with the partial curve") {
  std::atomic<int> calls{0};
  const CostFn flaky = [&](const Eigen::VectorXd& theta, std::uint64_t) {
    const int c = ++calls;
    if (c == 3) throw std::runtime_error("sensor glitch");
    return theta.squaredNorm();
  };
  EsConfig cfg = quick_config();
  cfg.iterations = 2;
  const EsResult ok = train_es(Eigen::VectorXd::Ones(2), flaky, cfg);
  CHECK_FALSE(ok.aborted);
  CHECK(ok.curve.size() == 3);

  const CostFn broken = [&](const Eigen::VectorXd&, std::uint64_t) -> double {
    throw std::runtime_error("dead actuator");
  };
  EsConfig cfg2 = quick_config();
  Eigen::VectorXd theta0 = Eigen::VectorXd::Ones(2);
  bool baseline_threw = false;
  try {
    (void)train_es(theta0, broken, cfg2);
  } catch (const std::exception&) {
    baseline_threw = true;  // the pre-training evaluation itself fails
  }
  CHECK(baseline_threw);

  std::atomic<int> calls2{0};
  const CostFn after_baseline = [&](const Eigen::VectorXd& theta, std::uint64_t) -> double {
    if (++calls2 > 2) throw std::runtime_error("dead actuator");
    return theta.squaredNorm();
  };
  const EsResult aborted = train_es(theta0, after_baseline, cfg2);
  CHECK(aborted.aborted);
  CHECK(aborted.curve.size() == 1);  // baseline row only
  CHECK(aborted.abort_reason.find("iteration 1") != std::string::npos);
  CHECK(aborted.abort_reason.find("dead actuator") != std::string::npos);
  CHECK((aborted.theta - theta0).norm() == 0.0);
}

TEST_CASE("non-finite population costs abort after the retry") {
  std::atomic<int> calls{0};
  const CostFn nan_cost = [&](const Eigen::VectorXd& theta, std::uint64_t) {
    if (++calls > 2) return std::numeric_limits<double>::quiet_NaN();
    return theta.squaredNorm();
  };
  EsConfig cfg = quick_config();
  const EsResult result = train_es(Eigen::VectorXd::Ones(2), nan_cost, cfg);
  CHECK(result.aborted);
  CHECK(result.abort_reason.find("non-finite") != std::string::npos);
}

TEST_CASE("episode cost adapter reproduces a manual rollout") {
  env::ScenarioConfig scenario;
  rom::BuildingModel model;
  rom::ZoneArxModel z;
  z.zone_id = 0;
  z.a_coeffs = {0.9};
  z.b_coeffs = {{0.05, -0.02}};
  z.feature_spec = {{rom::FeatureKind::OutdoorTemp, -1},
                    {rom::FeatureKind::DeliveredCooling, -1}};
  model.zones = {z};
  model.mdot_bounds = {{0.2, 2.0}};

  std::vector<rom::ExogenousRecord> day(288);
  for (int t = 0; t < 288; ++t) {
    day[static_cast<std::size_t>(t)].step = t;
    day[static_cast<std::size_t>(t)].t_out = 30.0;
    day[static_cast<std::size_t>(t)].q_solar = {1.0};
    day[static_cast<std::size_t>(t)].q_int = {0.5};
  }
  env::EpisodeFactory factory{scenario, model, {day}};
  const nn::MlpSpec spec{{104, 8, 2}};
  nn::Mlp net(spec);
  auto rng = make_rng(14);
  net.init_uniform(rng);

  const CostFn cost = make_episode_cost(factory, spec);
  const double from_adapter = cost(net.flatten(), 99);
  const double manual = env::rollout_cost(
      [&](const Eigen::VectorXd& s) { return net.forward(s); }, factory.make(99));
  CHECK(from_adapter == manual);
}
