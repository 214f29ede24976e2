#include "hvacrl/es/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hvacrl/common/parallel.hpp"
#include "hvacrl/common/rng.hpp"

namespace hvacrl::es {

void EsConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("es config: iterations must be >= 0");
  if (population_size < 2 || population_size % 2 != 0)
    throw std::invalid_argument("es config: population_size must be even and >= 2");
  if (!(perturbation_std > 0.0))
    throw std::invalid_argument("es config: perturbation_std must be > 0");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("es config: learning_rate must be >= 0");
  if (episodes_per_fitness < 1)
    throw std::invalid_argument("es config: episodes_per_fitness must be >= 1");
  if (eval_seeds.empty()) throw std::invalid_argument("es config: eval_seeds must not be empty");
  if (worker_count < 1) throw std::invalid_argument("es config: worker_count must be >= 1");
  if (checkpoint_interval < 1)
    throw std::invalid_argument("es config: checkpoint_interval must be >= 1");
}

Eigen::MatrixXd perturb_population(Eigen::Index dim, int pairs, std::mt19937_64& rng) {
  if (dim < 1 || pairs < 1) throw std::invalid_argument("perturb_population: empty population");
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd eps(dim, pairs);
  for (int k = 0; k < pairs; ++k)
    for (Eigen::Index i = 0; i < dim; ++i) eps(i, k) = n(rng);
  return eps;
}

double evaluate_fitness(const Eigen::VectorXd& theta, const CostFn& cost,
                        std::span<const std::uint64_t> episode_seeds) {
  if (episode_seeds.empty()) throw std::invalid_argument("evaluate_fitness: no episode seeds");
  double total = 0.0;
  for (std::uint64_t s : episode_seeds) total += cost(theta, s);
  return total / static_cast<double>(episode_seeds.size());
}

std::vector<double> centered_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  // Average the positions of tied runs so equal values share one rank.
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank;
    i = j + 1;
  }
  const double denom = static_cast<double>(n - 1);
  for (double& r : out) r = r / denom - 0.5;
  return out;
}

Eigen::VectorXd es_gradient(std::span<const double> fitness, const Eigen::MatrixXd& directions,
                            double perturbation_std) {
  const int pairs = static_cast<int>(directions.cols());
  if (fitness.size() != static_cast<std::size_t>(2 * pairs))
    throw std::invalid_argument("es_gradient: need one fitness per signed population member");
  const std::vector<double> shaped = centered_ranks(fitness);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(directions.rows());
  for (int k = 0; k < pairs; ++k)
    g.noalias() += (shaped[static_cast<std::size_t>(2 * k)] -
                    shaped[static_cast<std::size_t>(2 * k + 1)]) *
                   directions.col(k);
  g /= static_cast<double>(fitness.size()) * perturbation_std;
  return g;
}

namespace {

struct PopulationStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
};

PopulationStats population_stats(const std::vector<double>& costs) {
  PopulationStats s;
  s.mean = std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
  double var = 0.0;
  s.min = costs.front();
  for (double c : costs) {
    var += (c - s.mean) * (c - s.mean);
    s.min = std::min(s.min, c);
  }
  s.stddev = std::sqrt(var / static_cast<double>(costs.size()));
  return s;
}

// Population costs for theta +/- sigma*eps, index 2k for +, 2k+1 for -.
std::vector<double> evaluate_population(const Eigen::VectorXd& theta, const Eigen::MatrixXd& eps,
                                        const CostFn& cost,
                                        std::span<const std::uint64_t> episode_seeds,
                                        const EsConfig& config) {
  const int members = 2 * static_cast<int>(eps.cols());
  std::vector<double> costs(static_cast<std::size_t>(members), 0.0);
  parallel_for(members, config.worker_count, [&](int k) {
    const int pair = k / 2;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const Eigen::VectorXd candidate = theta + sign * config.perturbation_std * eps.col(pair);
    costs[static_cast<std::size_t>(k)] = evaluate_fitness(candidate, cost, episode_seeds);
  });
  for (double c : costs)
    if (!std::isfinite(c)) throw std::runtime_error("non-finite episodic cost in the population");
  return costs;
}

double evaluate_fixed(const Eigen::VectorXd& theta, const CostFn& cost, const EsConfig& config) {
  std::vector<double> costs(config.eval_seeds.size(), 0.0);
  parallel_for(static_cast<int>(config.eval_seeds.size()), config.worker_count, [&](int j) {
    costs[static_cast<std::size_t>(j)] =
        cost(theta, config.eval_seeds[static_cast<std::size_t>(j)]);
  });
  double total = 0.0;
  for (double c : costs) total += c;
  const double mean = total / static_cast<double>(costs.size());
  if (!std::isfinite(mean)) throw std::runtime_error("non-finite evaluation cost");
  return mean;
}

}  // namespace

EsResult train_es(const Eigen::VectorXd& theta0, const CostFn& cost, const EsConfig& config,
                  const CheckpointFn& on_checkpoint) {
  config.validate();
  if (!cost) throw std::invalid_argument("train_es: cost function required");

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

  EsResult result;
  result.theta = theta0;

  FitnessReport baseline;
  baseline.iteration = 0;
  baseline.mean_cost = kNan;
  baseline.std_cost = kNan;
  baseline.min_cost = kNan;
  baseline.eval_cost = evaluate_fixed(result.theta, cost, config);
  baseline.wall_seconds = elapsed();
  result.curve.push_back(baseline);

  const int pairs = config.population_size / 2;
  for (int iter = 1; iter <= config.iterations; ++iter) {
    std::vector<double> costs;
    Eigen::MatrixXd eps;
    bool ok = false;
    std::string failure;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
      const char* tag = attempt == 0 ? "perturb" : "perturb-retry";
      const char* episode_tag = attempt == 0 ? "episodes" : "episodes-retry";
      auto rng = make_rng(derive_seed(config.seed, tag, static_cast<std::uint64_t>(iter)));
      eps = perturb_population(theta0.size(), pairs, rng);
      auto episode_rng =
          make_rng(derive_seed(config.seed, episode_tag, static_cast<std::uint64_t>(iter)));
      std::vector<std::uint64_t> episode_seeds(static_cast<std::size_t>(config.episodes_per_fitness));
      for (auto& s : episode_seeds) s = episode_rng();
      try {
        costs = evaluate_population(result.theta, eps, cost, episode_seeds, config);
        ok = true;
      } catch (const std::exception& e) {
        failure = e.what();
      }
    }
    if (!ok) {
      result.aborted = true;
      result.abort_reason =
          "iteration " + std::to_string(iter) + " failed twice: " + failure;
      return result;
    }

    // Ascent on fitness = negated cost.
    std::vector<double> fitness(costs.size());
    for (std::size_t k = 0; k < costs.size(); ++k) fitness[k] = -costs[k];
    const Eigen::VectorXd g = es_gradient(fitness, eps, config.perturbation_std);
    result.theta += config.learning_rate * g;

    FitnessReport report;
    report.iteration = iter;
    const PopulationStats stats = population_stats(costs);
    report.mean_cost = stats.mean;
    report.std_cost = stats.stddev;
    report.min_cost = stats.min;
    report.eval_cost = evaluate_fixed(result.theta, cost, config);
    report.wall_seconds = elapsed();
    result.curve.push_back(report);

    if (on_checkpoint && iter % config.checkpoint_interval == 0) on_checkpoint(iter, result.theta);
  }
  return result;
}

CostFn make_episode_cost(env::EpisodeFactory factory, nn::MlpSpec spec) {
  spec.validate();
  return [factory = std::move(factory), spec = std::move(spec)](const Eigen::VectorXd& theta,
                                                                std::uint64_t episode_seed) {
    nn::Mlp net(spec);
    net.unflatten(theta);
    return env::rollout_cost([&](const Eigen::VectorXd& s) { return net.forward(s); },
                             factory.make(episode_seed));
  };
}

}  // namespace hvacrl::es
