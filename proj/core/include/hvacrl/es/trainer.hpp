#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hvacrl/env/episode.hpp"
#include "hvacrl/nn/mlp.hpp"

namespace hvacrl::es {

// Black-box episodic cost of a parameter vector on one seeded episode.
using CostFn = std::function<double(const Eigen::VectorXd& theta, std::uint64_t episode_seed)>;

struct EsConfig {
  int iterations = 300;
  int population_size = 64;        // antithetic pairs x2; even, >= 2
  double perturbation_std = 0.02;  // sigma applied to each direction
  double learning_rate = 1e-2;
  int episodes_per_fitness = 2;    // common seeds shared by the population, fresh per iteration
  std::vector<std::uint64_t> eval_seeds;  // fixed episodes scoring the unperturbed policy
  int worker_count = 1;
  int checkpoint_interval = 25;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

struct FitnessReport {
  int iteration = 0;       // 0 is the pre-training baseline (population stats NaN)
  double mean_cost = 0.0;  // population episodic-cost statistics
  double std_cost = 0.0;
  double min_cost = 0.0;
  double eval_cost = 0.0;  // unperturbed policy on the fixed eval seeds
  double wall_seconds = 0.0;
};

struct EsResult {
  Eigen::VectorXd theta;
  std::vector<FitnessReport> curve;
  bool aborted = false;
  std::string abort_reason;
};

// One standard-normal direction per column; each column yields the
// antithetic pair theta +/- sigma*eps.
Eigen::MatrixXd perturb_population(Eigen::Index dim, int pairs, std::mt19937_64& rng);

// Mean episodic cost of a candidate over the given seeds.
double evaluate_fitness(const Eigen::VectorXd& theta, const CostFn& cost,
                        std::span<const std::uint64_t> episode_seeds);

// Fractional centered ranks mapped into [-0.5, 0.5]; ties share their
// average rank, so a constant batch maps to all zeros.
std::vector<double> centered_ranks(std::span<const double> values);

// Rank-shaped antithetic estimator, ascent direction on fitness (higher is
// better). fitness[2k] and fitness[2k+1] belong to +eps_k and -eps_k.
Eigen::VectorXd es_gradient(std::span<const double> fitness, const Eigen::MatrixXd& directions,
                            double perturbation_std);

using CheckpointFn = std::function<void(int iteration, const Eigen::VectorXd& theta)>;

// Plain gradient ascent on rank-shaped antithetic fitness, minimizing the
// episodic cost. A failed iteration (evaluation error or non-finite costs)
// is retried once with fresh perturbations; a second failure aborts with the
// partial curve and the best parameters so far.
EsResult train_es(const Eigen::VectorXd& theta0, const CostFn& cost, const EsConfig& config,
                  const CheckpointFn& on_checkpoint = {});

// Adapts an episode factory to the CostFn interface: the deterministic
// policy network (forward output as the raw action) rolled out on the
// seeded episode.
CostFn make_episode_cost(env::EpisodeFactory factory, nn::MlpSpec spec);

}  // namespace hvacrl::es
