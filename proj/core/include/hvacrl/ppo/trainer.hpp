#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hvacrl/env/episode.hpp"
#include "hvacrl/nn/policy.hpp"

namespace hvacrl::ppo {

struct PpoConfig {
  int iterations = 100;
  double learning_rate = 5e-6;
  double clip_ratio = 0.2;
  double gae_lambda = 0.95;
  double discount = 0.99;
  int epochs_per_batch = 10;
  int minibatch_size = 288;
  int rollout_episodes = 6;  // per iteration
  double entropy_coefficient = 0.0;
  double value_loss_coefficient = 0.5;
  double max_grad_norm = 0.5;  // per network
  double divergence_factor = 3.0;
  std::vector<std::uint64_t> eval_seeds;  // deterministic-policy evaluation episodes
  int worker_count = 1;
  int checkpoint_interval = 10;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

struct RolloutBatch {
  Eigen::MatrixXd states;     // state_dim x T, column per step
  Eigen::MatrixXd actions;    // action_dim x T, pre-squash samples
  Eigen::VectorXd rewards;    // T
  Eigen::VectorXd log_probs;  // T, densities at collection time
  Eigen::VectorXd values;     // T, value predictions at collection time
  std::vector<int> episode_starts;  // episode e spans [starts[e], starts[e+1])

  int sample_count() const { return static_cast<int>(states.cols()); }
  int episode_count() const { return static_cast<int>(episode_starts.size()); }
  void validate() const;  // throws std::invalid_argument
};

RolloutBatch collect_rollouts(const nn::GaussianPolicy& policy, const nn::Mlp& value,
                              const env::EpisodeFactory& factory, const PpoConfig& config,
                              std::uint64_t seed);

struct GaeResult {
  Eigen::VectorXd advantages;      // normalized to mean 0, std 1
  Eigen::VectorXd advantages_raw;  // pre-normalization
  Eigen::VectorXd value_targets;   // advantages_raw + values
};

// Backward recursion per episode with a zero terminal bootstrap (episodes
// end at the horizon, never truncated).
GaeResult compute_gae(const RolloutBatch& batch, double discount, double lambda);

struct Minibatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_probs_old;
  Eigen::VectorXd advantages;  // normalized
  Eigen::VectorXd value_targets;
};

struct LossReport {
  double total = 0.0;
  double policy_loss = 0.0;  // negated clipped surrogate
  double value_loss = 0.0;   // MSE against targets
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss and flat-layout gradients for both networks.
// Throws on a non-finite loss.
LossReport ppo_loss(const nn::GaussianPolicy& policy, const nn::Mlp& value, const Minibatch& mb,
                    const PpoConfig& config, Eigen::VectorXd& policy_grad,
                    Eigen::VectorXd& value_grad);

struct PpoCurvePoint {
  int iteration = 0;   // 0 is the pre-training baseline
  double eval_cost = 0.0;  // deterministic mean-action policy on the fixed eval seeds
  double mean_batch_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_sigma = 0.0;
  double wall_seconds = 0.0;
};

struct PpoResult {
  nn::GaussianPolicy policy;  // lowest evaluation cost seen
  nn::Mlp value;              // value network paired with `policy`
  nn::GaussianPolicy final_policy;
  nn::Mlp final_value;
  std::vector<PpoCurvePoint> curve;
  double best_eval_cost = 0.0;
  int best_iteration = 0;
  bool halted = false;  // divergence guard or non-finite loss
  std::string halt_reason;
};

using CheckpointFn =
    std::function<void(int iteration, const nn::GaussianPolicy&, const nn::Mlp& value)>;

// Clipped-surrogate fine-tuning. Halts early when the deterministic
// evaluation cost exceeds divergence_factor times its starting value or a
// loss turns non-finite; the returned policy is always the best evaluated
// checkpoint.
PpoResult train_ppo(nn::GaussianPolicy policy, nn::Mlp value, const env::EpisodeFactory& factory,
                    const PpoConfig& config, const CheckpointFn& on_checkpoint = {});

// Mean episodic cost of the deterministic (mean-action) policy over the
// given episode seeds; matches the ES evaluation arithmetic exactly.
double evaluate_policy(const nn::GaussianPolicy& policy, const env::EpisodeFactory& factory,
                       std::span<const std::uint64_t> episode_seeds, int worker_count);

}  // namespace hvacrl::ppo
