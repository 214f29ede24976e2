#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

#include "hvacrl/nn/mlp.hpp"

namespace hvacrl::nn {

// Diagonal Gaussian head over an Mlp whose output stacks the action means on
// top of pre-sigma values: sigma = softplus(pre) + sigma_floor.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(Mlp net, double sigma_floor = 1e-3);

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  int action_dim() const { return action_dim_; }
  double sigma_floor() const { return sigma_floor_; }

  struct Moments {
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma;
    Eigen::VectorXd pre_sigma;
  };
  Moments moments(const Eigen::VectorXd& state) const;

  // Deterministic mean path: the first action_dim outputs. Bitwise equal to
  // the source network's forward pass after a warm start.
  Eigen::VectorXd mean_action(const Eigen::VectorXd& state) const;

  Eigen::VectorXd sample(const Moments& m, std::mt19937_64& rng) const;
  double log_prob(const Moments& m, const Eigen::VectorXd& action) const;

 private:
  Mlp net_;
  int action_dim_ = 0;
  double sigma_floor_ = 1e-3;
};

// Splits a batch of raw network outputs (columns are samples) into means and
// sigmas under the softplus-plus-floor parameterization.
void split_policy_output(const Eigen::MatrixXd& raw, double sigma_floor, Eigen::MatrixXd& mean,
                         Eigen::MatrixXd& sigma);

// Diagonal Gaussian log density.
double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& sigma,
                         const Eigen::VectorXd& action);

struct WarmStart {
  GaussianPolicy policy;
  Mlp value;
};

// Stage-one-to-stage-two weight transfer. The policy net doubles the output
// layer: the mean rows are copied from the source net bitwise and the
// pre-sigma rows get zero weights with a bias solved so that
// softplus(bias) + sigma_floor == initial_sigma everywhere. The value net
// copies every layer except the last, which is drawn fresh from value_seed.
WarmStart transfer_warm_start(const Mlp& source, const MlpSpec& policy_spec,
                              const MlpSpec& value_spec, double initial_sigma, double sigma_floor,
                              std::uint64_t value_seed);

}  // namespace hvacrl::nn
