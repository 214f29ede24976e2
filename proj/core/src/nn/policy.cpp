#include "hvacrl/nn/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hvacrl/common/math.hpp"
#include "hvacrl/common/rng.hpp"

namespace hvacrl::nn {

GaussianPolicy::GaussianPolicy(Mlp net, double sigma_floor)
    : net_(std::move(net)), sigma_floor_(sigma_floor) {
  const int out = net_.spec().output_dim();
  if (out % 2 != 0)
    throw std::invalid_argument("gaussian policy: network output size must be even");
  if (sigma_floor_ <= 0.0) throw std::invalid_argument("gaussian policy: sigma floor must be > 0");
  action_dim_ = out / 2;
}

GaussianPolicy::Moments GaussianPolicy::moments(const Eigen::VectorXd& state) const {
  Eigen::VectorXd raw = net_.forward(state);
  Moments m;
  m.mean = raw.head(action_dim_);
  m.pre_sigma = raw.tail(action_dim_);
  m.sigma.resize(action_dim_);
  for (int i = 0; i < action_dim_; ++i) m.sigma(i) = softplus(m.pre_sigma(i)) + sigma_floor_;
  return m;
}

Eigen::VectorXd GaussianPolicy::mean_action(const Eigen::VectorXd& state) const {
  return net_.forward(state).head(action_dim_);
}

Eigen::VectorXd GaussianPolicy::sample(const Moments& m, std::mt19937_64& rng) const {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd a(action_dim_);
  for (int i = 0; i < action_dim_; ++i) a(i) = m.mean(i) + m.sigma(i) * n(rng);
  return a;
}

double GaussianPolicy::log_prob(const Moments& m, const Eigen::VectorXd& action) const {
  return gaussian_log_prob(m.mean, m.sigma, action);
}

void split_policy_output(const Eigen::MatrixXd& raw, double sigma_floor, Eigen::MatrixXd& mean,
                         Eigen::MatrixXd& sigma) {
  if (raw.rows() % 2 != 0)
    throw std::invalid_argument("split_policy_output: output row count must be even");
  const Eigen::Index d = raw.rows() / 2;
  mean = raw.topRows(d);
  sigma.resize(d, raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c)
    for (Eigen::Index r = 0; r < d; ++r) sigma(r, c) = softplus(raw(d + r, c)) + sigma_floor;
}

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& sigma,
                         const Eigen::VectorXd& action) {
  if (mean.size() != sigma.size() || mean.size() != action.size())
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)
  double lp = -0.5 * kLogTwoPi * static_cast<double>(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action(i) - mean(i)) / sigma(i);
    lp -= std::log(sigma(i)) + 0.5 * z * z;
  }
  return lp;
}

WarmStart transfer_warm_start(const Mlp& source, const MlpSpec& policy_spec,
                              const MlpSpec& value_spec, double initial_sigma, double sigma_floor,
                              std::uint64_t value_seed) {
  policy_spec.validate();
  value_spec.validate();
  const MlpSpec& src = source.spec();
  const std::size_t n = src.sizes.size();
  if (policy_spec.sizes.size() != n || value_spec.sizes.size() != n)
    throw std::invalid_argument("warm start: layer counts differ from the source network");
  for (std::size_t l = 0; l + 1 < n; ++l)
    if (policy_spec.sizes[l] != src.sizes[l] || value_spec.sizes[l] != src.sizes[l])
      throw std::invalid_argument("warm start: hidden architecture differs from the source network");
  const int act = src.output_dim();
  if (policy_spec.output_dim() != 2 * act)
    throw std::invalid_argument("warm start: policy output must be twice the source output");
  if (value_spec.output_dim() != 1)
    throw std::invalid_argument("warm start: value output must be scalar");
  if (initial_sigma <= sigma_floor)
    throw std::invalid_argument("warm start: initial sigma must exceed the sigma floor");

  const int last = src.layer_count() - 1;

  Mlp policy_net(policy_spec);
  for (int l = 0; l < last; ++l) {
    policy_net.weight(l) = source.weights()[static_cast<std::size_t>(l)];
    policy_net.bias(l) = source.biases()[static_cast<std::size_t>(l)];
  }
  policy_net.weight(last).setZero();
  policy_net.weight(last).topRows(act) = source.weights()[static_cast<std::size_t>(last)];
  const double pre_bias = inverse_softplus(initial_sigma - sigma_floor);
  policy_net.bias(last).head(act) = source.biases()[static_cast<std::size_t>(last)];
  policy_net.bias(last).tail(act).setConstant(pre_bias);

  Mlp value_net(value_spec);
  for (int l = 0; l < last; ++l) {
    value_net.weight(l) = source.weights()[static_cast<std::size_t>(l)];
    value_net.bias(l) = source.biases()[static_cast<std::size_t>(l)];
  }
  auto rng = make_rng(value_seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(value_net.weight(last).cols()));
  std::uniform_real_distribution<double> u(-s, s);
  for (Eigen::Index r = 0; r < value_net.weight(last).rows(); ++r)
    for (Eigen::Index c = 0; c < value_net.weight(last).cols(); ++c)
      value_net.weight(last)(r, c) = u(rng);
  for (Eigen::Index r = 0; r < value_net.bias(last).size(); ++r) value_net.bias(last)(r) = u(rng);

  WarmStart out;
  out.policy = GaussianPolicy(std::move(policy_net), sigma_floor);
  out.value = std::move(value_net);
  return out;
}

}  // namespace hvacrl::nn
