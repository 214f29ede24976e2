#include "hvacrl/ppo/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hvacrl/common/math.hpp"
#include "hvacrl/common/parallel.hpp"
#include "hvacrl/common/rng.hpp"

namespace hvacrl::ppo {

void PpoConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("ppo config: iterations must be >= 0");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("ppo config: learning_rate must be >= 0");
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0))
    throw std::invalid_argument("ppo config: clip_ratio must lie in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("ppo config: gae_lambda must lie in [0, 1]");
  if (!(discount > 0.0 && discount <= 1.0))
    throw std::invalid_argument("ppo config: discount must lie in (0, 1]");
  if (epochs_per_batch < 1) throw std::invalid_argument("ppo config: epochs_per_batch must be >= 1");
  if (minibatch_size < 1) throw std::invalid_argument("ppo config: minibatch_size must be >= 1");
  if (rollout_episodes < 1) throw std::invalid_argument("ppo config: rollout_episodes must be >= 1");
  if (entropy_coefficient < 0.0)
    throw std::invalid_argument("ppo config: entropy_coefficient must be >= 0");
  if (value_loss_coefficient < 0.0)
    throw std::invalid_argument("ppo config: value_loss_coefficient must be >= 0");
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("ppo config: max_grad_norm must be > 0");
  if (!(divergence_factor > 1.0))
    throw std::invalid_argument("ppo config: divergence_factor must be > 1");
  if (eval_seeds.empty()) throw std::invalid_argument("ppo config: eval_seeds must not be empty");
  if (worker_count < 1) throw std::invalid_argument("ppo config: worker_count must be >= 1");
  if (checkpoint_interval < 1)
    throw std::invalid_argument("ppo config: checkpoint_interval must be >= 1");
}

void RolloutBatch::validate() const {
  const int t = sample_count();
  if (actions.cols() != t || rewards.size() != t || log_probs.size() != t || values.size() != t)
    throw std::invalid_argument("rollout batch: misaligned field lengths");
  if (episode_starts.empty() || episode_starts.front() != 0)
    throw std::invalid_argument("rollout batch: episode offsets must start at 0");
  for (std::size_t e = 1; e < episode_starts.size(); ++e)
    if (episode_starts[e] <= episode_starts[e - 1])
      throw std::invalid_argument("rollout batch: episode offsets must increase");
  if (episode_starts.back() >= t && t > 0)
    throw std::invalid_argument("rollout batch: last episode is empty");
  if (t == 0) throw std::invalid_argument("rollout batch: empty batch");
}

RolloutBatch collect_rollouts(const nn::GaussianPolicy& policy, const nn::Mlp& value,
                              const env::EpisodeFactory& factory, const PpoConfig& config,
                              std::uint64_t seed) {
  const int episodes = config.rollout_episodes;
  const int horizon = factory.scenario.horizon;
  const int state_dim = policy.net().spec().input_dim();
  const int action_dim = policy.action_dim();

  struct EpisodeData {
    Eigen::MatrixXd states;
    Eigen::MatrixXd actions;
    Eigen::VectorXd rewards;
    Eigen::VectorXd log_probs;
  };
  std::vector<EpisodeData> per(static_cast<std::size_t>(episodes));

  parallel_for(episodes, config.worker_count, [&](int e) {
    EpisodeData d;
    d.states.resize(state_dim, horizon);
    d.actions.resize(action_dim, horizon);
    d.rewards.resize(horizon);
    d.log_probs.resize(horizon);

    env::Episode ep = factory.make(derive_seed(seed, "episode", static_cast<std::uint64_t>(e)));
    auto rng = make_rng(derive_seed(seed, "sample", static_cast<std::uint64_t>(e)));
    ep.reset();
    for (int t = 0; t < horizon; ++t) {
      const Eigen::VectorXd s = ep.state().vector(ep.scenario());
      const nn::GaussianPolicy::Moments m = policy.moments(s);
      const Eigen::VectorXd a = policy.sample(m, rng);
      d.states.col(t) = s;
      d.actions.col(t) = a;
      d.log_probs(t) = policy.log_prob(m, a);
      const auto out = ep.step(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
      d.rewards(t) = out.reward;
    }
    per[static_cast<std::size_t>(e)] = std::move(d);
  });

  RolloutBatch batch;
  const int total = episodes * horizon;
  batch.states.resize(state_dim, total);
  batch.actions.resize(action_dim, total);
  batch.rewards.resize(total);
  batch.log_probs.resize(total);
  batch.episode_starts.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    const int off = e * horizon;
    batch.episode_starts.push_back(off);
    const auto& d = per[static_cast<std::size_t>(e)];
    batch.states.middleCols(off, horizon) = d.states;
    batch.actions.middleCols(off, horizon) = d.actions;
    batch.rewards.segment(off, horizon) = d.rewards;
    batch.log_probs.segment(off, horizon) = d.log_probs;
  }
  batch.values = value.forward_batch(batch.states).row(0).transpose();
  batch.validate();
  return batch;
}

GaeResult compute_gae(const RolloutBatch& batch, double discount, double lambda) {
  batch.validate();
  const int t_total = batch.sample_count();
  GaeResult out;
  out.advantages_raw.resize(t_total);

  for (std::size_t e = 0; e < batch.episode_starts.size(); ++e) {
    const int begin = batch.episode_starts[e];
    const int end = (e + 1 < batch.episode_starts.size()) ? batch.episode_starts[e + 1] : t_total;
    double next_adv = 0.0;
    for (int t = end - 1; t >= begin; --t) {
      const double next_value = (t + 1 < end) ? batch.values(t + 1) : 0.0;
      const double delta = batch.rewards(t) + discount * next_value - batch.values(t);
      next_adv = delta + discount * lambda * next_adv;
      out.advantages_raw(t) = next_adv;
    }
  }

  out.value_targets = out.advantages_raw + batch.values;
  const double mean = out.advantages_raw.mean();
  const double var = (out.advantages_raw.array() - mean).square().sum() / t_total;
  out.advantages = (out.advantages_raw.array() - mean) / (std::sqrt(var) + 1e-8);
  return out;
}

LossReport ppo_loss(const nn::GaussianPolicy& policy, const nn::Mlp& value, const Minibatch& mb,
                    const PpoConfig& config, Eigen::VectorXd& policy_grad,
                    Eigen::VectorXd& value_grad) {
  const Eigen::Index m = mb.states.cols();
  if (m == 0) throw std::invalid_argument("ppo_loss: empty minibatch");
  if (mb.actions.cols() != m || mb.log_probs_old.size() != m || mb.advantages.size() != m ||
      mb.value_targets.size() != m)
    throw std::invalid_argument("ppo_loss: misaligned minibatch fields");

  const int d = policy.action_dim();
  const double eps = config.clip_ratio;
  const double inv_m = 1.0 / static_cast<double>(m);
  constexpr double kLogTwoPi = 1.8378770664093454836;

  nn::Mlp::Cache policy_cache;
  const Eigen::MatrixXd& raw = policy.net().forward_cached(mb.states, policy_cache);
  const auto mean = raw.topRows(d);
  const auto pre_sigma = raw.bottomRows(d);
  Eigen::MatrixXd sigma(d, m);
  for (Eigen::Index c = 0; c < m; ++c)
    for (int r = 0; r < d; ++r) sigma(r, c) = softplus(pre_sigma(r, c)) + policy.sigma_floor();

  LossReport report;
  Eigen::VectorXd log_probs_new(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    double lp = -0.5 * kLogTwoPi * d;
    for (int r = 0; r < d; ++r) {
      const double z = (mb.actions(r, c) - mean(r, c)) / sigma(r, c);
      lp -= std::log(sigma(r, c)) + 0.5 * z * z;
    }
    log_probs_new(c) = lp;
  }

  // Upstream gradients for the policy head: d(loss)/d(mean) and
  // d(loss)/d(pre_sigma).
  Eigen::MatrixXd policy_dy = Eigen::MatrixXd::Zero(2 * d, m);
  double surrogate = 0.0;
  int clipped = 0;
  double entropy = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    const double adv = mb.advantages(c);
    const double ratio = std::exp(log_probs_new(c) - mb.log_probs_old(c));
    const double clamped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double surr1 = ratio * adv;
    const double surr2 = clamped * adv;
    surrogate += std::min(surr1, surr2);
    if (std::abs(ratio - 1.0) > eps) ++clipped;

    // d(min)/d(logp_new): the unclipped branch flows; the saturated clipped
    // branch is flat.
    const double dmin_dlogp = (surr1 <= surr2) ? surr1 : 0.0;
    const double dloss_dlogp = -inv_m * dmin_dlogp;

    double sample_entropy = 0.5 * d * (kLogTwoPi + 1.0);
    for (int r = 0; r < d; ++r) {
      const double s = sigma(r, c);
      const double diff = mb.actions(r, c) - mean(r, c);
      const double dlogp_dmean = diff / (s * s);
      const double dlogp_dsigma = (diff * diff) / (s * s * s) - 1.0 / s;
      sample_entropy += std::log(s);
      double dloss_dsigma = dloss_dlogp * dlogp_dsigma;
      dloss_dsigma -= config.entropy_coefficient * inv_m / s;
      const double dsigma_dpre = 1.0 / (1.0 + std::exp(-pre_sigma(r, c)));
      policy_dy(r, c) = dloss_dlogp * dlogp_dmean;
      policy_dy(d + r, c) = dloss_dsigma * dsigma_dpre;
    }
    entropy += sample_entropy;
  }
  report.policy_loss = -surrogate * inv_m;
  report.entropy = entropy * inv_m;
  report.clip_fraction = static_cast<double>(clipped) * inv_m;

  nn::Mlp::Cache value_cache;
  const Eigen::MatrixXd& v = value.forward_cached(mb.states, value_cache);
  const Eigen::RowVectorXd residual = v.row(0) - mb.value_targets.transpose();
  report.value_loss = residual.squaredNorm() * inv_m;
  Eigen::MatrixXd value_dy = (2.0 * inv_m * config.value_loss_coefficient) * residual;

  report.total = report.policy_loss + config.value_loss_coefficient * report.value_loss -
                 config.entropy_coefficient * report.entropy;
  if (!std::isfinite(report.total))
    throw std::runtime_error("ppo_loss: non-finite loss (policy " +
                             std::to_string(report.policy_loss) + ", value " +
                             std::to_string(report.value_loss) + ")");

  policy_grad = Eigen::VectorXd::Zero(policy.net().parameter_count());
  policy.net().backward(policy_cache, policy_dy, policy_grad);
  value_grad = Eigen::VectorXd::Zero(value.parameter_count());
  value.backward(value_cache, value_dy, value_grad);
  return report;
}

double evaluate_policy(const nn::GaussianPolicy& policy, const env::EpisodeFactory& factory,
                       std::span<const std::uint64_t> episode_seeds, int worker_count) {
  if (episode_seeds.empty()) throw std::invalid_argument("evaluate_policy: no episode seeds");
  std::vector<double> costs(episode_seeds.size(), 0.0);
  parallel_for(static_cast<int>(episode_seeds.size()), worker_count, [&](int j) {
    costs[static_cast<std::size_t>(j)] = env::rollout_cost(
        [&](const Eigen::VectorXd& s) { return policy.mean_action(s); },
        factory.make(episode_seeds[static_cast<std::size_t>(j)]));
  });
  double total = 0.0;
  for (double c : costs) total += c;
  const double mean = total / static_cast<double>(costs.size());
  if (!std::isfinite(mean)) throw std::runtime_error("non-finite evaluation cost");
  return mean;
}

namespace {

void clip_grad_norm(Eigen::VectorXd& g, double max_norm) {
  const double n = g.norm();
  if (n > max_norm) g *= max_norm / n;
}

Minibatch gather(const RolloutBatch& batch, const GaeResult& gae, std::span<const int> idx) {
  Minibatch mb;
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  mb.states.resize(batch.states.rows(), m);
  mb.actions.resize(batch.actions.rows(), m);
  mb.log_probs_old.resize(m);
  mb.advantages.resize(m);
  mb.value_targets.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const int i = idx[static_cast<std::size_t>(k)];
    mb.states.col(k) = batch.states.col(i);
    mb.actions.col(k) = batch.actions.col(i);
    mb.log_probs_old(k) = batch.log_probs(i);
    mb.advantages(k) = gae.advantages(i);
    mb.value_targets(k) = gae.value_targets(i);
  }
  return mb;
}

double mean_batch_sigma(const nn::GaussianPolicy& policy, const Eigen::MatrixXd& states) {
  const Eigen::MatrixXd raw = policy.net().forward_batch(states);
  Eigen::MatrixXd mean, sigma;
  nn::split_policy_output(raw, policy.sigma_floor(), mean, sigma);
  return sigma.mean();
}

}  // namespace

PpoResult train_ppo(nn::GaussianPolicy policy, nn::Mlp value, const env::EpisodeFactory& factory,
                    const PpoConfig& config, const CheckpointFn& on_checkpoint) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

  PpoResult result;
  const double eval0 = evaluate_policy(policy, factory, config.eval_seeds, config.worker_count);
  result.curve.push_back({0, eval0, kNan, kNan, kNan, kNan, elapsed()});
  result.policy = policy;
  result.value = value;
  result.best_eval_cost = eval0;
  result.best_iteration = 0;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    const RolloutBatch batch = collect_rollouts(
        policy, value, factory, config, derive_seed(config.seed, "rollout", static_cast<std::uint64_t>(iter)));
    const GaeResult gae = compute_gae(batch, config.discount, config.gae_lambda);
    const double mean_sigma = mean_batch_sigma(policy, batch.states);

    const int t_total = batch.sample_count();
    std::vector<int> order(static_cast<std::size_t>(t_total));
    std::iota(order.begin(), order.end(), 0);
    auto shuffle_rng = make_rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(iter)));

    double policy_loss_sum = 0.0;
    double value_loss_sum = 0.0;
    int updates = 0;
    Eigen::VectorXd policy_grad, value_grad;
    try {
      for (int epoch = 0; epoch < config.epochs_per_batch; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (int off = 0; off < t_total; off += config.minibatch_size) {
          const int count = std::min(config.minibatch_size, t_total - off);
          const Minibatch mb = gather(batch, gae, std::span<const int>(order.data() + off,
                                                                       static_cast<std::size_t>(count)));
          const LossReport loss = ppo_loss(policy, value, mb, config, policy_grad, value_grad);
          clip_grad_norm(policy_grad, config.max_grad_norm);
          clip_grad_norm(value_grad, config.max_grad_norm);

          Eigen::VectorXd theta = policy.net().flatten();
          theta -= config.learning_rate * policy_grad;
          policy.net().unflatten(theta);
          Eigen::VectorXd phi = value.flatten();
          phi -= config.learning_rate * value_grad;
          value.unflatten(phi);

          policy_loss_sum += loss.policy_loss;
          value_loss_sum += loss.value_loss;
          ++updates;
        }
      }
    } catch (const std::runtime_error& e) {
      result.halted = true;
      result.halt_reason = "iteration " + std::to_string(iter) + ": " + e.what();
      break;
    }

    PpoCurvePoint point;
    point.iteration = iter;
    point.eval_cost = evaluate_policy(policy, factory, config.eval_seeds, config.worker_count);
    point.mean_batch_reward = batch.rewards.mean();
    point.policy_loss = policy_loss_sum / updates;
    point.value_loss = value_loss_sum / updates;
    point.mean_sigma = mean_sigma;
    point.wall_seconds = elapsed();
    result.curve.push_back(point);

    if (point.eval_cost < result.best_eval_cost) {
      result.best_eval_cost = point.eval_cost;
      result.best_iteration = iter;
      result.policy = policy;
      result.value = value;
    }
    if (on_checkpoint && iter % config.checkpoint_interval == 0)
      on_checkpoint(iter, policy, value);
    if (point.eval_cost > config.divergence_factor * eval0) {
      result.halted = true;
      result.halt_reason = "evaluation cost " + std::to_string(point.eval_cost) +
                           " exceeded the divergence guard at iteration " + std::to_string(iter);
      break;
    }
  }

  result.final_policy = std::move(policy);
  result.final_value = std::move(value);
  return result;
}

}  // namespace hvacrl::ppo
