#include "hvacrl/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hvacrl::nn {
namespace {

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

std::int64_t MlpSpec::parameter_count() const {
  std::int64_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<std::int64_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
  return n;
}

void MlpSpec::validate() const {
  if (sizes.size() < 2) throw std::invalid_argument("mlp spec: need at least input and output sizes");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("mlp spec: every layer size must be >= 1");
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int layers = spec_.layer_count();
  weights_.reserve(static_cast<std::size_t>(layers));
  biases_.reserve(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(spec_.sizes[l + 1], spec_.sizes[l]));
    biases_.emplace_back(Eigen::VectorXd::Zero(spec_.sizes[l + 1]));
  }
}

void Mlp::init_uniform(std::mt19937_64& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(weights_[l].cols()));
    std::uniform_real_distribution<double> u(-s, s);
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = u(rng);
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l](r) = u(rng);
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != spec_.input_dim())
    throw std::invalid_argument("mlp forward: input has " + std::to_string(x.size()) +
                                " entries, spec wants " + std::to_string(spec_.input_dim()));
  Eigen::VectorXd a = x;
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    a = (l == last) ? std::move(z) : z.array().tanh().matrix();
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  Cache cache;
  return forward_cached(x, cache);
}

const Eigen::MatrixXd& Mlp::forward_cached(const Eigen::MatrixXd& x, Cache& cache) const {
  if (x.rows() != spec_.input_dim())
    throw std::invalid_argument("mlp forward: batch has " + std::to_string(x.rows()) +
                                " rows, spec wants " + std::to_string(spec_.input_dim()));
  cache.layers.clear();
  cache.layers.reserve(weights_.size() + 1);
  cache.layers.push_back(x);
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * cache.layers.back()).colwise() + biases_[l];
    if (l != last) z = z.array().tanh().matrix();
    cache.layers.push_back(std::move(z));
  }
  return cache.layers.back();
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dy, Eigen::VectorXd& grad,
                   Eigen::MatrixXd* dx) const {
  if (cache.layers.size() != weights_.size() + 1)
    throw std::invalid_argument("mlp backward: cache does not match this network");
  if (grad.size() != parameter_count())
    throw std::invalid_argument("mlp backward: gradient vector has the wrong length");
  if (dy.rows() != spec_.output_dim() || dy.cols() != cache.layers.back().cols())
    throw std::invalid_argument("mlp backward: upstream gradient shape mismatch");

  // Per-layer flat offsets.
  std::vector<std::int64_t> offsets(weights_.size());
  std::int64_t off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    offsets[l] = off;
    off += weights_[l].size() + biases_[l].size();
  }

  Eigen::MatrixXd delta = dy;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    RowMajorMap gw(grad.data() + offsets[l], weights_[l].rows(), weights_[l].cols());
    gw.noalias() += delta * cache.layers[l].transpose();
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[l] + weights_[l].size(),
                                   biases_[l].size());
    gb.noalias() += delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd prev = weights_[l].transpose() * delta;
      // cache.layers[l] holds tanh activations for hidden layers.
      delta = (prev.array() * (1.0 - cache.layers[l].array().square())).matrix();
    } else if (dx != nullptr) {
      dx->noalias() = weights_[0].transpose() * delta;
    }
  }
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  std::int64_t off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    RowMajorMap(flat.data() + off, weights_[l].rows(), weights_[l].cols()) = weights_[l];
    off += weights_[l].size();
    flat.segment(off, biases_[l].size()) = biases_[l];
    off += biases_[l].size();
  }
  return flat;
}

void Mlp::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count())
    throw std::invalid_argument("mlp unflatten: expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(flat.size()));
  std::int64_t off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] = ConstRowMajorMap(flat.data() + off, weights_[l].rows(), weights_[l].cols());
    off += weights_[l].size();
    biases_[l] = flat.segment(off, biases_[l].size());
    off += biases_[l].size();
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (spec_ != other.spec_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  return true;
}

}  // namespace hvacrl::nn
