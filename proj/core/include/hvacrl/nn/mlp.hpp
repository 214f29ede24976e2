#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace hvacrl::nn {

// Fully connected feedforward shape: sizes[0] inputs, sizes.back() outputs,
// tanh on every hidden layer, linear output.
struct MlpSpec {
  std::vector<int> sizes;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
  std::int64_t parameter_count() const;
  void validate() const;  // throws std::invalid_argument

  bool operator==(const MlpSpec&) const = default;
};

// Parameters flatten layer by layer: the weight matrix in row-major order,
// then the bias vector. Gradients use the same layout, so optimizers and the
// population perturbations treat the network as one flat vector.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  std::int64_t parameter_count() const { return spec_.parameter_count(); }

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  Eigen::MatrixXd& weight(int layer) { return weights_.at(static_cast<std::size_t>(layer)); }
  Eigen::VectorXd& bias(int layer) { return biases_.at(static_cast<std::size_t>(layer)); }

  // U(-s, s) with s = 1/sqrt(fan_in) on weights and biases, drawn in flat
  // layout order.
  void init_uniform(std::mt19937_64& rng);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  // Columns are samples.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

  // Post-activation values per layer: layers[0] is the input batch,
  // layers.back() the linear output. tanh derivatives are recovered from the
  // stored activations.
  struct Cache {
    std::vector<Eigen::MatrixXd> layers;
  };
  const Eigen::MatrixXd& forward_cached(const Eigen::MatrixXd& x, Cache& cache) const;

  // Reverse-mode pass for the batch in `cache`: accumulates dL/dparams into
  // `grad` (flat layout, must be parameter_count() long) given dL/doutput.
  // When dx is non-null it receives dL/dinput.
  void backward(const Cache& cache, const Eigen::MatrixXd& dy, Eigen::VectorXd& grad,
                Eigen::MatrixXd* dx = nullptr) const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  bool operator==(const Mlp& other) const;

 private:
  MlpSpec spec_;
  std::vector<Eigen::MatrixXd> weights_;  // [out x in]
  std::vector<Eigen::VectorXd> biases_;
};

}  // namespace hvacrl::nn
