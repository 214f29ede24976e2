#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hvacrl/common/math.hpp"
#include "hvacrl/common/rng.hpp"
#include "hvacrl/nn/checkpoint.hpp"
#include "hvacrl/nn/mlp.hpp"
#include "hvacrl/nn/policy.hpp"

using namespace hvacrl;
using namespace hvacrl::nn;

namespace {

Mlp random_net(const MlpSpec& spec, std::uint64_t seed) {
  Mlp net(spec);
  auto rng = make_rng(seed);
  net.init_uniform(rng);
  return net;
}

}  // namespace

TEST_CASE("spec bookkeeping") {
  const MlpSpec spec{{3, 5, 2}};
  spec.validate();
  CHECK(spec.input_dim() == 3);
  CHECK(spec.output_dim() == 2);
  CHECK(spec.layer_count() == 2);
  CHECK(spec.parameter_count() == (3 * 5 + 5) + (5 * 2 + 2));
  CHECK_THROWS_AS(MlpSpec{{4}}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((MlpSpec{{4, 0, 2}}).validate(), std::invalid_argument);
}

TEST_CASE("forward pass matches a hand computation") {
  Mlp net(MlpSpec{{2, 2, 1}});
  net.weight(0) << 0.1, -0.2, 0.3, 0.4;
  net.bias(0) << 0.05, -0.05;
  net.weight(1) << 0.7, -0.6;
  net.bias(1) << 0.2;

  Eigen::VectorXd x(2);
  x << 0.5, -1.0;
  const Eigen::VectorXd y = net.forward(x);
  REQUIRE(y.size() == 1);
  // h = tanh([0.15, -0.3] + b), y = 0.7 h0 - 0.6 h1 + 0.2
  CHECK(y(0) == doctest::Approx(0.57870639618706817756).epsilon(1e-15));
}

TEST_CASE("flat layout is row major weights then bias per layer") {
  Mlp net(MlpSpec{{2, 2, 1}});
  Eigen::VectorXd flat(9);
  flat << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  net.unflatten(flat);
  CHECK(net.weight(0)(0, 0) == 1);
  CHECK(net.weight(0)(0, 1) == 2);
  CHECK(net.weight(0)(1, 0) == 3);
  CHECK(net.weight(0)(1, 1) == 4);
  CHECK(net.bias(0)(0) == 5);
  CHECK(net.bias(0)(1) == 6);
  CHECK(net.weight(1)(0, 0) == 7);
  CHECK(net.weight(1)(0, 1) == 8);
  CHECK(net.bias(1)(0) == 9);
  CHECK(net.flatten() == flat);

  Eigen::VectorXd wrong(8);
  wrong.setZero();
  CHECK_THROWS_AS(net.unflatten(wrong), std::invalid_argument);
}

TEST_CASE("uniform init is seeded and respects the fan-in scale") {
  const MlpSpec spec{{10, 7, 4}};
  const Mlp a = random_net(spec, 77);
  const Mlp b = random_net(spec, 77);
  const Mlp c = random_net(spec, 78);
  CHECK(a == b);
  CHECK_FALSE(a == c);

  const double s0 = 1.0 / std::sqrt(10.0);
  CHECK(a.weights()[0].cwiseAbs().maxCoeff() <= s0);
  CHECK(a.biases()[0].cwiseAbs().maxCoeff() <= s0);
  const double s1 = 1.0 / std::sqrt(7.0);
  CHECK(a.weights()[1].cwiseAbs().maxCoeff() <= s1);
  CHECK(a.weights()[0].cwiseAbs().maxCoeff() > 0.2 * s0);  // actually filled
}

TEST_CASE("batched forward equals per-column forward") {
  const Mlp net = random_net(MlpSpec{{4, 6, 3}}, 5);
  Eigen::MatrixXd x(4, 5);
  auto rng = make_rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const Eigen::MatrixXd y = net.forward_batch(x);
  REQUIRE(y.rows() == 3);
  REQUIRE(y.cols() == 5);
  for (Eigen::Index c = 0; c < 5; ++c) CHECK((y.col(c) - net.forward(x.col(c))).norm() == 0.0);
}

TEST_CASE("backward gradients match central finite differences") {
  const MlpSpec spec{{3, 5, 4, 2}};
  Mlp net = random_net(spec, 11);
  Eigen::MatrixXd x(3, 4);
  Eigen::MatrixXd dy(2, 4);
  auto rng = make_rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < dy.size(); ++i) dy.data()[i] = n(rng);

  Mlp::Cache cache;
  net.forward_cached(x, cache);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameter_count());
  Eigen::MatrixXd dx;
  net.backward(cache, dy, grad, &dx);

  const Eigen::VectorXd theta = net.flatten();
  auto loss_at = [&](const Eigen::VectorXd& p) {
    Mlp probe(spec);
    probe.unflatten(p);
    return (probe.forward_batch(x).array() * dy.array()).sum();
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, dn = theta;
    up(i) += h;
    dn(i) -= h;
    const double fd = (loss_at(up) - loss_at(dn)) / (2.0 * h);
    const double rel = std::fabs(fd - grad(i)) / std::max({1.0, std::fabs(fd), std::fabs(grad(i))});
    worst = std::max(worst, rel);
  }
  CHECK(worst < 1e-7);

  // Input gradient against finite differences too.
  double worst_dx = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Eigen::MatrixXd up = x, dn = x;
      up(r, c) += h;
      dn(r, c) -= h;
      const double fd = ((net.forward_batch(up).array() * dy.array()).sum() -
                         (net.forward_batch(dn).array() * dy.array()).sum()) /
                        (2.0 * h);
      worst_dx = std::max(worst_dx, std::fabs(fd - dx(r, c)) / std::max(1.0, std::fabs(fd)));
    }
  CHECK(worst_dx < 1e-7);
}

TEST_CASE("gradients accumulate across backward calls") {
  const MlpSpec spec{{2, 3, 1}};
  Mlp net = random_net(spec, 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 3);
  Eigen::MatrixXd dy = Eigen::MatrixXd::Ones(1, 3);
  Mlp::Cache cache;
  net.forward_cached(x, cache);
  Eigen::VectorXd once = Eigen::VectorXd::Zero(net.parameter_count());
  net.backward(cache, dy, once);
  Eigen::VectorXd twice = once;
  net.backward(cache, dy, twice);
  CHECK((twice - 2.0 * once).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gaussian log prob oracle") {
  Eigen::VectorXd mean(2), sigma(2), a(2);
  mean << 0.0, 0.5;
  sigma << 1.0, 2.0;
  a << 0.3, -0.7;
  CHECK(gaussian_log_prob(mean, sigma, a) ==
        doctest::Approx(-2.756024246969290793).epsilon(1e-14));

  Eigen::VectorXd m1(1), s1(1), a1(1);
  m1 << 0.0;
  s1 << 1.0;
  a1 << 0.0;
  CHECK(gaussian_log_prob(m1, s1, a1) == doctest::Approx(-0.91893853320467274178).epsilon(1e-14));
}

TEST_CASE("policy moments split the head and floor the scale") {
  const MlpSpec spec{{4, 6, 6}};  // action_dim 3
  GaussianPolicy policy(random_net(spec, 21), 1e-3);
  CHECK(policy.action_dim() == 3);
  Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
  const auto m = policy.moments(s);
  const Eigen::VectorXd raw = policy.net().forward(s);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.mean(i) == raw(i));
    CHECK(m.pre_sigma(i) == raw(3 + i));
    CHECK(m.sigma(i) == doctest::Approx(softplus(raw(3 + i)) + 1e-3).epsilon(1e-15));
    CHECK(m.sigma(i) > 1e-3);
  }
  CHECK(policy.mean_action(s) == m.mean);

  Eigen::MatrixXd batch_raw = policy.net().forward_batch(s);
  Eigen::MatrixXd mean, sig;
  split_policy_output(batch_raw, 1e-3, mean, sig);
  CHECK((mean.col(0) - m.mean).norm() == 0.0);
  CHECK((sig.col(0) - m.sigma).norm() == 0.0);
}

TEST_CASE("policy sampling is seeded and consistent with log_prob") {
  const MlpSpec spec{{4, 6, 6}};
  GaussianPolicy policy(random_net(spec, 33), 1e-3);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(4, 0.3);
  const auto m = policy.moments(s);
  auto r1 = make_rng(8);
  auto r2 = make_rng(8);
  const Eigen::VectorXd a1 = policy.sample(m, r1);
  const Eigen::VectorXd a2 = policy.sample(m, r2);
  CHECK(a1 == a2);
  CHECK(policy.log_prob(m, a1) == gaussian_log_prob(m.mean, m.sigma, a1));
  CHECK(policy.log_prob(m, m.mean) > policy.log_prob(m, a1 + Eigen::VectorXd::Ones(3)));
}

TEST_CASE("warm start copies the mean path bitwise and pins sigma") {
  const MlpSpec source_spec{{6, 8, 5, 3}};
  const MlpSpec policy_spec{{6, 8, 5, 6}};
  const MlpSpec value_spec{{6, 8, 5, 1}};
  const Mlp source = random_net(source_spec, 50);
  const WarmStart warm = transfer_warm_start(source, policy_spec, value_spec, 0.1, 1e-3, 91);

  auto rng = make_rng(60);
  std::normal_distribution<double> n(0.0, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd s(6);
    for (int i = 0; i < 6; ++i) s(i) = n(rng);
    const Eigen::VectorXd from_source = source.forward(s);
    const auto m = warm.policy.moments(s);
    for (int i = 0; i < 3; ++i) {
      CHECK(m.mean(i) == from_source(i));  // bitwise
      CHECK(std::fabs(m.sigma(i) - 0.1) <= 1e-9);
    }
  }

  // Hidden layers of the value net are the source's, the head is fresh.
  for (int layer = 0; layer < 2; ++layer) {
    CHECK(warm.value.weights()[static_cast<std::size_t>(layer)] ==
          source.weights()[static_cast<std::size_t>(layer)]);
    CHECK(warm.value.biases()[static_cast<std::size_t>(layer)] ==
          source.biases()[static_cast<std::size_t>(layer)]);
  }
  const WarmStart again = transfer_warm_start(source, policy_spec, value_spec, 0.1, 1e-3, 91);
  CHECK(again.value == warm.value);
  const WarmStart other = transfer_warm_start(source, policy_spec, value_spec, 0.1, 1e-3, 92);
  CHECK_FALSE(other.value == warm.value);

  CHECK_THROWS_AS((void)transfer_warm_start(source, MlpSpec{{6, 8, 5, 7}}, value_spec, 0.1, 1e-3, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)transfer_warm_start(source, policy_spec, value_spec, 1e-4, 1e-3, 1),
                  std::invalid_argument);
}

TEST_CASE("pre-sigma bias solves the softplus equation") {
  // softplus(b) + 1e-3 == 0.1  =>  b == log(exp(0.099) - 1)
  CHECK(inverse_softplus(0.099) == doctest::Approx(-2.2627270871963872698).epsilon(1e-13));
  CHECK(softplus(inverse_softplus(0.099)) == doctest::Approx(0.099).epsilon(1e-14));
}

TEST_CASE("checkpoints round trip bit exactly") {
  const MlpSpec spec{{7, 9, 4}};
  const Mlp net = random_net(spec, 123);
  CheckpointInfo info;
  info.kind = "es_policy";
  info.sigma_floor = 1e-3;
  info.extras["temp_offset"] = 23.0;

  const auto path = std::filesystem::temp_directory_path() / "hvacrl_test_ckpt.ckpt";
  save_checkpoint(path, net, info);
  const LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.net == net);
  CHECK(loaded.net.flatten() == net.flatten());
  CHECK(loaded.info.kind == "es_policy");
  REQUIRE(loaded.info.sigma_floor.has_value());
  CHECK(*loaded.info.sigma_floor == 1e-3);
  CHECK(loaded.info.extras.at("temp_offset") == 23.0);

  // Saving the loaded net reproduces the file byte for byte.
  const auto path2 = std::filesystem::temp_directory_path() / "hvacrl_test_ckpt2.ckpt";
  save_checkpoint(path2, loaded.net, loaded.info);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("checkpoint loader rejects damaged files") {
  const auto path = std::filesystem::temp_directory_path() / "hvacrl_test_bad.ckpt";
  {
    std::ofstream out(path);
    out << "not a checkpoint\n";
  }
  CHECK_THROWS_AS((void)load_checkpoint(path), std::runtime_error);

  const Mlp net = random_net(MlpSpec{{3, 2}}, 1);
  save_checkpoint(path, net, CheckpointInfo{"value", std::nullopt, {}});
  // Truncate the parameter block.
  {
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << all.substr(0, all.size() - 20);
  }
  CHECK_THROWS_AS((void)load_checkpoint(path), std::runtime_error);
  CHECK_THROWS_AS((void)load_checkpoint(path.parent_path() / "hvacrl_no_such.ckpt"),
                  std::runtime_error);
  std::filesystem::remove(path);
}
