#include "hvacrl/mpc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hvacrl::mpc {

void MpcConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("mpc config: horizon must be >= 1");
  if (max_inner_iterations < 1)
    throw std::invalid_argument("mpc config: max_inner_iterations must be >= 1");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("mpc config: step_tolerance must be > 0");
  if (sqp_iterations < 1) throw std::invalid_argument("mpc config: sqp_iterations must be >= 1");
  if (!(trajectory_tolerance > 0.0))
    throw std::invalid_argument("mpc config: trajectory_tolerance must be > 0");
  if (!(armijo_initial_step > 0.0))
    throw std::invalid_argument("mpc config: armijo_initial_step must be > 0");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0))
    throw std::invalid_argument("mpc config: armijo_shrink must lie in (0, 1)");
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0))
    throw std::invalid_argument("mpc config: armijo_slope must lie in (0, 1)");
  if (max_backtracks < 1) throw std::invalid_argument("mpc config: max_backtracks must be >= 1");
}

int HorizonForecast::covered_steps() const {
  const std::size_t n = std::min(std::min(exo.size(), p_limit_kw.size()),
                                 std::min(weights.size(), comfort.size()));
  return static_cast<int>(n);
}

LinearizedDynamics linearize_dynamics(const rom::BuildingModel& model,
                                      std::span<const double> temps, const rom::HvacCommand& cmd,
                                      const rom::ExogenousRecord& exo) {
  const int n = model.zone_count();
  if (static_cast<int>(temps.size()) != n)
    throw std::invalid_argument("linearize_dynamics: temperature count does not match the model");
  if (static_cast<int>(cmd.mdot.size()) != n)
    throw std::invalid_argument("linearize_dynamics: command width does not match the model");
  if (model.max_lag() != 1)
    throw std::invalid_argument("linearize_dynamics: only single-lag models have a per-step state");

  LinearizedDynamics lin;
  lin.a = Eigen::MatrixXd::Zero(n, n);
  lin.b = Eigen::MatrixXd::Zero(n, n + 1);

  for (int i = 0; i < n; ++i) {
    const auto& zone = model.zones[static_cast<std::size_t>(i)];
    lin.a(i, i) += zone.a_coeffs[0];
    const auto& b = zone.b_coeffs[0];
    for (std::size_t f = 0; f < zone.feature_spec.size(); ++f) {
      const auto& feature = zone.feature_spec[f];
      const double coeff = b[f];
      switch (feature.kind) {
        case rom::FeatureKind::DeliveredCooling:
          // q_i = c_p * mdot_i * (T_i - t_da): bilinear in the command.
          lin.a(i, i) += coeff * model.c_p * cmd.mdot[static_cast<std::size_t>(i)];
          lin.b(i, i) += coeff * model.c_p * (temps[static_cast<std::size_t>(i)] - cmd.t_da);
          lin.b(i, n) -= coeff * model.c_p * cmd.mdot[static_cast<std::size_t>(i)];
          break;
        case rom::FeatureKind::OtherZoneTemp:
          lin.a(i, feature.other_zone) += coeff;
          break;
        case rom::FeatureKind::OutdoorTemp:
        case rom::FeatureKind::SolarGain:
        case rom::FeatureKind::InternalGain:
          break;  // exogenous, absorbed by the offset
      }
    }
  }

  const std::vector<double> history(temps.begin(), temps.end());
  const std::vector<double> next = rom::step_temperature(
      model, std::span<const std::vector<double>>(&history, 1), cmd, exo);
  Eigen::VectorXd t_vec(n);
  Eigen::VectorXd u_vec(n + 1);
  for (int i = 0; i < n; ++i) {
    t_vec(i) = temps[static_cast<std::size_t>(i)];
    u_vec(i) = cmd.mdot[static_cast<std::size_t>(i)];
  }
  u_vec(n) = cmd.t_da;
  lin.d = Eigen::Map<const Eigen::VectorXd>(next.data(), n) - lin.a * t_vec - lin.b * u_vec;
  return lin;
}

namespace {

double discomfort_slope(double t_zone, const rom::Bounds& band) {
  if (t_zone > band.hi) {
    const double delta = t_zone - band.hi;
    return delta >= 1.0 ? 2.0 * delta : 1.0;
  }
  if (t_zone < band.lo) {
    const double delta = band.lo - t_zone;
    return delta >= 1.0 ? -2.0 * delta : -1.0;
  }
  return 0.0;
}

rom::HvacCommand command_at(const Eigen::VectorXd& u, int step, int zones) {
  rom::HvacCommand cmd;
  cmd.mdot.resize(static_cast<std::size_t>(zones));
  const int off = step * (zones + 1);
  for (int i = 0; i < zones; ++i) cmd.mdot[static_cast<std::size_t>(i)] = u(off + i);
  cmd.t_da = u(off + zones);
  return cmd;
}

std::vector<rom::HvacCommand> unpack_plan(const Eigen::VectorXd& u, int horizon, int zones) {
  std::vector<rom::HvacCommand> plan;
  plan.reserve(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) plan.push_back(command_at(u, k, zones));
  return plan;
}

Eigen::VectorXd pack_plan(const std::vector<rom::HvacCommand>& plan, int zones) {
  const int horizon = static_cast<int>(plan.size());
  Eigen::VectorXd u(horizon * (zones + 1));
  for (int k = 0; k < horizon; ++k) {
    const auto& cmd = plan[static_cast<std::size_t>(k)];
    const int off = k * (zones + 1);
    for (int i = 0; i < zones; ++i) u(off + i) = cmd.mdot[static_cast<std::size_t>(i)];
    u(off + zones) = cmd.t_da;
  }
  return u;
}

// Stage costs and their exact derivatives over frozen affine dynamics. The
// command enters the costs directly through power; the predicted temperatures
// enter through discomfort and are differentiated by an adjoint sweep.
class HorizonObjective {
 public:
  HorizonObjective(const rom::BuildingModel& model, const HorizonForecast& forecast,
                   std::vector<LinearizedDynamics> dynamics, Eigen::VectorXd initial_temps,
                   int horizon)
      : model_(model),
        forecast_(forecast),
        dynamics_(std::move(dynamics)),
        initial_temps_(std::move(initial_temps)),
        horizon_(horizon),
        zones_(model.zone_count()) {}

  double eval(const Eigen::VectorXd& u, Eigen::VectorXd* grad) const {
    const int n = zones_;
    std::vector<Eigen::VectorXd> temps(static_cast<std::size_t>(horizon_));
    temps[0] = initial_temps_;
    for (int k = 0; k + 1 < horizon_; ++k) {
      const auto& lin = dynamics_[static_cast<std::size_t>(k)];
      temps[static_cast<std::size_t>(k + 1)] =
          lin.a * temps[static_cast<std::size_t>(k)] +
          lin.b * u.segment(k * (n + 1), n + 1) + lin.d;
    }

    double cost = 0.0;
    std::vector<Eigen::VectorXd> temp_grads;
    if (grad) {
      grad->setZero(u.size());
      temp_grads.assign(static_cast<std::size_t>(horizon_), Eigen::VectorXd::Zero(n));
    }

    for (int k = 0; k < horizon_; ++k) {
      const auto& w = forecast_.weights[static_cast<std::size_t>(k)];
      const auto& kappa = forecast_.kappa;
      const auto& band = forecast_.comfort[static_cast<std::size_t>(k)];
      const Eigen::VectorXd& t = temps[static_cast<std::size_t>(k)];

      double disc = 0.0;
      for (int i = 0; i < n; ++i) disc += env::discomfort(t(i), band);
      cost += w[0] * kappa[0] * disc;

      const double t_out = forecast_.exo[static_cast<std::size_t>(k)].t_out;
      const int off = k * (n + 1);
      double flow_sum = 0.0;
      for (int i = 0; i < n; ++i) flow_sum += u(off + i);
      const double t_da = u(off + n);
      const double power = model_.power_a * (t_out - t_da) * flow_sum +
                           model_.power_b * flow_sum * flow_sum * flow_sum + model_.power_c;
      const double energy = rom::interval_energy(power, model_.dt_hours);
      const double excess = std::max(power - forecast_.p_limit_kw[static_cast<std::size_t>(k)], 0.0);
      cost += w[1] * kappa[1] * energy + w[2] * kappa[2] * excess * excess;

      if (grad) {
        auto& tg = temp_grads[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) tg(i) = w[0] * kappa[0] * discomfort_slope(t(i), band);

        const double dcost_dpower = w[1] * kappa[1] * model_.dt_hours + w[2] * kappa[2] * 2.0 * excess;
        const double dpower_dflow =
            model_.power_a * (t_out - t_da) + 3.0 * model_.power_b * flow_sum * flow_sum;
        for (int i = 0; i < n; ++i) (*grad)(off + i) += dcost_dpower * dpower_dflow;
        (*grad)(off + n) += dcost_dpower * (-model_.power_a * flow_sum);
      }
    }

    if (grad) {
      Eigen::VectorXd lambda = temp_grads[static_cast<std::size_t>(horizon_ - 1)];
      for (int k = horizon_ - 2; k >= 0; --k) {
        const auto& lin = dynamics_[static_cast<std::size_t>(k)];
        grad->segment(k * (n + 1), n + 1) += lin.b.transpose() * lambda;
        lambda = temp_grads[static_cast<std::size_t>(k)] + lin.a.transpose() * lambda;
      }
    }
    return cost;
  }

 private:
  const rom::BuildingModel& model_;
  const HorizonForecast& forecast_;
  std::vector<LinearizedDynamics> dynamics_;
  Eigen::VectorXd initial_temps_;
  int horizon_;
  int zones_;
};

struct FlatBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

FlatBounds flat_bounds(const rom::BuildingModel& model, int horizon) {
  const int n = model.zone_count();
  FlatBounds out;
  out.lo.resize(horizon * (n + 1));
  out.hi.resize(horizon * (n + 1));
  for (int k = 0; k < horizon; ++k) {
    const int off = k * (n + 1);
    for (int i = 0; i < n; ++i) {
      out.lo(off + i) = model.mdot_bounds[static_cast<std::size_t>(i)].lo;
      out.hi(off + i) = model.mdot_bounds[static_cast<std::size_t>(i)].hi;
    }
    out.lo(off + n) = model.t_da_bounds.lo;
    out.hi(off + n) = model.t_da_bounds.hi;
  }
  return out;
}

Eigen::VectorXd clamp_to(const Eigen::VectorXd& u, const FlatBounds& bounds) {
  return u.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
}

struct InnerResult {
  Eigen::VectorXd u;
  bool converged = false;
  int iterations = 0;
  std::vector<double> descent;
};

InnerResult projected_gradient(const HorizonObjective& objective, Eigen::VectorXd u,
                               const FlatBounds& bounds, const MpcConfig& config) {
  InnerResult result;
  Eigen::VectorXd grad(u.size());
  double cost = objective.eval(u, &grad);
  result.descent.push_back(cost);
  double step = config.armijo_initial_step;

  for (int it = 0; it < config.max_inner_iterations; ++it) {
    double alpha = step;
    Eigen::VectorXd trial;
    double trial_cost = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < config.max_backtracks; ++bt) {
      trial = clamp_to(u - alpha * grad, bounds);
      trial_cost = objective.eval(trial, nullptr);
      const double moved_sq = (trial - u).squaredNorm();
      if (std::isfinite(trial_cost) &&
          cost - trial_cost >= config.armijo_slope / alpha * moved_sq) {
        accepted = true;
        break;
      }
      alpha *= config.armijo_shrink;
    }
    if (!accepted) {
      // No decrease at the smallest step: treat the iterate as stationary.
      result.converged = true;
      break;
    }
    const double moved = (trial - u).norm();
    u = std::move(trial);
    cost = trial_cost;
    result.descent.push_back(cost);
    ++result.iterations;
    step = std::min(2.0 * alpha, config.armijo_initial_step);
    if (moved < config.step_tolerance) {
      result.converged = true;
      break;
    }
    objective.eval(u, &grad);
  }
  result.u = std::move(u);
  return result;
}

std::vector<Eigen::VectorXd> simulate_trajectory(const rom::BuildingModel& model,
                                                 const Eigen::VectorXd& initial_temps,
                                                 const std::vector<rom::HvacCommand>& plan,
                                                 const HorizonForecast& forecast) {
  const int n = model.zone_count();
  const int horizon = static_cast<int>(plan.size());
  std::vector<Eigen::VectorXd> temps(static_cast<std::size_t>(horizon));
  temps[0] = initial_temps;
  std::vector<double> current(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) current[static_cast<std::size_t>(i)] = initial_temps(i);
  for (int k = 0; k + 1 < horizon; ++k) {
    current = rom::step_temperature(model, std::span<const std::vector<double>>(&current, 1),
                                    plan[static_cast<std::size_t>(k)],
                                    forecast.exo[static_cast<std::size_t>(k)]);
    temps[static_cast<std::size_t>(k + 1)] =
        Eigen::Map<const Eigen::VectorXd>(current.data(), n);
  }
  return temps;
}

double plan_cost(const rom::BuildingModel& model, const Eigen::VectorXd& initial_temps,
                 const std::vector<rom::HvacCommand>& plan, const HorizonForecast& forecast) {
  const int n = model.zone_count();
  const auto temps = simulate_trajectory(model, initial_temps, plan, forecast);
  double cost = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto& w = forecast.weights[k];
    const auto& kappa = forecast.kappa;
    double disc = 0.0;
    for (int i = 0; i < n; ++i) disc += env::discomfort(temps[k](i), forecast.comfort[k]);
    const double power = rom::hvac_power(plan[k], forecast.exo[k].t_out, model);
    const double energy = rom::interval_energy(power, model.dt_hours);
    cost += w[0] * kappa[0] * disc + w[1] * kappa[1] * energy +
            w[2] * kappa[2] * env::violation_penalty(power, forecast.p_limit_kw[k]);
  }
  return cost;
}

}  // namespace

HorizonPlan solve_horizon(std::span<const double> temps, const HorizonForecast& forecast,
                          const rom::BuildingModel& model, const MpcConfig& config,
                          const std::vector<rom::HvacCommand>* warm_start) {
  config.validate();
  model.validate();
  const int n = model.zone_count();
  const int horizon = config.horizon;
  if (static_cast<int>(temps.size()) != n)
    throw std::invalid_argument("solve_horizon: temperature count does not match the model");
  if (forecast.covered_steps() < horizon)
    throw std::invalid_argument("solve_horizon: forecast shorter than the horizon");

  Eigen::VectorXd initial_temps(n);
  for (int i = 0; i < n; ++i) initial_temps(i) = temps[static_cast<std::size_t>(i)];

  const FlatBounds bounds = flat_bounds(model, horizon);
  std::vector<rom::HvacCommand> plan;
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != horizon)
      throw std::invalid_argument("solve_horizon: warm start length does not match the horizon");
    plan = *warm_start;
    for (auto& cmd : plan) cmd = rom::clamp_command(std::move(cmd), model);
  } else {
    rom::HvacCommand mid;
    mid.mdot.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      mid.mdot[static_cast<std::size_t>(i)] = model.mdot_bounds[static_cast<std::size_t>(i)].mid();
    mid.t_da = model.t_da_bounds.mid();
    plan.assign(static_cast<std::size_t>(horizon), mid);
  }

  Eigen::VectorXd u = pack_plan(plan, n);
  std::vector<Eigen::VectorXd> trajectory = simulate_trajectory(model, initial_temps, plan, forecast);

  HorizonPlan out;
  const int passes = config.variant == Variant::Lin ? 1 : config.sqp_iterations;
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<LinearizedDynamics> dynamics;
    dynamics.reserve(static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) {
      std::vector<double> point(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        point[static_cast<std::size_t>(i)] = trajectory[static_cast<std::size_t>(k)](i);
      dynamics.push_back(linearize_dynamics(model, point, plan[static_cast<std::size_t>(k)],
                                            forecast.exo[static_cast<std::size_t>(k)]));
    }
    const HorizonObjective objective(model, forecast, std::move(dynamics), initial_temps, horizon);
    InnerResult inner = projected_gradient(objective, u, bounds, config);
    u = std::move(inner.u);
    plan = unpack_plan(u, horizon, n);
    out.inner_iterations += inner.iterations;
    out.descent.push_back(std::move(inner.descent));
    ++out.outer_passes;

    const auto next_trajectory = simulate_trajectory(model, initial_temps, plan, forecast);
    if (config.variant == Variant::Lin) {
      out.converged = inner.converged;
      trajectory = next_trajectory;
      break;
    }
    double shift = 0.0;
    for (std::size_t k = 0; k < next_trajectory.size(); ++k)
      shift = std::max(shift, (next_trajectory[k] - trajectory[k]).cwiseAbs().maxCoeff());
    trajectory = next_trajectory;
    if (shift < config.trajectory_tolerance && inner.converged) {
      out.converged = true;
      break;
    }
  }

  out.commands = plan;
  out.predicted_cost = plan_cost(model, initial_temps, plan, forecast);
  return out;
}

MpcController::MpcController(rom::BuildingModel model, MpcConfig config)
    : model_(std::move(model)), config_(config) {
  config_.validate();
  model_.validate();
}

void MpcController::reset() { plan_.clear(); }

MpcController::StepResult MpcController::step(std::span<const double> temps,
                                              const HorizonForecast& forecast) {
  if (forecast.covered_steps() < config_.horizon)
    throw std::invalid_argument("mpc controller: forecast shorter than the horizon");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<rom::HvacCommand>* warm = plan_.empty() ? nullptr : &plan_;
  HorizonPlan plan = solve_horizon(temps, forecast, model_, config_, warm);
  StepResult result;
  result.command = plan.commands.front();
  result.predicted_cost = plan.predicted_cost;
  result.converged = plan.converged;
  result.inner_iterations = plan.inner_iterations;
  result.outer_passes = plan.outer_passes;
  result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  plan_ = std::move(plan.commands);
  plan_.erase(plan_.begin());
  plan_.push_back(plan_.back());
  return result;
}

}  // namespace hvacrl::mpc
