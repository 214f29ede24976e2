#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "hvacrl/env/scenario.hpp"
#include "hvacrl/rom/model.hpp"

namespace hvacrl::mpc {

enum class Variant { Lin, Rom };

// Receding-horizon solver settings. Lin linearizes the dynamics once around
// the nominal trajectory and runs a single projected-gradient solve; Rom
// repeats that solve with re-linearization around the updated trajectory
// until the predicted trajectory stops moving (a best-effort local optimum,
// the horizon problem is nonconvex).
struct MpcConfig {
  int horizon = 12;
  Variant variant = Variant::Lin;
  int max_inner_iterations = 200;
  double step_tolerance = 1e-7;         // inner: stop once an accepted step moves less
  int sqp_iterations = 8;               // Rom: linearization passes
  double trajectory_tolerance = 1e-5;   // Rom: max |temp change| declaring a fixpoint
  double armijo_initial_step = 1.0;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  int max_backtracks = 60;

  void validate() const;  // throws std::invalid_argument
};

// Per-step affine map T_{t+1} = A T_t + B u_t + d around an operating point,
// with u laid out as (mdot_0 .. mdot_{N-1}, t_da). The offset d absorbs the
// exogenous terms, so the map reproduces the nonlinear step exactly at the
// expansion point.
struct LinearizedDynamics {
  Eigen::MatrixXd a;  // N x N
  Eigen::MatrixXd b;  // N x (N+1)
  Eigen::VectorXd d;  // N
};

// Exact Jacobians of the single-lag temperature step. Every zone must have
// n_a == n_b == 1; deeper lags have no receding-horizon state this small and
// are rejected.
LinearizedDynamics linearize_dynamics(const rom::BuildingModel& model,
                                      std::span<const double> temps, const rom::HvacCommand& cmd,
                                      const rom::ExogenousRecord& exo);

// Perfect forecasts over the horizon, one entry per step.
struct HorizonForecast {
  std::vector<rom::ExogenousRecord> exo;
  std::vector<double> p_limit_kw;
  std::vector<std::array<double, 3>> weights;
  std::vector<rom::Bounds> comfort;
  std::array<double, 3> kappa{1.0, 1.0, 1.0};

  int covered_steps() const;
};

struct HorizonPlan {
  std::vector<rom::HvacCommand> commands;
  double predicted_cost = 0.0;  // nonlinear-model cost of the returned plan
  bool converged = false;
  int inner_iterations = 0;  // total accepted steps across passes
  int outer_passes = 0;
  // Objective value per accepted inner iterate, one trace per linearization
  // pass; each trace is non-increasing.
  std::vector<std::vector<double>> descent;
};

// Minimizes the summed stage costs (discomfort at the predicted temperatures,
// energy and limit violations of the commands) over the horizon, subject to
// the command box bounds. Stage costs are differentiated exactly; only the
// temperature dynamics are replaced by the per-step affine maps. Hitting the
// iteration caps returns the best iterate with converged == false.
HorizonPlan solve_horizon(std::span<const double> temps, const HorizonForecast& forecast,
                          const rom::BuildingModel& model, const MpcConfig& config,
                          const std::vector<rom::HvacCommand>* warm_start = nullptr);

// Applies the first command of each horizon solve and warm-starts the next
// solve from the shifted plan.
class MpcController {
 public:
  MpcController(rom::BuildingModel model, MpcConfig config);

  struct StepResult {
    rom::HvacCommand command;
    double predicted_cost = 0.0;
    bool converged = false;
    int inner_iterations = 0;
    int outer_passes = 0;
    double solve_seconds = 0.0;
  };

  StepResult step(std::span<const double> temps, const HorizonForecast& forecast);
  void reset();

  const rom::BuildingModel& model() const { return model_; }
  const MpcConfig& config() const { return config_; }

 private:
  rom::BuildingModel model_;
  MpcConfig config_;
  std::vector<rom::HvacCommand> plan_;
};

}  // namespace hvacrl::mpc
