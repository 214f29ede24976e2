#include "hvacrl/rom/sysid.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hvacrl::rom {

namespace {

constexpr double kRidgeLambda = 1e-8;
constexpr double kRidgeCondition = 1e10;
constexpr double kSingularCondition = 1e12;

double dataset_feature_value(const OperationDataset& data, const Feature& f, int zone,
                             std::size_t t, double c_p) {
  switch (f.kind) {
    case FeatureKind::OutdoorTemp: return data.exogenous[t].t_out;
    case FeatureKind::DeliveredCooling:
      return delivered_cooling(data.commands[t].mdot[static_cast<std::size_t>(zone)],
                               data.commands[t].t_da,
                               data.zone_temps[t][static_cast<std::size_t>(zone)], c_p);
    case FeatureKind::SolarGain: return data.exogenous[t].q_solar[static_cast<std::size_t>(zone)];
    case FeatureKind::InternalGain: return data.exogenous[t].q_int[static_cast<std::size_t>(zone)];
    case FeatureKind::OtherZoneTemp:
      return data.zone_temps[t][static_cast<std::size_t>(f.other_zone)];
  }
  throw std::logic_error("dataset_feature_value: bad kind");
}

// Regressor column names in fit order, e.g. "lag1:T_self", "lag1:q_hvac".
std::vector<std::string> column_names(const ArxFitSpec& spec) {
  std::vector<std::string> names;
  for (int j = 1; j <= spec.n_a; ++j) names.push_back("lag" + std::to_string(j) + ":T_self");
  for (int j = 1; j <= spec.n_b; ++j)
    for (const auto& f : spec.features)
      names.push_back("lag" + std::to_string(j) + ":" + feature_name(f));
  return names;
}

Eigen::RowVectorXd regressor_row(const OperationDataset& data, int zone, const ArxFitSpec& spec,
                                 double c_p, std::size_t t, std::size_t cols) {
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(cols));
  int k = 0;
  for (int j = 1; j <= spec.n_a; ++j)
    row(k++) = data.zone_temps[t - static_cast<std::size_t>(j)][static_cast<std::size_t>(zone)];
  for (int j = 1; j <= spec.n_b; ++j)
    for (const auto& f : spec.features)
      row(k++) = dataset_feature_value(data, f, zone, t - static_cast<std::size_t>(j), c_p);
  return row;
}

struct RangeFit {
  Eigen::VectorXd beta;
  double rmse = 0.0;
  bool ridge_applied = false;
  double condition_number = 0.0;
};

RangeFit fit_range(const OperationDataset& data, int zone, const ArxFitSpec& spec, double c_p,
                   std::size_t begin, std::size_t end) {
  const auto p = static_cast<std::size_t>(std::max(spec.n_a, spec.n_b));
  const std::size_t first = std::max(begin, p);
  if (end > data.size()) throw std::invalid_argument("fit range exceeds dataset");
  const std::size_t cols =
      static_cast<std::size_t>(spec.n_a) + static_cast<std::size_t>(spec.n_b) * spec.features.size();
  if (first >= end || end - first <= cols)
    throw std::invalid_argument("not enough samples to fit " + std::to_string(cols) +
                                " coefficients");
  const std::size_t m = end - first;

  Eigen::MatrixXd x(m, cols);
  Eigen::VectorXd y(m);
  for (std::size_t t = first; t < end; ++t) {
    x.row(static_cast<Eigen::Index>(t - first)) = regressor_row(data, zone, spec, c_p, t, cols);
    y(static_cast<Eigen::Index>(t - first)) = data.zone_temps[t][static_cast<std::size_t>(zone)];
  }

  // Column equilibration keeps the normal equations well scaled across units
  // (temperatures vs kW-scale gains).
  Eigen::VectorXd scale(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    double s = x.col(static_cast<Eigen::Index>(k)).norm() / std::sqrt(static_cast<double>(m));
    scale(static_cast<Eigen::Index>(k)) = s > 0.0 ? s : 1.0;
  }
  Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(xs, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  if (!(cond <= kSingularCondition)) {
    // Name the columns dominating the null-space direction.
    Eigen::VectorXd v = svd.matrixV().col(sv.size() - 1).cwiseAbs();
    const double vmax = v.maxCoeff();
    auto names = column_names(spec);
    std::ostringstream msg;
    msg << "rank-deficient regressor for zone " << zone + 1 << " (condition " << cond
        << "); degenerate columns:";
    for (std::size_t k = 0; k < cols; ++k)
      if (v(static_cast<Eigen::Index>(k)) >= 0.3 * vmax) msg << ' ' << names[k];
    throw std::runtime_error(msg.str());
  }

  Eigen::MatrixXd g = xs.transpose() * xs;
  Eigen::VectorXd rhs = xs.transpose() * y;
  bool ridge = cond > kRidgeCondition;
  if (ridge)
    g.diagonal().array() += kRidgeLambda;
  Eigen::VectorXd beta_s = g.ldlt().solve(rhs);
  Eigen::VectorXd beta = beta_s.cwiseQuotient(scale);

  RangeFit out;
  out.beta = beta;
  out.ridge_applied = ridge;
  out.condition_number = cond;
  out.rmse = std::sqrt((x * beta - y).squaredNorm() / static_cast<double>(m));
  return out;
}

ZoneArxModel beta_to_zone(const ArxFitSpec& spec, int zone, const Eigen::VectorXd& beta) {
  ZoneArxModel z;
  z.zone_id = zone;
  z.n_a = spec.n_a;
  z.n_b = spec.n_b;
  z.feature_spec = spec.features;
  int k = 0;
  for (int j = 0; j < spec.n_a; ++j) z.a_coeffs.push_back(beta(k++));
  for (int j = 0; j < spec.n_b; ++j) {
    std::vector<double> row;
    for (std::size_t f = 0; f < spec.features.size(); ++f) row.push_back(beta(k++));
    z.b_coeffs.push_back(std::move(row));
  }
  return z;
}

}  // namespace

ArxFitResult fit_arx(const OperationDataset& data, int zone, const ArxFitSpec& spec) {
  data.validate();
  if (zone < 0 || zone >= data.zone_count) throw std::invalid_argument("fit_arx: bad zone index");
  if (spec.n_a < 1 || spec.n_b < 1) throw std::invalid_argument("fit_arx: lags must be >= 1");
  RangeFit fit = fit_range(data, zone, spec, spec.c_p, 0, data.size());
  ArxFitResult out;
  out.model = beta_to_zone(spec, zone, fit.beta);
  out.model.validate(data.zone_count);
  out.rmse = fit.rmse;
  out.ridge_applied = fit.ridge_applied;
  out.condition_number = fit.condition_number;
  return out;
}

double one_step_rmse(const OperationDataset& data, const ZoneArxModel& zone_model, double c_p,
                     std::size_t begin, std::size_t end) {
  const auto p = static_cast<std::size_t>(std::max(zone_model.n_a, zone_model.n_b));
  const std::size_t first = std::max(begin, p);
  if (end > data.size() || first >= end) throw std::invalid_argument("one_step_rmse: bad range");
  ArxFitSpec spec{zone_model.n_a, zone_model.n_b, zone_model.feature_spec, c_p};
  const std::size_t cols = static_cast<std::size_t>(spec.n_a) +
                           static_cast<std::size_t>(spec.n_b) * spec.features.size();
  Eigen::VectorXd beta(static_cast<Eigen::Index>(cols));
  int k = 0;
  for (double a : zone_model.a_coeffs) beta(k++) = a;
  for (const auto& row : zone_model.b_coeffs)
    for (double b : row) beta(k++) = b;

  double sq = 0.0;
  for (std::size_t t = first; t < end; ++t) {
    const Eigen::RowVectorXd row = regressor_row(data, zone_model.zone_id, spec, c_p, t, cols);
    const double err =
        row.dot(beta) - data.zone_temps[t][static_cast<std::size_t>(zone_model.zone_id)];
    sq += err * err;
  }
  return std::sqrt(sq / static_cast<double>(end - first));
}

FeatureSelectResult feature_select(const OperationDataset& data, int zone,
                                   const std::vector<Feature>& candidates, int n_a, int n_b) {
  data.validate();
  if (candidates.empty()) throw std::invalid_argument("feature_select: no candidates");
  const std::size_t split = (data.size() * 4) / 5;

  auto validation_rmse_for = [&](const std::vector<Feature>& features) {
    ArxFitSpec spec{n_a, n_b, features};
    RangeFit fit = fit_range(data, zone, spec, spec.c_p, 0, split);
    ZoneArxModel zm = beta_to_zone(spec, zone, fit.beta);
    zm.zone_id = zone;
    return one_step_rmse(data, zm, 1.0, split, data.size());
  };

  FeatureSelectResult out;
  double current = validation_rmse_for({});
  out.log.push_back("baseline (autoregressive only): validation rmse " + std::to_string(current));

  std::vector<bool> used(candidates.size(), false);
  for (;;) {
    if (current <= 0.0) {
      out.log.push_back("stop: validation rmse is zero");
      break;
    }
    int best = -1;
    double best_rmse = current;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      auto trial = out.selected;
      trial.push_back(candidates[c]);
      double rmse;
      try {
        rmse = validation_rmse_for(trial);
      } catch (const std::exception& e) {
        out.log.push_back("skip " + feature_name(candidates[c]) + ": " + e.what());
        continue;
      }
      if (rmse < best_rmse) {  // strict: ties keep the earlier candidate
        best_rmse = rmse;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) {
      out.log.push_back("stop: no candidate improves validation rmse");
      break;
    }
    const double improvement = (current - best_rmse) / current;
    if (improvement < 0.01) {
      out.log.push_back("stop: best improvement " + std::to_string(improvement * 100.0) +
                        "% < 1% (" + feature_name(candidates[static_cast<std::size_t>(best)]) + ")");
      break;
    }
    used[static_cast<std::size_t>(best)] = true;
    out.selected.push_back(candidates[static_cast<std::size_t>(best)]);
    out.log.push_back("add " + feature_name(candidates[static_cast<std::size_t>(best)]) +
                      ": validation rmse " + std::to_string(best_rmse));
    current = best_rmse;
  }
  out.validation_rmse = current;
  return out;
}

}  // namespace hvacrl::rom
