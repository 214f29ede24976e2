#pragma once

#include <string>
#include <vector>

#include "hvacrl/rom/dataset.hpp"
#include "hvacrl/rom/model.hpp"

namespace hvacrl::rom {

struct ArxFitSpec {
  int n_a = 1;
  int n_b = 1;
  std::vector<Feature> features;  // regressor layout for the fitted zone
  double c_p = 1.0;               // used to assemble delivered-cooling regressors
};

struct ArxFitResult {
  ZoneArxModel model;
  double rmse = 0.0;            // one-step residual RMSE over the fitted range
  bool ridge_applied = false;   // conditioning fallback was used
  double condition_number = 0.0;
};

// Ordinary least squares on the one-step-ahead ARX regression for one zone,
// solved through the normal equations. When the regressor conditioning
// exceeds 1e10 a small ridge (lambda = 1e-8) is added and flagged in the
// result; an effectively rank-deficient regressor raises std::runtime_error
// naming the degenerate columns.
ArxFitResult fit_arx(const OperationDataset& data, int zone, const ArxFitSpec& spec);

struct FeatureSelectResult {
  std::vector<Feature> selected;
  double validation_rmse = 0.0;       // after the last accepted feature
  std::vector<std::string> log;       // one line per greedy round
};

// Greedy forward selection over the candidate features: fit on the first 80%
// of the data (chronological split), score one-step RMSE on the remaining
// 20%, and stop when the best candidate improves validation RMSE by less
// than 1% relative. Ties break toward the earlier candidate.
FeatureSelectResult feature_select(const OperationDataset& data, int zone,
                                   const std::vector<Feature>& candidates, int n_a = 1,
                                   int n_b = 1);

// One-step-ahead prediction RMSE of a fitted zone model over [begin, end).
double one_step_rmse(const OperationDataset& data, const ZoneArxModel& zone_model, double c_p,
                     std::size_t begin, std::size_t end);

}  // namespace hvacrl::rom
