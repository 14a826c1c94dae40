#pragma once

#include "driftlasso/model.hpp"

#include <utility>
#include <vector>

namespace driftlasso {

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
};

ErrorNorms error_norms(const Vector& theta_hat, const Vector& theta0);

struct SupportScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  double threshold = 0.0;
};

/// Supports are {j : |v_j| > tau}. An empty prediction has precision 0; when
/// both supports are empty the prediction is perfect and all scores are 1.
SupportScore support_score(const Vector& theta_hat, const Vector& theta0, double tau);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// OLS fit of log(error) on log(T); needs at least 3 points.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace driftlasso
