#include "driftlasso/metrics.hpp"

#include "driftlasso/errors.hpp"

#include <cmath>

namespace driftlasso {

ErrorNorms error_norms(const Vector& theta_hat, const Vector& theta0) {
  if (theta_hat.size() != theta0.size()) throw InvalidInput("error_norms: length mismatch");
  const Vector diff = theta_hat - theta0;
  return {diff.lpNorm<1>(), diff.norm()};
}

SupportScore support_score(const Vector& theta_hat, const Vector& theta0, double tau) {
  if (theta_hat.size() != theta0.size()) throw InvalidInput("support_score: length mismatch");
  if (!(tau >= 0.0)) throw InvalidInput("support threshold must be nonnegative");
  SupportScore s;
  s.threshold = tau;
  for (Eigen::Index j = 0; j < theta0.size(); ++j) {
    const bool predicted = std::abs(theta_hat(j)) > tau;
    const bool truth = std::abs(theta0(j)) > tau;
    s.true_positives += predicted && truth;
    s.false_positives += predicted && !truth;
    s.false_negatives += !predicted && truth;
  }
  const int predicted = s.true_positives + s.false_positives;
  const int actual = s.true_positives + s.false_negatives;
  if (predicted > 0)
    s.precision = static_cast<double>(s.true_positives) / predicted;
  else
    s.precision = actual == 0 ? 1.0 : 0.0;
  if (actual > 0)
    s.recall = static_cast<double>(s.true_positives) / actual;
  else
    s.recall = predicted == 0 ? 1.0 : 0.0;
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InvalidInput("rate_fit needs at least 3 points");
  const auto m = static_cast<Eigen::Index>(points.size());
  Vector x(m), y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [t, err] = points[static_cast<std::size_t>(i)];
    if (!(t > 0.0) || !(err > 0.0)) throw InvalidInput("rate_fit needs positive T and error values");
    x(i) = std::log(t);
    y(i) = std::log(err);
  }
  const double mx = x.mean(), my = y.mean();
  const Vector cx = x.array() - mx, cy = y.array() - my;
  const double sxx = cx.squaredNorm();
  if (!(sxx > 0.0)) throw InvalidInput("rate_fit needs at least two distinct T values");
  RateFit fit;
  fit.slope = cx.dot(cy) / sxx;
  fit.intercept = my - fit.slope * mx;
  const double syy = cy.squaredNorm();
  const double sse = (cy - fit.slope * cx).squaredNorm();
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

}  // namespace driftlasso
