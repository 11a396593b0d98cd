#pragma once

#include <cstddef>
#include <vector>

#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::scoring {

using numerics::Tensor;

enum class ScoreChannels { all, position };

/// Mean squared error between two trajectory matrices, over every column or
/// over the (x, y) columns only. Throws ShapeError on mismatched shapes.
double reconstruction_error(const Tensor& x0, const Tensor& x0_hat, ScoreChannels channels = ScoreChannels::all);

/// flag[i] = scores[i] >= lambda. Throws InputError for lambda < 0.
std::vector<bool> classify(const std::vector<double>& scores, double lambda);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  // Set when the ratio had a zero denominator and was reported as 0.
  bool accuracy_undefined = false, precision_undefined = false, recall_undefined = false, f1_undefined = false;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

/// Positive = anomalous. Throws InputError on length mismatch.
Confusion confusion_metrics(const std::vector<bool>& flags, const std::vector<bool>& labels);

struct RegressionErrors {
  double mse = 0.0, rmse = 0.0, mae = 0.0;
  double mape = 0.0;              // percent, over terms with |y| > 1e-9
  std::size_t mape_excluded = 0;  // terms skipped because |y| <= 1e-9
};

/// Throws InputError on empty or mismatched input.
RegressionErrors regression_errors(const std::vector<double>& y, const std::vector<double>& y_hat);

/// Jensen-Shannon divergence with natural logarithms. Throws InputError
/// unless both are equal-length, non-negative and sum to 1 within 1e-9.
double jsd(const std::vector<double>& p, const std::vector<double>& q);

/// Linear-interpolation percentile (p in [0, 100]) of a non-empty sample.
double percentile(std::vector<double> values, double p);

/// Area under the ROC curve of scores against binary labels (ties count
/// half). Throws InputError unless both classes are present.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

double median(std::vector<double> values);

}  // namespace kinodiff::scoring
