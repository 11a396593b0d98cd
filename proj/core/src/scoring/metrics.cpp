#include "kinodiff/scoring/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"

namespace kinodiff::scoring {

double reconstruction_error(const Tensor& x0, const Tensor& x0_hat, ScoreChannels channels) {
  if (x0.shape() != x0_hat.shape() || x0.rank() != 2) {
    throw ShapeError("reconstruction_error: shape mismatch " + numerics::shape_to_string(x0.shape()) + " vs " +
                     numerics::shape_to_string(x0_hat.shape()));
  }
  const std::size_t cols = channels == ScoreChannels::all ? x0.cols() : std::min<std::size_t>(2, x0.cols());
  if (x0.rows() == 0 || cols == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x0.rows(); ++i)
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = x0.at(i, c) - x0_hat.at(i, c);
      s += d * d;
    }
  return s / static_cast<double>(x0.rows() * cols);
}

std::vector<bool> classify(const std::vector<double>& scores, double lambda) {
  if (!(lambda >= 0.0)) throw InputError("lambda must be >= 0");
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] >= lambda;
  return flags;
}

Confusion confusion_metrics(const std::vector<bool>& flags, const std::vector<bool>& labels) {
  if (flags.size() != labels.size()) throw InputError("confusion_metrics: flags and labels differ in length");
  Confusion c;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && labels[i]) ++c.tp;
    else if (flags[i]) ++c.fp;
    else if (labels[i]) ++c.fn;
    else ++c.tn;
  }
  auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  c.accuracy = ratio(c.tp + c.tn, c.total(), c.accuracy_undefined);
  c.precision = ratio(c.tp, c.tp + c.fp, c.precision_undefined);
  c.recall = ratio(c.tp, c.tp + c.fn, c.recall_undefined);
  const double pr = c.precision + c.recall;
  c.f1_undefined = pr == 0.0;
  c.f1 = c.f1_undefined ? 0.0 : 2.0 * c.precision * c.recall / pr;
  return c;
}

RegressionErrors regression_errors(const std::vector<double>& y, const std::vector<double>& y_hat) {
  if (y.empty()) throw InputError("regression_errors: empty input");
  if (y.size() != y_hat.size()) throw InputError("regression_errors: length mismatch");
  RegressionErrors r;
  double ape = 0.0;
  std::size_t ape_n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y_hat[i] - y[i];
    r.mse += e * e;
    r.mae += std::abs(e);
    if (std::abs(y[i]) > 1e-9) {
      ape += std::abs(e / y[i]);
      ++ape_n;
    } else {
      ++r.mape_excluded;
    }
  }
  const auto n = static_cast<double>(y.size());
  r.mse /= n;
  r.mae /= n;
  r.rmse = std::sqrt(r.mse);
  r.mape = ape_n == 0 ? 0.0 : 100.0 * ape / static_cast<double>(ape_n);
  return r;
}

namespace {

void check_distribution(const std::vector<double>& p, const char* name) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError(std::string("jsd: ") + name + " has a negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw InputError(std::string("jsd: ") + name + " sums to " + format_double(s) + ", not 1");
}

}  // namespace

double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw InputError("jsd: distributions differ in length");
  check_distribution(p, "P");
  check_distribution(q, "Q");
  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kl_p += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) kl_q += q[i] * std::log(q[i] / m);
  }
  return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, std::log(2.0));
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw InputError("percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw InputError("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with mid-ranks for ties.
  double rank_sum = 0.0;
  std::size_t pos = 0, n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum += mid;
        ++n_pos;
      }
    i = j;
  }
  pos = scores.size() - n_pos;
  if (n_pos == 0 || pos == 0) throw InputError("roc_auc: both classes must be present");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

}  // namespace kinodiff::scoring
