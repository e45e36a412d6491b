#include "tnet/metrics.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "tnet/error.hpp"

namespace tnet::metrics {

namespace {

void check_inputs(std::span<const Label> predictions, std::span<const Label> golds) {
  if (predictions.empty()) throw ContractError("metrics: empty input");
  if (predictions.size() != golds.size()) {
    throw ContractError("metrics: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(golds.size()) + " gold labels");
  }
}

}  // namespace

Confusion confusion_matrix(std::span<const Label> predictions, std::span<const Label> golds) {
  check_inputs(predictions, golds);
  Confusion c{};
  for (std::size_t i = 0; i < predictions.size(); ++i) ++c[index_of(golds[i])][index_of(predictions[i])];
  return c;
}

EvalReport report_from_confusion(const Confusion& confusion) {
  EvalReport r;
  r.confusion = confusion;
  std::size_t correct = 0;
  for (std::size_t g = 0; g < kNumLabels; ++g) {
    for (std::size_t p = 0; p < kNumLabels; ++p) r.total += confusion[g][p];
    correct += confusion[g][g];
  }
  if (r.total == 0) throw ContractError("metrics: empty confusion matrix");
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

  double f1_sum = 0.0;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    std::size_t predicted = 0, gold = 0;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      predicted += confusion[j][k];
      gold += confusion[k][j];
    }
    auto& m = r.per_class[k];
    const auto tp = static_cast<double>(confusion[k][k]);
    m.support = gold;
    m.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = gold ? tp / static_cast<double>(gold) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    f1_sum += m.f1;
  }
  r.macro_f1 = f1_sum / static_cast<double>(kNumLabels);
  return r;
}

EvalReport evaluate(std::span<const Label> predictions, std::span<const Label> golds) {
  return report_from_confusion(confusion_matrix(predictions, golds));
}

double accuracy(std::span<const Label> predictions, std::span<const Label> golds) {
  return evaluate(predictions, golds).accuracy;
}

double macro_f1(std::span<const Label> predictions, std::span<const Label> golds) {
  return evaluate(predictions, golds).macro_f1;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("paired_t_test: score vectors differ in length");
  if (a.size() < 2) throw ContractError("paired_t_test: need at least two paired scores");
  const auto n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.degrees_of_freedom = n - 1;
  r.mean_difference = mean;
  if (sd == 0.0) {
    throw DegenerateInputError("paired_t_test: differences have zero variance (t is unbounded)");
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(r.degrees_of_freedom));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace tnet::metrics
