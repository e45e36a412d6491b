#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "tnet/label.hpp"

namespace tnet::metrics {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// confusion[gold][predicted], indexed in (P, N, O) order.
using Confusion = std::array<std::array<std::size_t, kNumLabels>, kNumLabels>;

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<ClassMetrics, kNumLabels> per_class{};
  Confusion confusion{};
  std::size_t total = 0;
};

double accuracy(std::span<const Label> predictions, std::span<const Label> golds);
/// Unweighted mean of per-class F1. A class with no predictions and no gold
/// examples contributes 0, as does any class whose precision + recall is 0.
double macro_f1(std::span<const Label> predictions, std::span<const Label> golds);
Confusion confusion_matrix(std::span<const Label> predictions, std::span<const Label> golds);
EvalReport evaluate(std::span<const Label> predictions, std::span<const Label> golds);
EvalReport report_from_confusion(const Confusion& confusion);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t degrees_of_freedom = 0;
  double mean_difference = 0.0;
};

/// Two-sided paired t-test on a - b with a Student-t reference of n-1
/// degrees of freedom. Throws DegenerateInputError when the differences have
/// zero variance, and ContractError on fewer than two pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace tnet::metrics
