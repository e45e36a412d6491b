#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/params.hpp"

namespace tnet::ag {

/// Central differences (f(x+eps) - f(x-eps)) / (2 eps) for every scalar of
/// every parameter in `params` (or only those listed in `names`). Parameters
/// are perturbed in place and restored. `loss_fn` must be deterministic:
/// two evaluations at the unperturbed point that differ raise
/// OracleInvalidError.
GradientMap finite_difference_gradient(const std::function<double()>& loss_fn, ParamStore& params,
                                       double epsilon = 1e-5,
                                       const std::vector<std::string>& names = {});

/// |a - n| / max(|a|, |n|, floor). The floor keeps exact zeros from turning
/// rounding noise into a large relative error.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheckEntry {
  std::string name;
  std::size_t elements = 0;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  bool passed = true;
};

GradCheckReport compare_gradients(const GradientMap& analytic, const GradientMap& numeric,
                                  double tolerance);

}  // namespace tnet::ag
