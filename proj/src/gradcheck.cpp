#include "tnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tnet/error.hpp"

namespace tnet::ag {

GradientMap finite_difference_gradient(const std::function<double()>& loss_fn, ParamStore& params,
                                       double epsilon, const std::vector<std::string>& names) {
  if (!(epsilon > 0.0)) throw ContractError("finite_difference_gradient: epsilon must be positive");

  const double base = loss_fn();
  const double again = loss_fn();
  if (base != again) {
    std::ostringstream os;
    os.precision(17);
    os << "finite_difference_gradient: loss is not deterministic (" << base << " vs " << again << ")";
    throw OracleInvalidError(os.str());
  }

  GradientMap out;
  for (auto& [name, tensor] : params) {
    if (!names.empty() && std::find(names.begin(), names.end(), name) == names.end()) continue;
    Tensor grad(tensor.shape());
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + epsilon;
      const double up = loss_fn();
      tensor[i] = saved - epsilon;
      const double down = loss_fn();
      tensor[i] = saved;
      grad[i] = (up - down) / (2.0 * epsilon);
    }
    out.emplace(name, std::move(grad));
  }
  return out;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport compare_gradients(const GradientMap& analytic, const GradientMap& numeric,
                                  double tolerance) {
  GradCheckReport report;
  for (const auto& [name, num] : numeric) {
    GradCheckEntry entry;
    entry.name = name;
    entry.elements = num.size();
    auto it = analytic.find(name);
    if (it == analytic.end() || it->second.shape() != num.shape()) {
      entry.passed = false;
      entry.max_relative_error = INFINITY;
    } else {
      const auto& an = it->second;
      for (std::size_t i = 0; i < num.size(); ++i) {
        const double err = relative_error(an[i], num[i]);
        if (err > entry.max_relative_error || !std::isfinite(err)) {
          entry.max_relative_error = err;
          entry.worst_index = i;
          entry.analytic = an[i];
          entry.numeric = num[i];
        }
      }
      entry.passed = entry.max_relative_error < tolerance;
    }
    report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
    report.passed = report.passed && entry.passed;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace tnet::ag
