#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "tnet/autograd.hpp"
#include "tnet/gradcheck.hpp"
#include "tnet/params.hpp"

namespace tnet::support {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data()) v = u(rng);
  return t;
}

/// sum(out * R) for a fixed random R: reduces any output to a scalar whose
/// gradient exercises every output element.
inline ag::Var project(ag::Var out, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  return ag::sum(ag::mul_const(out, random_tensor(out.value().shape(), rng)));
}

using Builder = std::function<ag::Var(const ParamVars&)>;

/// Backward vs central differences for a scalar-valued builder over `params`.
inline ag::GradCheckReport check_builder(const Builder& build, ParamStore params, double tolerance = 1e-4) {
  ag::GradientMap analytic;
  {
    ag::Graph graph;
    auto vars = bind_parameters(graph, params);
    graph.backward(build(vars));
    analytic = graph.parameter_gradients();
  }
  auto numeric = ag::finite_difference_gradient(
      [&] {
        ag::Graph graph;
        return build(bind_parameters(graph, params)).value()[0];
      },
      params);
  return ag::compare_gradients(analytic, numeric, tolerance);
}

}  // namespace tnet::support
