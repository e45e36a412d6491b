#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "tnet/autograd.hpp"
#include "tnet/tensor.hpp"

namespace tnet {

/// Every learnable tensor of a model, addressed by a stable dotted name.
using ParamStore = std::map<std::string, Tensor>;
/// The same names bound as leaves of one Graph.
using ParamVars = std::map<std::string, ag::Var>;

ParamVars bind_parameters(ag::Graph& graph, const ParamStore& params);
std::size_t count_parameters(const ParamStore& params);

}  // namespace tnet
