#include "tnet/params.hpp"

namespace tnet {

ParamVars bind_parameters(ag::Graph& graph, const ParamStore& params) {
  ParamVars vars;
  for (const auto& [name, tensor] : params) vars.emplace(name, graph.parameter(name, tensor));
  return vars;
}

std::size_t count_parameters(const ParamStore& params) {
  std::size_t total = 0;
  for (const auto& [name, tensor] : params) total += tensor.size();
  return total;
}

}  // namespace tnet
