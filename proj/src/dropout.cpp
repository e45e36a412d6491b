#include "tnet/dropout.hpp"

#include "tnet/error.hpp"

namespace tnet::train {

ag::Var apply_dropout(ag::Var x, double rate, Mode mode, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ContractError("apply_dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::Eval || rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const double survivor_scale = 1.0 / (1.0 - rate);
  Tensor mask(x.value().shape());
  for (double& m : mask.data()) m = keep(rng) ? survivor_scale : 0.0;
  return ag::mul_const(x, mask);
}

}  // namespace tnet::train
