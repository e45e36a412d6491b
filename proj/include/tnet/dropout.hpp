#pragma once

#include <random>

#include "tnet/autograd.hpp"

namespace tnet::train {

enum class Mode { Train, Eval };

/// Inverted dropout: in Train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Eval mode and rate 0 are
/// the identity. `rate` must lie in [0, 1).
ag::Var apply_dropout(ag::Var x, double rate, Mode mode, std::mt19937_64& rng);

}  // namespace tnet::train
