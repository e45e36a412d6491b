#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/head.hpp"
#include "tnet/params.hpp"

// Context-preserving transformation layers between the BiLSTM and the CNN.
//
// All functions operate on a block of word representations at once: `h` is
// either a single row [d] or a matrix [n x d] whose rows are positions, and
// `h_tau` is the target representation [m x d].
namespace tnet::cpt {

/// How a layer's input and its transformed features are combined.
enum class Strategy { LosslessForwarding, AdaptiveScaling, None };

/// What produces the transformed features of a layer.
enum class Transform {
  Tst,        // per-word attention over target words + FC
  Fc,         // FC over [word ; averaged target]
  Attention,  // dot attention of words against the averaged target
  Identity,   // no transformation
};

struct CptConfig {
  std::size_t layers = 2;
  Strategy strategy = Strategy::LosslessForwarding;
  Transform transform = Transform::Tst;
  bool apply_position_per_layer = true;
  /// One TST/gate parameter set per layer instead of one shared set.
  bool per_layer_params = false;

  void validate() const;
};

struct TstParams {
  ag::Var weights;  // [d x 2d]
  ag::Var bias;     // [d]
};

struct GateParams {
  ag::Var weights;  // [d x d]
  ag::Var bias;     // [d]
};

struct LayerParams {
  TstParams tst;
  GateParams gate;
};

struct CptParams {
  /// A single entry when parameters are shared across layers.
  std::vector<LayerParams> layers;

  const LayerParams& layer(std::size_t l) const { return layers.size() == 1 ? layers[0] : layers.at(l); }
};

/// softmax_j(h_i . h_tau_j): [n x m] (or [m] for a single row).
ag::Var target_attention(ag::Var h, ag::Var h_tau);

/// r_i = sum_j h_tau_j * F(h_i, h_tau_j).
ag::Var tailor_target(ag::Var h, ag::Var h_tau);

/// tanh(W_tau [h_i : r_i] + b_tau).
ag::Var tst(ag::Var h, ag::Var h_tau, const TstParams& params);

/// tanh(W_tau [h_i : mean(h_tau)] + b_tau).
ag::Var fc_transform(ag::Var h, ag::Var h_tau_mean, const TstParams& params);

/// h + h_tilde.
ag::Var lossless_forward(ag::Var h, ag::Var h_tilde);

/// sigmoid(W_trans h + b_trans).
ag::Var scaling_gate(ag::Var h, const GateParams& params);

/// t * h_tilde + (1 - t) * h with t = scaling_gate(h).
ag::Var adaptive_scale(ag::Var h, ag::Var h_tilde, const GateParams& params);

/// Rows of h[P x d] reweighted by n * softmax_i(h_i . mean(h_tau)), the
/// softmax taken over the n real positions only.
ag::Var attention_reweight(ag::Var h, ag::Var h_tau, std::size_t length);

/// Intermediate values of one cpt_stack call, for inspection and tests.
struct CptTrace {
  std::vector<ag::Var> inputs;       // h^(l), l = 0..L-1
  std::vector<ag::Var> transformed;  // h~^(l)
  std::vector<ag::Var> gates;        // t^(l), adaptive scaling only
};

/// L layers of: transform, combine by strategy, then (optionally) scale every
/// position by its proximity weight.
ag::Var cpt_stack(ag::Var h0, ag::Var h_tau, const CptConfig& config, const CptParams& params,
                  const head::PositionWeights& weights, CptTrace* trace = nullptr);

void init_cpt(ParamStore& store, const CptConfig& config, std::size_t width, double range,
              std::mt19937_64& rng);
CptParams cpt_params(const ParamVars& vars, const CptConfig& config);

}  // namespace tnet::cpt
