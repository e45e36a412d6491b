#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/label.hpp"

namespace tnet::head {

/// Proximity weight of every padded position to the target span.
struct PositionWeights {
  std::vector<double> v;
  std::size_t target_start = 1;  // k, 1-based
  std::size_t target_len = 1;    // m
  std::size_t length = 1;        // n, unpadded
  double C = 40.0;
};

/// Three-case proximity formula over 1-based positions i in [1, padded_len]:
///   i <  k+m       : 1 - (k+m-i)/C
///   k+m <= i <= n  : 1 - (i-k)/C
///   i >  n         : 0
/// Raw values below 0 (when C is smaller than the distance) are clamped to 0.
PositionWeights position_relevance(std::size_t k, std::size_t m, std::size_t n,
                                   std::size_t padded_len, double C);

/// 1 on real tokens, 0 on padding; used when proximity weighting is ablated.
PositionWeights padding_mask(std::size_t k, std::size_t m, std::size_t n, std::size_t padded_len);

/// Row i of h scaled by v_i.
ag::Var apply_position(ag::Var h, const PositionWeights& weights);

struct ConvParams {
  ag::Var kernels;  // [n_k x s*width]
  ag::Var bias;     // [n_k]
  std::size_t kernel_size = 3;
};

/// ReLU feature maps [n_k x (rows - s + 1)]; windows slide over the whole
/// padded sequence, padding included.
ag::Var convolve(ag::Var h_hat, const ConvParams& params);

struct PoolResult {
  ag::Var z;                        // [n_k]
  std::vector<std::size_t> window;  // start of the surviving window per kernel
};

/// Max over each feature map; ties pick the lowest window index.
PoolResult max_pool(ag::Var feature_maps);

struct ClassifierParams {
  ag::Var weights;  // [3 x n_k]
  ag::Var bias;     // [3]
};

ag::Var classifier_logits(ag::Var z, const ClassifierParams& params);
/// Softmax(W_f z + b_f) over (P, N, O).
ag::Var classify(ag::Var z, const ClassifierParams& params);

/// The window that survives max pooling in the most kernels; ties go to the
/// lowest window start. `kernel` is the first kernel that kept it.
struct NGramChoice {
  std::size_t kernel = 0;
  std::size_t start = 0;  // 0-based first position of the window
  std::size_t votes = 0;
};
NGramChoice most_informative_ngram(std::span<const std::size_t> windows);

/// Argmax with ties broken by class order P < N < O.
Label predicted_label(std::span<const double> probabilities);

}  // namespace tnet::head
