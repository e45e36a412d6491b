#include "tnet/head.hpp"

#include <algorithm>
#include <string>

#include "tnet/error.hpp"

namespace tnet::head {

PositionWeights position_relevance(std::size_t k, std::size_t m, std::size_t n,
                                   std::size_t padded_len, double C) {
  if (k < 1 || m < 1 || k + m - 1 > n || n > padded_len) {
    throw ContractError("position_relevance: target span [" + std::to_string(k) + ", " +
                        std::to_string(k + m - 1) + "] outside sentence of length " +
                        std::to_string(n) + " (padded " + std::to_string(padded_len) + ")");
  }
  if (!(C > 0.0)) throw ContractError("position_relevance: C must be positive");

  PositionWeights out{std::vector<double>(padded_len, 0.0), k, m, n, C};
  const auto kd = static_cast<double>(k), md = static_cast<double>(m);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto id = static_cast<double>(i);
    const double raw = i < k + m ? 1.0 - (kd + md - id) / C : 1.0 - (id - kd) / C;
    out.v[i - 1] = raw > 0.0 ? raw : 0.0;
  }
  return out;
}

PositionWeights padding_mask(std::size_t k, std::size_t m, std::size_t n, std::size_t padded_len) {
  if (k < 1 || m < 1 || k + m - 1 > n || n > padded_len) {
    throw ContractError("padding_mask: target span outside sentence");
  }
  PositionWeights out{std::vector<double>(padded_len, 0.0), k, m, n, 0.0};
  for (std::size_t i = 0; i < n; ++i) out.v[i] = 1.0;
  return out;
}

ag::Var apply_position(ag::Var h, const PositionWeights& weights) {
  return ag::scale_rows(h, weights.v);
}

ag::Var convolve(ag::Var h_hat, const ConvParams& params) {
  const auto rows = h_hat.value().rows();
  if (rows < params.kernel_size) {
    throw DimensionError("convolve: padded sentence of " + std::to_string(rows) +
                         " positions is shorter than kernel size " + std::to_string(params.kernel_size));
  }
  const auto expected = params.kernel_size * h_hat.value().cols();
  if (params.kernels.value().cols() != expected) {
    throw DimensionError("convolve: kernels " + shape_str(params.kernels.value().shape()) +
                         " do not match window width " + std::to_string(expected));
  }
  auto pre = ag::linear(ag::windows(h_hat, params.kernel_size), params.kernels, params.bias);
  return ag::transpose(ag::relu(pre));
}

PoolResult max_pool(ag::Var feature_maps) {
  auto result = ag::row_max(feature_maps);
  return {result.max, std::move(result.argmax)};
}

ag::Var classifier_logits(ag::Var z, const ClassifierParams& params) {
  return ag::linear(z, params.weights, params.bias);
}

ag::Var classify(ag::Var z, const ClassifierParams& params) {
  return ag::softmax(classifier_logits(z, params));
}

NGramChoice most_informative_ngram(std::span<const std::size_t> windows) {
  if (windows.empty()) throw ContractError("most_informative_ngram: no kernels");
  NGramChoice best;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto start = windows[k];
    const auto votes = static_cast<std::size_t>(std::count(windows.begin(), windows.end(), start));
    if (votes > best.votes || (votes == best.votes && start < best.start)) {
      best = {static_cast<std::size_t>(std::find(windows.begin(), windows.end(), start) - windows.begin()),
              start, votes};
    }
  }
  return best;
}

Label predicted_label(std::span<const double> probabilities) {
  if (probabilities.size() != kNumLabels) {
    throw DimensionError("predicted_label: expected 3 probabilities");
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumLabels; ++c) {
    if (probabilities[c] > probabilities[best]) best = c;
  }
  return static_cast<Label>(best);
}

}  // namespace tnet::head
