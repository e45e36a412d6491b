#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/batch.hpp"
#include "tnet/cpt.hpp"
#include "tnet/dropout.hpp"
#include "tnet/head.hpp"
#include "tnet/params.hpp"

namespace tnet {

/// Full models, CPT alternatives and ablations.
enum class Variant {
  TNetLF,
  TNetAS,
  LstmFcCnnLF,
  LstmFcCnnAS,
  LstmAttCnn,
  WoTransformation,
  WoContext,
  WoPositionLF,
  WoPositionAS,
};

std::string_view variant_name(Variant variant);
std::optional<Variant> parse_variant(std::string_view name);
const std::vector<Variant>& all_variants();
/// True for variants whose defaults follow the adaptive-scaling column.
bool uses_adaptive_scaling_defaults(Variant variant);

struct ModelConfig {
  std::size_t vocab_size = 2;
  std::size_t dim_w = 300;
  std::size_t dim_h = 50;
  std::size_t kernel_size = 3;
  std::size_t num_kernels = 50;
  double position_C = 40.0;
  cpt::CptConfig cpt;
  /// false drops proximity weighting; padding is still zeroed.
  bool use_position = true;
  bool share_target_encoder = false;
  /// Scale the last CPT output by the position weights once more before the CNN.
  bool scale_final_extra = false;
  double init_range = 0.01;

  void validate() const;
};

/// Sets the CPT and position fields of `base` for `variant`.
ModelConfig configure_variant(ModelConfig base, Variant variant);

struct ForwardOptions {
  train::Mode mode = train::Mode::Eval;
  double embedding_dropout = 0.0;  // on LSTM inputs
  double sentence_dropout = 0.0;   // on the pooled representation z
  std::mt19937_64* rng = nullptr;  // required in Train mode with nonzero rates
};

struct ForwardResult {
  ag::Var logits;
  ag::Var probabilities;
  std::vector<std::size_t> windows;  // surviving window start per kernel
};

struct Prediction {
  Label label = Label::Positive;
  std::array<double, kNumLabels> probabilities{};
  std::vector<std::size_t> windows;
};

class TNet {
 public:
  static constexpr std::string_view kEmbedding = "embedding";

  /// Takes ownership of an existing parameter set; throws if any expected
  /// tensor is missing or misshaped.
  TNet(ModelConfig config, ParamStore params);

  /// Fresh weights from U(-init_range, init_range), zero biases, and the
  /// given embedding matrix (its pad row is forced to zero).
  static TNet initialize(const ModelConfig& config, const Tensor& embeddings, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const ParamStore& params() const noexcept { return params_; }
  ParamStore& params() noexcept { return params_; }

  head::PositionWeights position_weights(const data::Instance& instance) const;

  /// Builds the forward pass on the graph that `vars` are bound to.
  ForwardResult forward(const ParamVars& vars, const data::Instance& instance,
                        const ForwardOptions& options = {}) const;

  /// Mean cross-entropy over `batch` as one scalar node.
  ag::Var batch_loss(const ParamVars& vars, std::span<const data::Instance> batch,
                     const ForwardOptions& options = {}) const;

  Prediction predict(const data::Instance& instance) const;
  std::vector<Prediction> predict(std::span<const data::Instance> instances) const;
  /// Evaluation-mode mean loss.
  double loss(std::span<const data::Instance> batch) const;

 private:
  ModelConfig config_;
  ParamStore params_;
};

/// Expected parameter names and shapes for a configuration.
ParamStore parameter_layout(const ModelConfig& config);

}  // namespace tnet
