#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/batch.hpp"
#include "tnet/error.hpp"
#include "tnet/model.hpp"
#include "tnet/params.hpp"

namespace tnet::train {

enum class DatasetName { Laptop, Rest, Twitter };

std::optional<DatasetName> parse_dataset_name(std::string_view name);
std::string_view dataset_name(DatasetName name);

struct Hyperparams {
  std::size_t dim_w = 300;
  std::size_t dim_h = 50;
  double p_lstm = 0.3;
  double p_sent = 0.3;
  std::size_t layers = 2;
  std::size_t batch_size = 64;
  std::size_t kernel_size = 3;
  std::size_t num_kernels = 50;
  double C = 40.0;
  Variant variant = Variant::TNetLF;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;

  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double init_range = 0.01;

  bool share_target_encoder = false;
  bool per_layer_params = false;
  bool freeze_embeddings = false;
  bool scale_final_extra = false;

  /// Default settings for a (variant, dataset) pair. Variants built on
  /// adaptive scaling take the TNet-AS column, all others TNet-LF.
  static Hyperparams defaults(Variant variant, DatasetName dataset);

  void validate() const;
  ModelConfig model_config(std::size_t vocab_size) const;

  bool operator==(const Hyperparams&) const = default;
};

/// -log p(gold).
double cross_entropy(std::span<const double> probabilities, Label gold);

struct AdamState {
  ParamStore first_moment;
  ParamStore second_moment;
  std::size_t step = 0;
};

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of every parameter that has a gradient.
void adam_step(ParamStore& params, const ag::GradientMap& grads, AdamState& state, const AdamConfig& config = {});

/// Deterministic shuffle-and-cut into (train, validation); each subset keeps
/// the input order. Requires at least 5 items and fraction in (0, 1).
template <class T>
std::pair<std::vector<T>, std::vector<T>> heldout_split(std::span<const T> items, double fraction,
                                                        std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("heldout_split: fraction must lie in (0, 1)");
  if (items.size() < 5) throw ContractError("heldout_split: need at least 5 records");
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto held = static_cast<std::size_t>(fraction * static_cast<double>(items.size()) + 0.5);
  held = std::clamp<std::size_t>(held, 1, items.size() - 1);
  std::vector<bool> is_held(items.size(), false);
  for (std::size_t i = 0; i < held; ++i) is_held[order[i]] = true;
  std::pair<std::vector<T>, std::vector<T>> out;
  for (std::size_t i = 0; i < items.size(); ++i) (is_held[i] ? out.second : out.first).push_back(items[i]);
  return out;
}

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double heldout_accuracy = 0.0;
  double heldout_macro_f1 = 0.0;
  double train_accuracy = 0.0;
};

struct RunHistory {
  std::vector<double> train_loss;
  std::vector<double> heldout_accuracy;
  std::vector<double> heldout_macro_f1;
  std::vector<double> train_accuracy;  // filled when tracked
  std::size_t best_epoch = 0;          // 1-based; the returned snapshot

  bool operator==(const RunHistory&) const = default;
};

struct TrainOptions {
  /// Also evaluate the training set each epoch (forced when there is no held-out set).
  bool track_train_accuracy = false;
  /// Called after every epoch; returning false stops training.
  std::function<bool(const EpochStats&)> on_epoch;
};

struct TrainResult {
  TNet model;
  RunHistory history;
};

/// Mini-batch Adam on mean cross-entropy with dropout on the LSTM inputs and
/// on z. Returns the snapshot with the best held-out accuracy (earliest on
/// ties), or the best training accuracy when `heldout` is empty. A
/// non-finite batch loss throws NanLossError.
TrainResult train(TNet model, std::span<const data::Instance> train_set,
                  std::span<const data::Instance> heldout, const Hyperparams& hyper,
                  const TrainOptions& options = {});

}  // namespace tnet::train
