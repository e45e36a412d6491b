#include "tnet/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "tnet/metrics.hpp"

namespace tnet::train {

namespace {

struct Evaluation {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

Evaluation evaluate(const TNet& model, std::span<const data::Instance> instances) {
  std::vector<Label> preds, golds;
  for (const auto& inst : instances) {
    preds.push_back(model.predict(inst).label);
    golds.push_back(inst.label);
  }
  const auto report = metrics::evaluate(preds, golds);
  return {report.accuracy, report.macro_f1};
}

std::string parameter_norms(const ParamStore& params) {
  std::ostringstream os;
  os.precision(6);
  for (const auto& [name, t] : params) os << ' ' << name << '=' << t.norm();
  return os.str();
}

}  // namespace

std::optional<DatasetName> parse_dataset_name(std::string_view name) {
  if (name == "laptop") return DatasetName::Laptop;
  if (name == "rest") return DatasetName::Rest;
  if (name == "twitter") return DatasetName::Twitter;
  return std::nullopt;
}

std::string_view dataset_name(DatasetName name) {
  switch (name) {
    case DatasetName::Laptop: return "laptop";
    case DatasetName::Rest: return "rest";
    case DatasetName::Twitter: return "twitter";
  }
  return "unknown";
}

Hyperparams Hyperparams::defaults(Variant variant, DatasetName dataset) {
  Hyperparams h;
  h.variant = variant;
  const bool as = uses_adaptive_scaling_defaults(variant);
  h.num_kernels = as ? 100 : 50;
  h.C = as ? 30.0 : 40.0;
  switch (dataset) {
    case DatasetName::Laptop: h.batch_size = 64; break;
    case DatasetName::Rest: h.batch_size = as ? 32 : 25; break;
    case DatasetName::Twitter: h.batch_size = 64; break;
  }
  return h;
}

void Hyperparams::validate() const {
  if (dim_w == 0 || dim_h == 0 || layers == 0 || batch_size == 0 || kernel_size == 0 || num_kernels == 0) {
    throw ConfigError("hyperparameters: sizes must be positive");
  }
  if (!(p_lstm >= 0.0 && p_lstm < 1.0) || !(p_sent >= 0.0 && p_sent < 1.0)) {
    throw ConfigError("hyperparameters: dropout rates must lie in [0, 1)");
  }
  if (!(C > 0.0) || !(learning_rate > 0.0) || !(init_range > 0.0)) {
    throw ConfigError("hyperparameters: C, learning rate and init range must be positive");
  }
}

ModelConfig Hyperparams::model_config(std::size_t vocab_size) const {
  validate();
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.dim_w = dim_w;
  c.dim_h = dim_h;
  c.kernel_size = kernel_size;
  c.num_kernels = num_kernels;
  c.position_C = C;
  c.cpt.layers = layers;
  c.cpt.per_layer_params = per_layer_params;
  c.share_target_encoder = share_target_encoder;
  c.scale_final_extra = scale_final_extra;
  c.init_range = init_range;
  return configure_variant(c, variant);
}

double cross_entropy(std::span<const double> probabilities, Label gold) {
  if (probabilities.size() != kNumLabels) throw DimensionError("cross_entropy: expected 3 probabilities");
  return -std::log(probabilities[index_of(gold)]);
}

void adam_step(ParamStore& params, const ag::GradientMap& grads, AdamState& state, const AdamConfig& config) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ContractError("adam_step: gradient for unknown parameter '" + name + "'");
    auto& p = it->second;
    if (p.shape() != g.shape()) throw DimensionError("adam_step: gradient shape mismatch for '" + name + "'");
    auto& m = state.first_moment.try_emplace(name, p.shape()).first->second;
    auto& v = state.second_moment.try_emplace(name, p.shape()).first->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

TrainResult train(TNet model, std::span<const data::Instance> train_set,
                  std::span<const data::Instance> heldout, const Hyperparams& hyper,
                  const TrainOptions& options) {
  hyper.validate();
  if (train_set.empty()) throw ContractError("train: empty training set");

  std::mt19937_64 shuffle_rng(hyper.seed);
  std::mt19937_64 dropout_rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  const AdamConfig adam{hyper.learning_rate, hyper.beta1, hyper.beta2, hyper.adam_epsilon};
  const bool track_train = options.track_train_accuracy || heldout.empty();
  const std::string embedding(TNet::kEmbedding);

  ForwardOptions fwd;
  fwd.mode = Mode::Train;
  fwd.embedding_dropout = hyper.p_lstm;
  fwd.sentence_dropout = hyper.p_sent;
  fwd.rng = &dropout_rng;

  AdamState state;
  RunHistory history;
  ParamStore best = model.params();
  double best_score = -1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<data::Instance> batch;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_id = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size, ++batch_id) {
      const auto end = std::min(order.size(), start + hyper.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);

      ag::GradientMap grads;
      {
        ag::Graph graph;
        auto vars = bind_parameters(graph, model.params());
        auto loss = model.batch_loss(vars, batch, fwd);
        const double value = loss.value()[0];
        if (!std::isfinite(value)) {
          throw NanLossError("train: non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_id) + "; parameter norms:" + parameter_norms(model.params()));
        }
        loss_sum += value * static_cast<double>(batch.size());
        graph.backward(loss);
        grads = graph.parameter_gradients();
      }
      if (hyper.freeze_embeddings) {
        grads.erase(embedding);
      } else if (auto it = grads.find(embedding); it != grads.end()) {
        for (double& g : it->second.row(data::Vocabulary::kPadId)) g = 0.0;
      }
      adam_step(model.params(), grads, state, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train_set.size());
    if (!heldout.empty()) {
      const auto e = evaluate(model, heldout);
      stats.heldout_accuracy = e.accuracy;
      stats.heldout_macro_f1 = e.macro_f1;
    }
    if (track_train) stats.train_accuracy = evaluate(model, train_set).accuracy;

    history.train_loss.push_back(stats.train_loss);
    history.heldout_accuracy.push_back(stats.heldout_accuracy);
    history.heldout_macro_f1.push_back(stats.heldout_macro_f1);
    if (track_train) history.train_accuracy.push_back(stats.train_accuracy);

    const double score = heldout.empty() ? stats.train_accuracy : stats.heldout_accuracy;
    if (score > best_score) {
      best_score = score;
      best = model.params();
      history.best_epoch = epoch;
    }
    if (options.on_epoch && !options.on_epoch(stats)) break;
  }

  return {TNet(model.config(), std::move(best)), std::move(history)};
}

}  // namespace tnet::train
