#include "tnet/model.hpp"

#include <array>
#include <utility>

#include "tnet/encoders.hpp"
#include "tnet/error.hpp"

namespace tnet {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 9> kVariantNames{{
    {Variant::TNetLF, "tnet-lf"},
    {Variant::TNetAS, "tnet-as"},
    {Variant::LstmFcCnnLF, "lstm-fc-cnn-lf"},
    {Variant::LstmFcCnnAS, "lstm-fc-cnn-as"},
    {Variant::LstmAttCnn, "lstm-att-cnn"},
    {Variant::WoTransformation, "wo-transformation"},
    {Variant::WoContext, "wo-context"},
    {Variant::WoPositionLF, "wo-position-lf"},
    {Variant::WoPositionAS, "wo-position-as"},
}};

const std::string kSentLstm = "sent_lstm";
const std::string kTargetLstm = "target_lstm";

std::string target_prefix(const ModelConfig& c) { return c.share_target_encoder ? kSentLstm : kTargetLstm; }

ParamStore fresh_parameters(const ModelConfig& config, std::mt19937_64& rng) {
  ParamStore store;
  const auto width = 2 * config.dim_h;
  const auto range = config.init_range;
  enc::init_bilstm(store, kSentLstm, config.dim_w, config.dim_h, range, rng);
  if (!config.share_target_encoder) enc::init_bilstm(store, kTargetLstm, config.dim_w, config.dim_h, range, rng);
  cpt::init_cpt(store, config.cpt, width, range, rng);
  std::uniform_real_distribution<double> uniform(-range, range);
  Tensor conv({config.num_kernels, config.kernel_size * width});
  for (double& v : conv.data()) v = uniform(rng);
  store["conv.W"] = std::move(conv);
  store["conv.b"] = Tensor({config.num_kernels});
  Tensor clf({kNumLabels, config.num_kernels});
  for (double& v : clf.data()) v = uniform(rng);
  store["clf.W"] = std::move(clf);
  store["clf.b"] = Tensor({kNumLabels});
  store[std::string(TNet::kEmbedding)] = Tensor({config.vocab_size, config.dim_w});
  return store;
}

}  // namespace

std::string_view variant_name(Variant variant) {
  for (const auto& [v, name] : kVariantNames) {
    if (v == variant) return name;
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (const auto& [v, n] : kVariantNames) {
    if (n == name) return v;
  }
  return std::nullopt;
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> variants = [] {
    std::vector<Variant> out;
    for (const auto& [v, name] : kVariantNames) out.push_back(v);
    return out;
  }();
  return variants;
}

bool uses_adaptive_scaling_defaults(Variant variant) {
  return variant == Variant::TNetAS || variant == Variant::LstmFcCnnAS || variant == Variant::WoPositionAS;
}

void ModelConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("model: vocabulary must hold at least <pad> and <unk>");
  if (dim_w == 0 || dim_h == 0 || kernel_size == 0 || num_kernels == 0) {
    throw ConfigError("model: dimensions must be positive");
  }
  if (!(position_C > 0.0)) throw ConfigError("model: C must be positive");
  if (!(init_range > 0.0)) throw ConfigError("model: init range must be positive");
  cpt.validate();
}

ModelConfig configure_variant(ModelConfig base, Variant variant) {
  using cpt::Strategy;
  using cpt::Transform;
  auto& c = base.cpt;
  base.use_position = true;
  c.apply_position_per_layer = true;
  switch (variant) {
    case Variant::TNetLF:
      c.transform = Transform::Tst;
      c.strategy = Strategy::LosslessForwarding;
      break;
    case Variant::TNetAS:
      c.transform = Transform::Tst;
      c.strategy = Strategy::AdaptiveScaling;
      break;
    case Variant::LstmFcCnnLF:
      c.transform = Transform::Fc;
      c.strategy = Strategy::LosslessForwarding;
      break;
    case Variant::LstmFcCnnAS:
      c.transform = Transform::Fc;
      c.strategy = Strategy::AdaptiveScaling;
      break;
    case Variant::LstmAttCnn:
      c.transform = Transform::Attention;
      c.strategy = Strategy::None;
      c.layers = 1;
      break;
    case Variant::WoTransformation:
      c.transform = Transform::Identity;
      c.strategy = Strategy::None;
      c.layers = 1;
      break;
    case Variant::WoContext:
      c.transform = Transform::Tst;
      c.strategy = Strategy::None;
      break;
    case Variant::WoPositionLF:
      c.transform = Transform::Tst;
      c.strategy = Strategy::LosslessForwarding;
      base.use_position = false;
      break;
    case Variant::WoPositionAS:
      c.transform = Transform::Tst;
      c.strategy = Strategy::AdaptiveScaling;
      base.use_position = false;
      break;
  }
  return base;
}

ParamStore parameter_layout(const ModelConfig& config) {
  config.validate();
  std::mt19937_64 rng(0);
  return fresh_parameters(config, rng);
}

TNet::TNet(ModelConfig config, ParamStore params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const auto layout = parameter_layout(config_);
  for (const auto& [name, expected] : layout) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("model: missing parameter '" + name + "'");
    if (it->second.shape() != expected.shape()) {
      throw DimensionError("model: parameter '" + name + "' has shape " + shape_str(it->second.shape()) +
                           ", expected " + shape_str(expected.shape()));
    }
  }
  if (params_.size() != layout.size()) throw ConfigError("model: unexpected extra parameters");
}

TNet TNet::initialize(const ModelConfig& config, const Tensor& embeddings, std::uint64_t seed) {
  config.validate();
  if (embeddings.rank() != 2 || embeddings.rows() != config.vocab_size || embeddings.cols() != config.dim_w) {
    throw DimensionError("model: embedding matrix " + shape_str(embeddings.shape()) + " does not match [" +
                         std::to_string(config.vocab_size) + "x" + std::to_string(config.dim_w) + "]");
  }
  std::mt19937_64 rng(seed);
  auto params = fresh_parameters(config, rng);
  auto& table = params.at(std::string(kEmbedding));
  table = embeddings;
  for (double& v : table.row(data::Vocabulary::kPadId)) v = 0.0;
  return TNet(config, std::move(params));
}

head::PositionWeights TNet::position_weights(const data::Instance& instance) const {
  const auto k = instance.target_start, m = instance.target_len(), n = instance.length;
  const auto padded = instance.padded_len();
  return config_.use_position ? head::position_relevance(k, m, n, padded, config_.position_C)
                              : head::padding_mask(k, m, n, padded);
}

ForwardResult TNet::forward(const ParamVars& vars, const data::Instance& instance,
                            const ForwardOptions& options) const {
  if (instance.tokens.empty() || instance.target.empty()) {
    throw ContractError("forward: empty sentence or target");
  }
  const bool dropout = options.mode == train::Mode::Train &&
                       (options.embedding_dropout > 0.0 || options.sentence_dropout > 0.0);
  if (dropout && !options.rng) throw ContractError("forward: training-mode dropout needs an rng");
  auto drop = [&](ag::Var x, double rate) {
    return dropout ? train::apply_dropout(x, rate, options.mode, *options.rng) : x;
  };

  const auto weights = position_weights(instance);
  const auto& table = vars.at(std::string(kEmbedding));
  auto x = drop(ag::gather_rows(table, instance.tokens), options.embedding_dropout);
  auto x_tau = drop(ag::gather_rows(table, instance.target), options.embedding_dropout);

  auto h0 = enc::encode_sentence(x, enc::bilstm_params(vars, kSentLstm));
  auto h_tau = enc::encode_target(x_tau, enc::bilstm_params(vars, target_prefix(config_)));

  auto h = cpt::cpt_stack(h0, h_tau, config_.cpt, cpt::cpt_params(vars, config_.cpt), weights);
  if (config_.scale_final_extra || !config_.cpt.apply_position_per_layer) h = head::apply_position(h, weights);

  auto maps = head::convolve(h, {vars.at("conv.W"), vars.at("conv.b"), config_.kernel_size});
  auto pooled = head::max_pool(maps);
  auto z = drop(pooled.z, options.sentence_dropout);
  const head::ClassifierParams clf{vars.at("clf.W"), vars.at("clf.b")};
  auto logits = head::classifier_logits(z, clf);
  return {logits, ag::softmax(logits), std::move(pooled.window)};
}

ag::Var TNet::batch_loss(const ParamVars& vars, std::span<const data::Instance> batch,
                         const ForwardOptions& options) const {
  if (batch.empty()) throw ContractError("batch_loss: empty batch");
  std::vector<ag::Var> losses;
  losses.reserve(batch.size());
  for (const auto& inst : batch) {
    auto out = forward(vars, inst, options);
    losses.push_back(ag::cross_entropy(out.logits, index_of(inst.label)));
  }
  return ag::scale(ag::add_n(losses), 1.0 / static_cast<double>(batch.size()));
}

Prediction TNet::predict(const data::Instance& instance) const {
  ag::Graph graph;
  ParamVars vars;
  for (const auto& [name, tensor] : params_) vars.emplace(name, graph.reference(tensor));
  auto out = forward(vars, instance);
  Prediction p;
  const auto& probs = out.probabilities.value();
  for (std::size_t c = 0; c < kNumLabels; ++c) p.probabilities[c] = probs[c];
  p.label = head::predicted_label(probs.data());
  p.windows = std::move(out.windows);
  return p;
}

std::vector<Prediction> TNet::predict(std::span<const data::Instance> instances) const {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(predict(inst));
  return out;
}

double TNet::loss(std::span<const data::Instance> batch) const {
  ag::Graph graph;
  ParamVars vars;
  for (const auto& [name, tensor] : params_) vars.emplace(name, graph.reference(tensor));
  return batch_loss(vars, batch).value()[0];
}

}  // namespace tnet
