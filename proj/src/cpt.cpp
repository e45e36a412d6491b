#include "tnet/cpt.hpp"

#include "tnet/error.hpp"

namespace tnet::cpt {

namespace {

bool needs_tst(Transform t) { return t == Transform::Tst || t == Transform::Fc; }

std::string layer_prefix(const CptConfig& config, std::size_t l) {
  return config.per_layer_params ? "cpt.l" + std::to_string(l) : std::string("cpt");
}

}  // namespace

void CptConfig::validate() const {
  if (layers < 1) throw ConfigError("cpt: layer count must be at least 1");
  if (transform == Transform::Attention && strategy != Strategy::None) {
    throw ConfigError("cpt: attention alternative takes no context-preserving strategy");
  }
}

ag::Var target_attention(ag::Var h, ag::Var h_tau) {
  // linear(h, h_tau) computes h_i . h_tau_j for every (i, j).
  return ag::softmax(ag::linear(h, h_tau));
}

ag::Var tailor_target(ag::Var h, ag::Var h_tau) {
  if (h_tau.value().rank() != 2) {
    throw DimensionError("tailor_target: h_tau must be [m x d], got " + shape_str(h_tau.value().shape()));
  }
  return ag::linear(target_attention(h, h_tau), ag::transpose(h_tau));
}

ag::Var tst(ag::Var h, ag::Var h_tau, const TstParams& params) {
  return ag::tanh(ag::linear(ag::concat_cols(h, tailor_target(h, h_tau)), params.weights, params.bias));
}

ag::Var fc_transform(ag::Var h, ag::Var h_tau_mean, const TstParams& params) {
  auto target = h.value().rank() == 2 ? ag::repeat_row(h_tau_mean, h.value().rows()) : h_tau_mean;
  return ag::tanh(ag::linear(ag::concat_cols(h, target), params.weights, params.bias));
}

ag::Var lossless_forward(ag::Var h, ag::Var h_tilde) { return ag::add(h, h_tilde); }

ag::Var scaling_gate(ag::Var h, const GateParams& params) {
  return ag::sigmoid(ag::linear(h, params.weights, params.bias));
}

ag::Var adaptive_scale(ag::Var h, ag::Var h_tilde, const GateParams& params) {
  auto t = scaling_gate(h, params);
  return ag::add(ag::mul(t, h_tilde), ag::mul(ag::one_minus(t), h));
}

ag::Var attention_reweight(ag::Var h, ag::Var h_tau, std::size_t length) {
  auto& g = h.graph();
  const auto& hv = h.value();
  const auto rows = hv.rows(), d = hv.cols();
  if (hv.rank() != 2 || length < 1 || length > rows) {
    throw DimensionError("attention_reweight: length " + std::to_string(length) + " for " + shape_str(hv.shape()));
  }
  const ag::Var query_row[] = {ag::mean_rows(h_tau)};
  auto scores = ag::transpose(ag::linear(h, ag::stack_rows(query_row)));  // [1 x P]
  Tensor mask({1, rows});
  for (std::size_t i = length; i < rows; ++i) mask[i] = -1e30;
  auto alpha = ag::scale(ag::softmax(ag::add_const(scores, mask)), static_cast<double>(length));
  auto spread = ag::matmul(ag::transpose(alpha), g.constant(Tensor({1, d}, 1.0)));  // [P x d]
  return ag::mul(h, spread);
}

ag::Var cpt_stack(ag::Var h0, ag::Var h_tau, const CptConfig& config, const CptParams& params,
                  const head::PositionWeights& weights, CptTrace* trace) {
  config.validate();
  if (weights.v.size() != h0.value().rows()) {
    throw DimensionError("cpt_stack: " + std::to_string(weights.v.size()) + " position weights for " +
                         shape_str(h0.value().shape()));
  }
  ag::Var mean_target;
  if (config.transform == Transform::Fc) mean_target = ag::mean_rows(h_tau);

  auto h = h0;
  const bool has_params = needs_tst(config.transform) || config.strategy == Strategy::AdaptiveScaling;
  if (has_params && params.layers.empty()) throw ContractError("cpt_stack: missing layer parameters");
  const LayerParams none;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto& p = has_params ? params.layer(l) : none;
    ag::Var transformed;
    switch (config.transform) {
      case Transform::Tst: transformed = tst(h, h_tau, p.tst); break;
      case Transform::Fc: transformed = fc_transform(h, mean_target, p.tst); break;
      case Transform::Attention: transformed = attention_reweight(h, h_tau, weights.length); break;
      case Transform::Identity: transformed = h; break;
    }
    if (trace) {
      trace->inputs.push_back(h);
      trace->transformed.push_back(transformed);
    }
    switch (config.strategy) {
      case Strategy::LosslessForwarding: h = lossless_forward(h, transformed); break;
      case Strategy::AdaptiveScaling: {
        auto t = scaling_gate(h, p.gate);
        if (trace) trace->gates.push_back(t);
        h = ag::add(ag::mul(t, transformed), ag::mul(ag::one_minus(t), h));
        break;
      }
      case Strategy::None: h = transformed; break;
    }
    if (config.apply_position_per_layer) h = head::apply_position(h, weights);
  }
  return h;
}

void init_cpt(ParamStore& store, const CptConfig& config, std::size_t width, double range,
              std::mt19937_64& rng) {
  config.validate();
  std::uniform_real_distribution<double> uniform(-range, range);
  const auto sets = config.per_layer_params ? config.layers : std::size_t{1};
  for (std::size_t l = 0; l < sets; ++l) {
    const auto prefix = layer_prefix(config, l);
    if (needs_tst(config.transform)) {
      Tensor w({width, 2 * width});
      for (double& v : w.data()) v = uniform(rng);
      store[prefix + ".tst.W"] = std::move(w);
      store[prefix + ".tst.b"] = Tensor({width});
    }
    if (config.strategy == Strategy::AdaptiveScaling) {
      Tensor w({width, width});
      for (double& v : w.data()) v = uniform(rng);
      store[prefix + ".gate.W"] = std::move(w);
      store[prefix + ".gate.b"] = Tensor({width});
    }
  }
}

CptParams cpt_params(const ParamVars& vars, const CptConfig& config) {
  CptParams out;
  const auto sets = config.per_layer_params ? config.layers : std::size_t{1};
  for (std::size_t l = 0; l < sets; ++l) {
    const auto prefix = layer_prefix(config, l);
    LayerParams layer;
    if (needs_tst(config.transform)) {
      layer.tst = {vars.at(prefix + ".tst.W"), vars.at(prefix + ".tst.b")};
    }
    if (config.strategy == Strategy::AdaptiveScaling) {
      layer.gate = {vars.at(prefix + ".gate.W"), vars.at(prefix + ".gate.b")};
    }
    out.layers.push_back(layer);
  }
  return out;
}

}  // namespace tnet::cpt
