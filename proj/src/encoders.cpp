#include "tnet/encoders.hpp"

#include <vector>

#include "tnet/error.hpp"

namespace tnet::enc {

namespace {

std::size_t hidden_dim(const LstmParams& p) { return p.recurrent_weights.value().cols(); }

void check_params(const LstmParams& p) {
  const auto& wih = p.input_weights.value();
  const auto& whh = p.recurrent_weights.value();
  const auto h = whh.cols();
  if (wih.rank() != 2 || whh.rank() != 2 || wih.rows() != 4 * h || whh.rows() != 4 * h ||
      p.bias.value().size() != 4 * h) {
    throw DimensionError("lstm: inconsistent parameter shapes W_ih " + shape_str(wih.shape()) +
                         ", W_hh " + shape_str(whh.shape()) + ", b " + shape_str(p.bias.value().shape()));
  }
}

// Gate arithmetic given the input projection W_ih x + b for this step.
LstmState cell(ag::Var projected, ag::Var h_prev, ag::Var c_prev, const LstmParams& p) {
  const auto h = hidden_dim(p);
  if (h_prev.value().size() != h || c_prev.value().size() != h) {
    throw DimensionError("lstm_step: state of size " + std::to_string(h_prev.value().size()) +
                         "/" + std::to_string(c_prev.value().size()) + ", expected " + std::to_string(h));
  }
  auto z = ag::add(projected, ag::linear(h_prev, p.recurrent_weights));
  auto in_gate = ag::sigmoid(ag::slice_cols(z, 0, h));
  auto forget_gate = ag::sigmoid(ag::slice_cols(z, h, h));
  auto candidate = ag::tanh(ag::slice_cols(z, 2 * h, h));
  auto out_gate = ag::sigmoid(ag::slice_cols(z, 3 * h, h));
  auto c = ag::add(ag::mul(in_gate, candidate), ag::mul(forget_gate, c_prev));
  auto h_next = ag::mul(ag::tanh(c), out_gate);
  return {h_next, c};
}

std::vector<ag::Var> run_direction(ag::Var x, const LstmParams& p, bool reverse) {
  check_params(p);
  auto& g = x.graph();
  const auto n = x.value().rows();
  const auto h = hidden_dim(p);
  auto projected = ag::linear(x, p.input_weights, p.bias);
  LstmState state{g.constant(Tensor({h})), g.constant(Tensor({h}))};
  std::vector<ag::Var> out(n);
  for (std::size_t step = 0; step < n; ++step) {
    const auto t = reverse ? n - 1 - step : step;
    state = cell(ag::row(projected, t), state.h, state.c, p);
    out[t] = state.h;
  }
  return out;
}

}  // namespace

LstmState lstm_step(ag::Var x_t, ag::Var h_prev, ag::Var c_prev, const LstmParams& params) {
  check_params(params);
  if (x_t.value().size() != params.input_weights.value().cols()) {
    throw DimensionError("lstm_step: input of size " + std::to_string(x_t.value().size()) +
                         ", expected " + std::to_string(params.input_weights.value().cols()));
  }
  return cell(ag::linear(x_t, params.input_weights, params.bias), h_prev, c_prev, params);
}

ag::Var encode_bidirectional(ag::Var x, const BiLstmParams& params) {
  const auto& xv = x.value();
  if (xv.rank() != 2) {
    throw DimensionError("encode: expected a [n x dim_w] sequence, got " + shape_str(xv.shape()));
  }
  if (hidden_dim(params.forward) != hidden_dim(params.backward)) {
    throw DimensionError("encode: forward and backward directions differ in dim_h");
  }
  auto fwd = run_direction(x, params.forward, false);
  auto bwd = run_direction(x, params.backward, true);
  return ag::concat_cols(ag::stack_rows(fwd), ag::stack_rows(bwd));
}

void init_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim,
               std::size_t dim_h, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-range, range);
  Tensor wih({4 * dim_h, input_dim});
  for (double& v : wih.data()) v = uniform(rng);
  Tensor whh({4 * dim_h, dim_h});
  for (double& v : whh.data()) v = uniform(rng);
  store[prefix + ".W_ih"] = std::move(wih);
  store[prefix + ".W_hh"] = std::move(whh);
  store[prefix + ".b"] = Tensor({4 * dim_h});
}

void init_bilstm(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                 std::size_t dim_h, double range, std::mt19937_64& rng) {
  init_lstm(store, prefix + ".fwd", input_dim, dim_h, range, rng);
  init_lstm(store, prefix + ".bwd", input_dim, dim_h, range, rng);
}

LstmParams lstm_params(const ParamVars& vars, const std::string& prefix) {
  return {vars.at(prefix + ".W_ih"), vars.at(prefix + ".W_hh"), vars.at(prefix + ".b")};
}

BiLstmParams bilstm_params(const ParamVars& vars, const std::string& prefix) {
  return {lstm_params(vars, prefix + ".fwd"), lstm_params(vars, prefix + ".bwd")};
}

}  // namespace tnet::enc
