#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "tnet/autograd.hpp"
#include "tnet/params.hpp"

namespace tnet::enc {

/// One LSTM direction. Gate blocks are stacked in the order
/// (input, forget, candidate, output) along the 4*dim_h axis.
struct LstmParams {
  ag::Var input_weights;      // [4*dim_h x input_dim]
  ag::Var recurrent_weights;  // [4*dim_h x dim_h]
  ag::Var bias;               // [4*dim_h]
};

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;
};

struct LstmState {
  ag::Var h;
  ag::Var c;
};

/// i,f,o = sigmoid, candidate = tanh; c_t = i*cand + f*c_prev; h_t = tanh(c_t)*o.
LstmState lstm_step(ag::Var x_t, ag::Var h_prev, ag::Var c_prev, const LstmParams& params);

/// Runs both directions over x[n x input_dim] from zero initial states and
/// returns [n x 2*dim_h], row i = [forward state at i ; backward state at i].
ag::Var encode_bidirectional(ag::Var x, const BiLstmParams& params);

inline ag::Var encode_sentence(ag::Var x, const BiLstmParams& params) {
  return encode_bidirectional(x, params);
}
inline ag::Var encode_target(ag::Var x_tau, const BiLstmParams& params) {
  return encode_bidirectional(x_tau, params);
}

/// Adds `<prefix>.W_ih`, `<prefix>.W_hh` (uniform in [-range, range]) and a zero `<prefix>.b`.
void init_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim,
               std::size_t dim_h, double range, std::mt19937_64& rng);
/// Forward direction under `<prefix>.fwd`, backward under `<prefix>.bwd`.
void init_bilstm(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                 std::size_t dim_h, double range, std::mt19937_64& rng);

LstmParams lstm_params(const ParamVars& vars, const std::string& prefix);
BiLstmParams bilstm_params(const ParamVars& vars, const std::string& prefix);

}  // namespace tnet::enc
