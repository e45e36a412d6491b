// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "synthetic.hpp"
#include "tnet/checkpoint.hpp"
#include "tnet/cpt.hpp"
#include "tnet/diagnostics.hpp"
#include "tnet/head.hpp"
#include "tnet/metrics.hpp"
#include "tnet/report.hpp"
#include "tnet/trainer.hpp"

using namespace tnet;
using support::random_tensor;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kAttentionTolerance = 1e-9;
constexpr double kLfTolerance = 1e-12;
constexpr double kAsTolerance = 1e-10;
constexpr double kSingleWordTolerance = 1e-12;
constexpr double kMacroF1Tolerance = 1e-12;
constexpr double kTTestTolerance = 1e-9;
constexpr double kOverfitSeconds = 300.0;
constexpr std::size_t kOverfitEpochs = 200;
constexpr std::size_t kOverfitSeeds = 10;
constexpr std::size_t kOverfitRequired = 9;

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void check(const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s  %-28s %s [%.1f s]\n", out.passed ? "PASS" : "FAIL", name, out.detail.c_str(), seconds);
  std::fflush(stdout);
  failures += !out.passed;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Plain-loop reference for one transformation layer, independent of the graph code.
using Matrix = std::vector<std::vector<double>>;

Matrix to_matrix(const Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  }
  return m;
}

std::vector<double> affine(const Tensor& w, const Tensor& b, const std::vector<double>& x) {
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) acc += w.at(r, c) * x[c];
    out[r] = acc + b[r];
  }
  return out;
}

Matrix reference_tst(const Matrix& h, const Matrix& target, const Tensor& w, const Tensor& b) {
  Matrix out;
  for (const auto& row : h) {
    std::vector<double> scores;
    for (const auto& t : target) {
      double dot = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) dot += row[j] * t[j];
      scores.push_back(dot);
    }
    double total = 0.0;
    for (double s : scores) total += std::exp(s);
    std::vector<double> joined = row;
    for (std::size_t j = 0; j < row.size(); ++j) {
      double r = 0.0;
      for (std::size_t k = 0; k < target.size(); ++k) r += std::exp(scores[k]) / total * target[k][j];
      joined.push_back(r);
    }
    auto z = affine(w, b, joined);
    for (double& v : z) v = std::tanh(v);
    out.push_back(z);
  }
  return out;
}

Matrix reference_gate(const Matrix& h, const Tensor& w, const Tensor& b) {
  Matrix out;
  for (const auto& row : h) {
    auto z = affine(w, b, row);
    for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
    out.push_back(z);
  }
  return out;
}

double max_diff(const Matrix& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b.at(i, j)));
  }
  return worst;
}

struct UnfoldCase {
  Tensor h0, h_tau;
  ParamStore params;
  cpt::CptConfig config;
  head::PositionWeights weights;
};

UnfoldCase unfold_case(cpt::Strategy strategy, std::size_t layers, std::uint64_t seed) {
  constexpr std::size_t width = 6;
  std::mt19937_64 rng(seed);
  UnfoldCase c;
  c.h0 = random_tensor({5, width}, rng);
  c.h_tau = random_tensor({2, width}, rng);
  c.config.layers = layers;
  c.config.strategy = strategy;
  c.config.apply_position_per_layer = false;
  cpt::init_cpt(c.params, c.config, width, 0.5, rng);
  for (auto& [name, t] : c.params) {
    for (double& v : t.data()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  }
  c.weights.v.assign(5, 1.0);
  c.weights.length = 5;
  return c;
}

Outcome gradient_oracle() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string failed;
  for (auto v : all_variants()) {
    auto setup = diag::tiny_setup(v, {}, 1);
    auto r = diag::model_gradcheck(setup.model, setup.instances, kGradTolerance);
    worst = std::max(worst, r.max_relative_error);
    if (!r.passed) failed += std::string(" ") + std::string(variant_name(v));
  }
  const double elapsed = seconds_since(start);
  return {failed.empty() && elapsed < kGradSeconds,
          fmt("9 variants, max rel err %.2e (< %.0e), %.1f s (< 60 s)", worst, kGradTolerance, elapsed) +
              (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome attention_normalization() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  bool positive = true;
  for (int draw = 0; draw < 1000; ++draw) {
    std::uniform_int_distribution<std::size_t> len(1, 6);
    const auto m = len(rng);
    ag::Graph g;
    auto w = cpt::target_attention(g.constant(random_tensor({4}, rng, -3, 3)),
                                   g.constant(random_tensor({m, 4}, rng, -3, 3)))
                 .value();
    double total = 0.0;
    for (double x : w.data()) {
      total += x;
      positive = positive && x > 0.0;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {positive && worst <= kAttentionTolerance,
          fmt("1000 draws, max |sum-1| %.1e (<= %.0e), all positive", worst, kAttentionTolerance)};
}

Outcome lf_unfolding() {
  double worst = 0.0;
  for (std::size_t layers = 1; layers <= 3; ++layers) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto c = unfold_case(cpt::Strategy::LosslessForwarding, layers, seed);
      ag::Graph g;
      auto vars = bind_parameters(g, c.params);
      auto out = cpt::cpt_stack(g.constant(c.h0), g.constant(c.h_tau), c.config, cpt::cpt_params(vars, c.config),
                                c.weights)
                     .value();
      const auto target = to_matrix(c.h_tau);
      const auto& w = c.params.at("cpt.tst.W");
      const auto& b = c.params.at("cpt.tst.b");
      std::vector<Matrix> inputs{to_matrix(c.h0)};
      std::vector<Matrix> transformed;
      for (std::size_t l = 0; l < layers; ++l) {
        transformed.push_back(reference_tst(inputs.back(), target, w, b));
        Matrix next = inputs.back();
        for (std::size_t i = 0; i < next.size(); ++i) {
          for (std::size_t j = 0; j < next[i].size(); ++j) next[i][j] += transformed.back()[i][j];
        }
        inputs.push_back(next);
      }
      // h0 + TST(h0) + ... + TST(h^(L-1)).
      Matrix unfolded = inputs.front();
      for (const auto& t : transformed) {
        for (std::size_t i = 0; i < unfolded.size(); ++i) {
          for (std::size_t j = 0; j < unfolded[i].size(); ++j) unfolded[i][j] += t[i][j];
        }
      }
      worst = std::max(worst, max_diff(unfolded, out));
    }
  }
  return {worst <= kLfTolerance,
          fmt("L=1..3 x 20 draws, max |diff| %.1e (<= %.0e), per-layer position off", worst, kLfTolerance)};
}

Outcome as_unfolding() {
  double worst = 0.0;
  bool gates_open = true;
  bool between = true;
  for (std::size_t layers = 1; layers <= 3; ++layers) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto c = unfold_case(cpt::Strategy::AdaptiveScaling, layers, 100 + seed);
      ag::Graph g;
      auto vars = bind_parameters(g, c.params);
      cpt::CptTrace trace;
      auto out = cpt::cpt_stack(g.constant(c.h0), g.constant(c.h_tau), c.config, cpt::cpt_params(vars, c.config),
                                c.weights, &trace)
                     .value();
      const auto target = to_matrix(c.h_tau);
      std::vector<Matrix> inputs{to_matrix(c.h0)}, transformed, gates;
      for (std::size_t l = 0; l < layers; ++l) {
        transformed.push_back(reference_tst(inputs.back(), target, c.params.at("cpt.tst.W"), c.params.at("cpt.tst.b")));
        gates.push_back(reference_gate(inputs.back(), c.params.at("cpt.gate.W"), c.params.at("cpt.gate.b")));
        Matrix next = inputs.back();
        for (std::size_t i = 0; i < next.size(); ++i) {
          for (std::size_t j = 0; j < next[i].size(); ++j) {
            const double t = gates.back()[i][j];
            next[i][j] = t * transformed.back()[i][j] + (1.0 - t) * inputs.back()[i][j];
          }
        }
        inputs.push_back(next);
      }
      // [prod_k (1 - t_k)] h0 + sum_l [t_l prod_{k>l} (1 - t_k)] TST(h_l).
      Matrix unfolded = inputs.front();
      for (std::size_t i = 0; i < unfolded.size(); ++i) {
        for (std::size_t j = 0; j < unfolded[i].size(); ++j) {
          double keep = 1.0;
          for (std::size_t k = 0; k < layers; ++k) keep *= 1.0 - gates[k][i][j];
          double acc = keep * inputs.front()[i][j];
          for (std::size_t l = 0; l < layers; ++l) {
            double coeff = gates[l][i][j];
            for (std::size_t k = l + 1; k < layers; ++k) coeff *= 1.0 - gates[k][i][j];
            acc += coeff * transformed[l][i][j];
          }
          unfolded[i][j] = acc;
        }
      }
      worst = std::max(worst, max_diff(unfolded, out));

      for (std::size_t l = 0; l < layers; ++l) {
        const auto& t = trace.gates[l].value();
        const auto& in = trace.inputs[l].value();
        const auto& tr = trace.transformed[l].value();
        const auto& next = l + 1 < layers ? trace.inputs[l + 1].value() : out;
        for (std::size_t k = 0; k < t.size(); ++k) {
          gates_open = gates_open && t[k] > 0.0 && t[k] < 1.0;
          between = between && next[k] >= std::min(in[k], tr[k]) && next[k] <= std::max(in[k], tr[k]);
        }
      }
    }
  }
  return {worst <= kAsTolerance && gates_open && between,
          fmt("L=1..3 x 20 draws, max |diff| %.1e (<= %.0e)", worst, kAsTolerance) +
              (gates_open ? ", gates in (0,1)" : ", GATE OUTSIDE (0,1)") +
              (between ? ", outputs between inputs" : ", OUTPUT OUTSIDE INPUTS")};
}

Outcome single_word_equivalence() {
  double worst = 0.0;
  std::size_t draws = 0;
  for (auto [tst_variant, fc_variant] :
       {std::pair{Variant::TNetLF, Variant::LstmFcCnnLF}, std::pair{Variant::TNetAS, Variant::LstmFcCnnAS}}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      diag::TinyConfig tiny;
      tiny.target_len = 1;
      tiny.examples = 1;
      auto setup = diag::tiny_setup(tst_variant, tiny, 500 + seed);
      auto fc_config = configure_variant(setup.model.config(), fc_variant);
      TNet fc(fc_config, setup.model.params());
      const auto& inst = setup.instances.front();
      ag::Graph g;
      ParamVars a, b;
      for (const auto& [name, t] : setup.model.params()) a.emplace(name, g.reference(t));
      for (const auto& [name, t] : fc.params()) b.emplace(name, g.reference(t));
      const auto la = setup.model.forward(a, inst).logits.value();
      const auto lb = fc.forward(b, inst).logits.value();
      for (std::size_t k = 0; k < la.size(); ++k) worst = std::max(worst, std::abs(la[k] - lb[k]));
      ++draws;
    }
  }
  return {worst <= kSingleWordTolerance,
          fmt("LF and AS x 100 inputs each, max |logit diff| %.1e (<= %.0e)", worst, kSingleWordTolerance)};
}

Outcome position_formula() {
  struct Case {
    std::size_t k, m, n;
    double C;
    std::size_t i;
    double expected;
  };
  // Hand evaluation of the three cases; negative values clamp to 0.
  const Case cases[] = {
      {3, 2, 6, 40.0, 2, 1.0 - 3.0 / 40.0},   // i < k+m
      {3, 2, 6, 40.0, 5, 1.0 - 2.0 / 40.0},   // i = k+m
      {3, 2, 6, 40.0, 8, 0.0},                // i > n
      {3, 2, 6, 40.0, 6, 1.0 - 3.0 / 40.0},   // i = n
      {3, 2, 6, 40.0, 3, 1.0 - 2.0 / 40.0},   // first target word
      {3, 2, 6, 40.0, 4, 1.0 - 1.0 / 40.0},   // last target word
      {1, 1, 1, 40.0, 1, 1.0 - 1.0 / 40.0},   // one-word sentence
      {1, 1, 4, 30.0, 4, 1.0 - 3.0 / 30.0},   // i = n, C = 30
      {5, 3, 10, 30.0, 1, 1.0 - 7.0 / 30.0},  // sentence start
      {2, 1, 50, 40.0, 50, 0.0},              // i = n, raw -0.2 clamps
      {2, 1, 50, 40.0, 51, 0.0},              // first padding position
      {10, 2, 12, 5.0, 1, 0.0},               // raw -1.2 clamps
  };
  std::size_t agree = 0;
  bool in_range = true;
  for (const auto& c : cases) {
    auto w = head::position_relevance(c.k, c.m, c.n, std::max(c.n, c.i) + 1, c.C);
    agree += w.v[c.i - 1] == c.expected;
    for (double v : w.v) in_range = in_range && v >= 0.0 && v <= 1.0;
  }
  return {agree == 12 && in_range,
          std::to_string(agree) + "/12 cases exact" + (in_range ? ", all in [0,1]" : ", VALUE OUTSIDE [0,1]")};
}

Outcome parameter_sharing() {
  std::string detail;
  bool ok = true;
  for (auto v : {Variant::TNetLF, Variant::TNetAS}) {
    auto h = train::Hyperparams::defaults(v, train::DatasetName::Laptop);
    h.layers = 1;
    const auto one = count_parameters(parameter_layout(h.model_config(1000)));
    h.layers = 5;
    const auto five = count_parameters(parameter_layout(h.model_config(1000)));
    ok = ok && one == five;
    detail += std::string(variant_name(v)) + " L=1 " + std::to_string(one) + " vs L=5 " + std::to_string(five) + "; ";
  }
  return {ok, detail};
}

Outcome overfit() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (auto v : {Variant::TNetLF, Variant::TNetAS}) {
    std::size_t reached = 0;
    std::size_t slowest = 0;
    for (std::uint64_t seed = 1; seed <= kOverfitSeeds; ++seed) {
      auto corpus = support::synthetic_corpus(seed);
      auto h = train::Hyperparams::defaults(v, train::DatasetName::Laptop);
      h.dim_w = 8;
      h.dim_h = 10;
      h.num_kernels = 20;
      h.batch_size = 8;
      h.epochs = kOverfitEpochs;
      h.learning_rate = 0.01;
      h.C = 20.0;
      h.seed = seed;
      auto model = TNet::initialize(h.model_config(corpus.vocab.size()), corpus.embeddings, seed);
      std::size_t epoch_hit = 0;
      train::TrainOptions options;
      options.on_epoch = [&](const train::EpochStats& s) {
        if (s.train_accuracy == 1.0) epoch_hit = s.epoch;
        return epoch_hit == 0;
      };
      train::train(model, corpus.instances(), {}, h, options);
      reached += epoch_hit > 0;
      slowest = std::max(slowest, epoch_hit);
    }
    ok = ok && reached >= kOverfitRequired;
    detail += std::string(variant_name(v)) + " " + std::to_string(reached) + "/10 (latest epoch " +
              std::to_string(slowest) + "); ";
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < kOverfitSeconds;
  return {ok, detail + fmt("need >= 9/10 within 200 epochs and < 300 s, took %.0f s", elapsed)};
}

Outcome metrics_oracle() {
  using L = Label;
  const std::vector<Label> golds{L::Positive, L::Positive, L::Positive, L::Negative, L::Neutral};
  const std::vector<Label> preds{L::Positive, L::Positive, L::Neutral, L::Negative, L::Positive};
  const double f1 = metrics::macro_f1(preds, golds);
  const std::vector<double> a{1.5, 1.7, 1.6}, b{1.0, 1.0, 1.0};
  const auto t = metrics::paired_t_test(a, b);
  // mean 0.6, sd 0.1, n 3.
  const double expected_t = 0.6 / (0.1 / std::sqrt(3.0));
  const double f1_err = std::abs(f1 - 5.0 / 9.0);
  const double t_err = std::abs(t.t - expected_t);
  return {f1_err <= kMacroF1Tolerance && t_err <= kTTestTolerance,
          fmt("|macroF1 - 5/9| %.1e (<= 1e-12), |t - 10.3923| %.1e (<= 1e-9), p %.6f", f1_err, t_err, t.p)};
}

Outcome determinism() {
  auto corpus = support::synthetic_corpus(11);
  auto h = train::Hyperparams::defaults(Variant::TNetAS, train::DatasetName::Laptop);
  h.dim_w = 8;
  h.dim_h = 6;
  h.num_kernels = 8;
  h.batch_size = 8;
  h.epochs = 5;
  h.seed = 42;
  auto run = [&] {
    auto [train_part, held] = train::heldout_split<data::Instance>(corpus.instances(), 0.2, h.seed);
    auto model = TNet::initialize(h.model_config(corpus.vocab.size()), corpus.embeddings, h.seed);
    auto result = train::train(model, train_part, held, h);
    return std::pair{serialize_checkpoint({h, corpus.vocab, result.model.params(), corpus.pad_len}),
                     report::to_json(result.history).dump()};
  };
  auto first = run();
  auto second = run();
  const bool same_ckpt = first.first == second.first;
  const bool same_hist = first.second == second.second;
  return {same_ckpt && same_hist, std::string("checkpoints ") + (same_ckpt ? "identical" : "DIFFER") +
                                      ", histories " + (same_hist ? "identical" : "DIFFER") + " (" +
                                      std::to_string(first.first.size()) + " bytes)"};
}

}  // namespace

int main() {
  check("gradient-oracle", gradient_oracle);
  check("attention-normalization", attention_normalization);
  check("lf-unfolding", lf_unfolding);
  check("as-unfolding", as_unfolding);
  check("single-word-equivalence", single_word_equivalence);
  check("position-formula", position_formula);
  check("parameter-sharing", parameter_sharing);
  check("overfit", overfit);
  check("metrics-oracle", metrics_oracle);
  check("determinism", determinism);
  std::printf("SKIP  %-28s optional long run on external data; see README\n", "table-reproduction");
  std::printf("%s\n", failures == 0 ? "ALL PASS" : (std::to_string(failures) + " FAILED").c_str());
  return failures == 0 ? 0 : 1;
}
