#include "tnet/diagnostics.hpp"

#include <random>

#include "tnet/embeddings.hpp"
#include "tnet/params.hpp"

namespace tnet::diag {

GradCheckSetup tiny_setup(Variant variant, const TinyConfig& tiny, std::uint64_t seed) {
  ModelConfig base;
  base.vocab_size = tiny.vocab_size;
  base.dim_w = tiny.dim_w;
  base.dim_h = tiny.dim_h;
  base.kernel_size = tiny.kernel_size;
  base.num_kernels = tiny.num_kernels;
  base.cpt.layers = tiny.layers;
  base.init_range = tiny.init_range;
  const auto config = configure_variant(base, variant);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-tiny.init_range, tiny.init_range);
  Tensor embeddings({tiny.vocab_size, tiny.dim_w});
  for (double& v : embeddings.data()) v = uniform(rng);
  auto model = TNet::initialize(config, embeddings, seed);
  for (auto& [name, tensor] : model.params()) {
    if (name == TNet::kEmbedding) continue;
    for (double& v : tensor.data()) v = uniform(rng);
  }

  std::uniform_int_distribution<std::size_t> token(data::Vocabulary::kUnkId, tiny.vocab_size - 1);
  std::uniform_int_distribution<std::size_t> start(1, tiny.length - tiny.target_len + 1);
  std::uniform_int_distribution<int> label(0, kNumLabels - 1);
  std::vector<data::Instance> instances;
  for (std::size_t e = 0; e < tiny.examples; ++e) {
    data::Instance inst;
    inst.length = tiny.length;
    inst.tokens.assign(tiny.padded_len, data::Vocabulary::kPadId);
    for (std::size_t i = 0; i < tiny.length; ++i) inst.tokens[i] = token(rng);
    inst.target_start = start(rng);
    inst.target.assign(inst.tokens.begin() + static_cast<std::ptrdiff_t>(inst.target_start - 1),
                       inst.tokens.begin() + static_cast<std::ptrdiff_t>(inst.target_start - 1 + tiny.target_len));
    inst.label = kAllLabels[static_cast<std::size_t>(label(rng))];
    instances.push_back(std::move(inst));
  }
  return {std::move(model), std::move(instances)};
}

ag::GradCheckReport model_gradcheck(const TNet& model, std::span<const data::Instance> instances,
                                    double tolerance, double epsilon, std::optional<Fault> fault) {
  ag::GradientMap analytic;
  {
    ag::Graph graph;
    if (fault) graph.inject_fault(fault->op, fault->factor);
    auto vars = bind_parameters(graph, model.params());
    auto loss = model.batch_loss(vars, instances);
    graph.backward(loss);
    analytic = graph.parameter_gradients();
  }
  TNet probe = model;
  auto numeric = ag::finite_difference_gradient([&] { return probe.loss(instances); }, probe.params(), epsilon);
  return ag::compare_gradients(analytic, numeric, tolerance);
}

}  // namespace tnet::diag
