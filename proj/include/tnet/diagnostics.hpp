#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/batch.hpp"
#include "tnet/gradcheck.hpp"
#include "tnet/model.hpp"

namespace tnet::diag {

/// Small model and inputs used to compare backward() with finite differences.
struct TinyConfig {
  std::size_t dim_w = 8;
  std::size_t dim_h = 4;
  std::size_t length = 6;       // n
  std::size_t target_len = 2;   // m
  std::size_t padded_len = 7;
  std::size_t layers = 2;
  std::size_t num_kernels = 3;
  std::size_t kernel_size = 2;
  std::size_t vocab_size = 12;
  std::size_t examples = 2;
  /// Every weight and bias is drawn from U(-range, range) so that no
  /// gradient is trivially zero.
  double init_range = 0.5;
};

struct GradCheckSetup {
  TNet model;
  std::vector<data::Instance> instances;
};

GradCheckSetup tiny_setup(Variant variant, const TinyConfig& config, std::uint64_t seed);

struct Fault {
  ag::Op op;
  double factor;
};

/// Backward gradients of the evaluation-mode mean loss against central
/// differences, one entry per named parameter. A fault, if given, is injected
/// into the analytic pass only.
ag::GradCheckReport model_gradcheck(const TNet& model, std::span<const data::Instance> instances,
                                    double tolerance = 1e-4, double epsilon = 1e-5,
                                    std::optional<Fault> fault = std::nullopt);

}  // namespace tnet::diag
