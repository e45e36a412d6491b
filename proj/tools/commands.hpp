#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnet/diagnostics.hpp"
#include "tnet/error.hpp"
#include "tnet/trainer.hpp"

// The train / eval / predict / gradcheck / ablate workflows. Each command
// returns the JSON document it reports; run() wraps them for the shell.
namespace tnet::cli {

using nlohmann::json;

// Bad invocation or an input path that does not exist. Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Hyperparameter sources, applied as: flags > config file > per-dataset defaults.
struct Overrides {
  std::optional<Variant> variant;
  train::DatasetName dataset = train::DatasetName::Laptop;
  std::optional<std::filesystem::path> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool share_target_encoder = false;
  bool per_layer_params = false;
  bool freeze_embeddings = false;
};

train::Hyperparams resolve_hyperparams(const Overrides& overrides);

struct DataFiles {
  std::filesystem::path train;
  std::optional<std::filesystem::path> valid;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> embeddings;
};

struct TrainRequest {
  Overrides overrides;
  DataFiles files;
  std::size_t runs = 1;
  std::filesystem::path out = "tnet-out";
};

/// Trains `runs` models with seeds seed, seed+1, ... and writes config.json,
/// plus checkpoint.json and history.json per run (in run-<i>/ when runs > 1),
/// plus eval.json when a test file is given, plus summary.json.
json train_command(const TrainRequest& request, std::ostream& log);

/// Each path is a checkpoint file or a train output directory (all of its runs).
/// With `ttest`, exactly two systems with the same number (>= 2) of runs are
/// compared by a paired t-test over per-run accuracy and macro-F1.
json eval_command(const std::vector<std::filesystem::path>& systems, const std::filesystem::path& test_file,
                  bool ttest);

/// `occurrence` is the 0-based match of `target` in `sentence`.
json predict_command(const std::filesystem::path& checkpoint, const std::string& sentence,
                     const std::string& target, std::optional<std::size_t> occurrence);

json gradcheck_command(const std::vector<Variant>& variants, std::uint64_t seed,
                       std::optional<diag::Fault> fault);

/// Trains and evaluates every variant with the same data and overrides.
json ablate_command(const Overrides& overrides, const DataFiles& files, std::size_t runs, std::ostream& log);

/// Aligned text view of an ablate or eval result.
std::string ablation_table(const json& ablation);
std::string eval_table(const json& evaluation);

/// Entry point. Exit codes: 0 success, 1 failed command or check, 2 usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tnet::cli
