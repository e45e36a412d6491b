#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "tnet/embeddings.hpp"
#include "tnet/model.hpp"
#include "tnet/trainer.hpp"

namespace tnet {

/// Everything needed to rebuild a trained model: hyperparameters, the
/// vocabulary that indexes the embedding rows, the padding length used in
/// training and every named parameter.
struct Checkpoint {
  static constexpr std::string_view kFormat = "tnet-checkpoint";
  static constexpr int kVersion = 1;

  train::Hyperparams hyper;
  data::Vocabulary vocab;
  ParamStore params;
  std::size_t pad_len = 1;

  TNet model() const;
};

/// JSON text. Doubles are written in shortest round-trip form, so
/// parameters survive a save/load cycle bit for bit.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Rejects unknown formats or versions, a stored vocabulary hash that does
/// not match the stored tokens, and parameters that do not fit the model.
Checkpoint parse_checkpoint(std::string_view text, const std::string& source_name = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tnet
