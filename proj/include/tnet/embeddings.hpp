#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tnet/dataset.hpp"
#include "tnet/tensor.hpp"

namespace tnet::data {

/// Token <-> id map. Id 0 is the padding token and id 1 the unknown token.
class Vocabulary {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kUnkId = 1;
  static constexpr std::string_view kPad = "<pad>";
  static constexpr std::string_view kUnk = "<unk>";

  Vocabulary();
  /// Restores a vocabulary from its ordered token list (as stored in checkpoints).
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Adds every token of every record, in first-seen order.
  static Vocabulary build(std::span<const std::vector<TargetedSentence>> datasets);

  std::size_t add(const std::string& token);
  std::optional<std::size_t> find(const std::string& token) const;
  /// Id of `token`, or kUnkId when absent.
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// FNV-1a over the newline-joined token list.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string hash_hex(std::uint64_t hash);

struct EmbeddingStore {
  Vocabulary vocab;
  Tensor matrix;  // [|V| x dim_w]; row kPadId is zero and never updated
  std::size_t pretrained = 0;
  std::size_t sampled = 0;

  std::size_t dim() const { return matrix.cols(); }
};

/// Uniform range for tokens without a pretrained vector.
inline constexpr double kOovRange = 0.25;

/// Reads a text vector file (`token v1 ... v_dim` per line; an optional
/// word2vec "count dim" header is skipped). Vocabulary tokens found in the
/// file take its vector; the rest are drawn from U(-0.25, 0.25). Throws if
/// the file's dimension differs from `dim_w`.
EmbeddingStore load_embeddings(const std::filesystem::path& vector_file, Vocabulary vocab,
                               std::size_t dim_w, std::mt19937_64& rng);

/// Every non-padding row drawn from U(-0.25, 0.25).
EmbeddingStore random_embeddings(Vocabulary vocab, std::size_t dim_w, std::mt19937_64& rng);

}  // namespace tnet::data
