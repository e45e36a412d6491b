#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tnet/dataset.hpp"
#include "tnet/embeddings.hpp"
#include "tnet/head.hpp"
#include "tnet/label.hpp"

namespace tnet::data {

/// A record mapped to vocabulary ids and right-padded to a fixed length.
struct Instance {
  std::vector<std::size_t> tokens;  // padded_len ids, padding = Vocabulary::kPadId
  std::vector<std::size_t> target;  // m ids
  std::size_t length = 1;           // n, real tokens
  std::size_t target_start = 1;     // k, 1-based
  Label label = Label::Neutral;

  std::size_t padded_len() const noexcept { return tokens.size(); }
  std::size_t target_len() const noexcept { return target.size(); }
};

struct PaddedBatch {
  std::vector<Instance> instances;
  std::vector<head::PositionWeights> positions;
  std::size_t pad_len = 0;

  /// Token ids as rows of a [records x pad_len] grid.
  std::vector<std::vector<std::size_t>> token_matrix() const;
};

Instance make_instance(const TargetedSentence& record, const Vocabulary& vocab, std::size_t pad_len);

/// Maps records to ids, right-pads each to `pad_len` and computes proximity
/// weights with constant C. Throws if a sentence is longer than `pad_len`.
PaddedBatch pad_batch(std::span<const TargetedSentence> records, const Vocabulary& vocab,
                      std::size_t pad_len, double C);

std::vector<Instance> make_instances(std::span<const TargetedSentence> records, const Vocabulary& vocab,
                                     std::size_t pad_len);

std::size_t longest_sentence(std::span<const TargetedSentence> records);

/// Token strings of the unpadded part of an instance.
std::vector<std::string> unpad(const Instance& instance, const Vocabulary& vocab);

}  // namespace tnet::data
