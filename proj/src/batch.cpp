#include "tnet/batch.hpp"

#include <algorithm>

#include "tnet/error.hpp"

namespace tnet::data {

std::vector<std::vector<std::size_t>> PaddedBatch::token_matrix() const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(inst.tokens);
  return out;
}

Instance make_instance(const TargetedSentence& record, const Vocabulary& vocab, std::size_t pad_len) {
  const auto n = record.tokens.size();
  if (n == 0) throw ContractError("pad_batch: empty sentence");
  if (n > pad_len) {
    throw ContractError("pad_batch: sentence of " + std::to_string(n) + " tokens exceeds pad length " +
                        std::to_string(pad_len));
  }
  if (record.target_start < 1 || record.target_len < 1 || record.target_start + record.target_len - 1 > n) {
    throw ContractError("pad_batch: target span outside sentence");
  }
  Instance inst;
  inst.tokens.assign(pad_len, Vocabulary::kPadId);
  for (std::size_t i = 0; i < n; ++i) inst.tokens[i] = vocab.id(record.tokens[i]);
  inst.target.assign(inst.tokens.begin() + static_cast<std::ptrdiff_t>(record.target_start - 1),
                     inst.tokens.begin() + static_cast<std::ptrdiff_t>(record.target_start - 1 + record.target_len));
  inst.length = n;
  inst.target_start = record.target_start;
  inst.label = record.label;
  return inst;
}

std::vector<Instance> make_instances(std::span<const TargetedSentence> records, const Vocabulary& vocab,
                                     std::size_t pad_len) {
  std::vector<Instance> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(make_instance(r, vocab, pad_len));
  return out;
}

PaddedBatch pad_batch(std::span<const TargetedSentence> records, const Vocabulary& vocab,
                      std::size_t pad_len, double C) {
  PaddedBatch batch;
  batch.pad_len = pad_len;
  batch.instances = make_instances(records, vocab, pad_len);
  for (const auto& inst : batch.instances) {
    batch.positions.push_back(
        head::position_relevance(inst.target_start, inst.target_len(), inst.length, pad_len, C));
  }
  return batch;
}

std::size_t longest_sentence(std::span<const TargetedSentence> records) {
  std::size_t longest = 0;
  for (const auto& r : records) longest = std::max(longest, r.tokens.size());
  return longest;
}

std::vector<std::string> unpad(const Instance& instance, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < instance.length; ++i) out.push_back(vocab.token(instance.tokens[i]));
  return out;
}

}  // namespace tnet::data
