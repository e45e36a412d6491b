#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "tnet/batch.hpp"
#include "tnet/dataset.hpp"
#include "tnet/embeddings.hpp"

namespace tnet::support {

// Sentences that each mention two targets with opposite sentiment, over a
// fixed 40-token vocabulary (including <pad> and <unk>).
struct SyntheticCorpus {
  std::vector<data::TargetedSentence> records;
  data::Vocabulary vocab;
  Tensor embeddings;
  std::size_t pad_len = 0;

  std::vector<data::Instance> instances() const { return data::make_instances(records, vocab, pad_len); }
};

inline SyntheticCorpus synthetic_corpus(std::uint64_t seed, std::size_t sentences = 16, std::size_t dim_w = 8) {
  static const std::array<const char*, 10> targets{"food", "service", "staff", "pasta", "wine",
                                                   "dessert", "pizza", "music", "decor", "price"};
  static const std::array<const char*, 7> positive{"great", "excellent", "tasty", "friendly",
                                                   "lovely", "superb", "fresh"};
  static const std::array<const char*, 7> negative{"awful", "rude", "bland", "dreadful", "slow", "stale", "noisy"};
  static const std::array<const char*, 14> filler{"the", "was", "but", "and", "is", "very", "quite",
                                                  "really", "honestly", "overall", "although", "yet", "so", "too"};

  SyntheticCorpus c;
  for (auto* w : targets) c.vocab.add(w);
  for (auto* w : positive) c.vocab.add(w);
  for (auto* w : negative) c.vocab.add(w);
  for (auto* w : filler) c.vocab.add(w);

  std::mt19937_64 rng(seed);
  auto pick = [&rng](const auto& list) { return std::string(list[rng() % list.size()]); };
  for (std::size_t s = 0; s < sentences; ++s) {
    const auto first = pick(targets);
    auto second = pick(targets);
    while (second == first) second = pick(targets);
    const bool first_positive = rng() % 2 == 0;
    const auto a = first_positive ? pick(positive) : pick(negative);
    const auto b = first_positive ? pick(negative) : pick(positive);
    std::string text;
    switch (rng() % 3) {
      case 0: text = "the " + first + " was " + a + " but the " + second + " was " + b; break;
      case 1: text = first + " is very " + a + " and " + second + " is quite " + b; break;
      default: text = "honestly the " + first + " was " + a + " although the " + second + " was really " + b; break;
    }
    const auto pos = first_positive ? Label::Positive : Label::Negative;
    const auto neg = first_positive ? Label::Negative : Label::Positive;
    c.records.push_back(data::make_record(text, first, std::nullopt, pos));
    c.records.push_back(data::make_record(text, second, std::nullopt, neg));
  }
  c.pad_len = data::longest_sentence(c.records);
  auto store = data::random_embeddings(c.vocab, dim_w, rng);
  c.embeddings = std::move(store.matrix);
  return c;
}

}  // namespace tnet::support
