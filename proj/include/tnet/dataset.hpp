#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnet/label.hpp"

namespace tnet::data {

/// A tokenized sentence, the target span inside it and the gold polarity.
struct TargetedSentence {
  std::vector<std::string> tokens;  // lowercased
  std::size_t target_start = 1;     // 1-based index of the first target token
  std::size_t target_len = 1;
  Label label = Label::Neutral;

  std::vector<std::string> target_tokens() const;
  bool operator==(const TargetedSentence&) const = default;
};

struct ParseResult {
  std::vector<TargetedSentence> records;
  std::size_t skipped_conflict = 0;
  std::vector<std::string> warnings;
};

enum class Format { JsonLines };

/// Lowercases and splits on whitespace; the input is assumed pre-tokenized.
std::vector<std::string> tokenize(std::string_view text);

/// Builds a record by locating the `occurrence`-th (0-based) match of the
/// target token sequence. With no occurrence given the target must occur
/// exactly once.
TargetedSentence make_record(std::string_view sentence, std::string_view target,
                             std::optional<std::size_t> occurrence, Label label);

/// One JSON object per line with fields `sentence`, `target`, `label` and an
/// optional `target_occurrence_index`. Blank lines are ignored; records
/// labelled "conflict" are dropped and counted.
ParseResult parse_dataset(const std::filesystem::path& path, Format format = Format::JsonLines);
ParseResult parse_dataset(std::istream& in, const std::string& source_name);

}  // namespace tnet::data
