#include "tnet/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include "tnet/error.hpp"

namespace tnet::data {

namespace {

std::vector<std::size_t> find_all(const std::vector<std::string>& tokens,
                                  const std::vector<std::string>& needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || needle.size() > tokens.size()) return hits;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      hits.push_back(i);
    }
  }
  return hits;
}

}  // namespace

std::vector<std::string> TargetedSentence::target_tokens() const {
  const auto begin = tokens.begin() + static_cast<std::ptrdiff_t>(target_start - 1);
  return {begin, begin + static_cast<std::ptrdiff_t>(target_len)};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

TargetedSentence make_record(std::string_view sentence, std::string_view target,
                             std::optional<std::size_t> occurrence, Label label) {
  TargetedSentence rec;
  rec.tokens = tokenize(sentence);
  rec.label = label;
  if (rec.tokens.empty()) throw ContractError("empty sentence");
  const auto target_tokens = tokenize(target);
  if (target_tokens.empty()) throw ContractError("empty target");
  const auto hits = find_all(rec.tokens, target_tokens);
  if (hits.empty()) throw ContractError("target '" + std::string(target) + "' not found in sentence");
  std::size_t pick = 0;
  if (occurrence) {
    if (*occurrence >= hits.size()) {
      throw ContractError("target '" + std::string(target) + "' occurs " + std::to_string(hits.size()) +
                          " time(s); occurrence index " + std::to_string(*occurrence) + " is out of range");
    }
    pick = *occurrence;
  } else if (hits.size() > 1) {
    throw ContractError("target '" + std::string(target) + "' occurs " + std::to_string(hits.size()) +
                        " times; target_occurrence_index is required");
  }
  rec.target_start = hits[pick] + 1;
  rec.target_len = target_tokens.size();
  return rec;
}

ParseResult parse_dataset(const std::filesystem::path& path, Format format) {
  if (format != Format::JsonLines) throw ConfigError("unsupported dataset format");
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

ParseResult parse_dataset(std::istream& in, const std::string& source_name) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!obj.is_object()) throw ContractError("record is not a JSON object");
      for (const char* field : {"sentence", "target", "label"}) {
        if (!obj.contains(field) || !obj[field].is_string()) {
          throw ContractError(std::string("missing string field '") + field + "'");
        }
      }
      const auto label_text = obj["label"].get<std::string>();
      if (tokenize(label_text) == std::vector<std::string>{"conflict"}) {
        ++result.skipped_conflict;
        continue;
      }
      const auto label = parse_label(label_text);
      if (!label) throw ContractError("unknown label '" + label_text + "'");
      std::optional<std::size_t> occurrence;
      if (obj.contains("target_occurrence_index")) {
        const auto& occ = obj["target_occurrence_index"];
        if (!occ.is_number_unsigned()) throw ContractError("target_occurrence_index must be a non-negative integer");
        occurrence = occ.get<std::size_t>();
      }
      result.records.push_back(make_record(obj["sentence"].get<std::string>(),
                                           obj["target"].get<std::string>(), occurrence, *label));
    } catch (const ContractError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  if (result.records.empty()) result.warnings.push_back(source_name + ": no records");
  if (result.skipped_conflict > 0) {
    result.warnings.push_back(source_name + ": skipped " + std::to_string(result.skipped_conflict) +
                              " conflict-labelled record(s)");
  }
  return result;
}

}  // namespace tnet::data
