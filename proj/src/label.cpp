#include "tnet/label.hpp"

#include <algorithm>
#include <cctype>

namespace tnet {

std::string_view label_code(Label label) {
  switch (label) {
    case Label::Positive: return "P";
    case Label::Negative: return "N";
    case Label::Neutral: return "O";
  }
  return "?";
}

std::string_view label_name(Label label) {
  switch (label) {
    case Label::Positive: return "positive";
    case Label::Negative: return "negative";
    case Label::Neutral: return "neutral";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "p" || lower == "positive" || lower == "pos") return Label::Positive;
  if (lower == "n" || lower == "negative" || lower == "neg") return Label::Negative;
  if (lower == "o" || lower == "neutral" || lower == "neu") return Label::Neutral;
  return std::nullopt;
}

}  // namespace tnet
