#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace tnet {

/// Sentiment classes in classifier output order.
enum class Label : std::size_t { Positive = 0, Negative = 1, Neutral = 2 };

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels{Label::Positive, Label::Negative,
                                                          Label::Neutral};

/// "P", "N" or "O".
std::string_view label_code(Label label);
std::string_view label_name(Label label);
/// Accepts P/N/O and positive/negative/neutral, case-insensitive.
std::optional<Label> parse_label(std::string_view text);

inline std::size_t index_of(Label label) { return static_cast<std::size_t>(label); }

}  // namespace tnet
