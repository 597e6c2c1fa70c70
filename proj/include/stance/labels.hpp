#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace stance {

// Annotation labels. LinkNotWorking only exists in raw corpora; it is
// removed by preprocessing and never reaches training or evaluation.
enum class StanceLabel { Pro, Neutral, Against, NotAbout, LinkNotWorking };

inline constexpr int kNumClasses = 4;
inline constexpr int kNumLabels = 5;

// Fixed classifier ordering; also the argmax tie-break order.
inline constexpr std::array<StanceLabel, kNumClasses> kClassOrder = {
    StanceLabel::Pro, StanceLabel::Neutral, StanceLabel::Against,
    StanceLabel::NotAbout};

const char* to_string(StanceLabel label);

// Case-insensitive parse of the five wire strings
// (pro|neutral|against|not-about|link-not-working).
std::optional<StanceLabel> parse_label(std::string_view text);

// Dense class index in kClassOrder, or -1 for LinkNotWorking.
int class_index(StanceLabel label);

// Index over all five variants (enum order), for raw-corpus tallies.
int label_index(StanceLabel label);

}  // namespace stance
