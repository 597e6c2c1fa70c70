#include "stance/labels.hpp"

#include "stance/util.hpp"

namespace stance {

const char* to_string(StanceLabel label) {
    switch (label) {
        case StanceLabel::Pro: return "pro";
        case StanceLabel::Neutral: return "neutral";
        case StanceLabel::Against: return "against";
        case StanceLabel::NotAbout: return "not-about";
        case StanceLabel::LinkNotWorking: return "link-not-working";
    }
    return "?";
}

std::optional<StanceLabel> parse_label(std::string_view text) {
    std::string s = to_lower(std::string(trim(text)));
    if (s == "pro") return StanceLabel::Pro;
    if (s == "neutral") return StanceLabel::Neutral;
    if (s == "against") return StanceLabel::Against;
    if (s == "not-about") return StanceLabel::NotAbout;
    if (s == "link-not-working") return StanceLabel::LinkNotWorking;
    return std::nullopt;
}

int class_index(StanceLabel label) {
    switch (label) {
        case StanceLabel::Pro: return 0;
        case StanceLabel::Neutral: return 1;
        case StanceLabel::Against: return 2;
        case StanceLabel::NotAbout: return 3;
        case StanceLabel::LinkNotWorking: return -1;
    }
    return -1;
}

int label_index(StanceLabel label) {
    return label == StanceLabel::LinkNotWorking ? 4 : class_index(label);
}

}  // namespace stance
