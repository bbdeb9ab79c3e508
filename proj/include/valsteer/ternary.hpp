#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "valsteer/errors.hpp"

namespace valsteer {

enum class TernaryLabel { yes, no, unsure };

inline std::string to_string(TernaryLabel l) {
    switch (l) {
        case TernaryLabel::yes: return "yes";
        case TernaryLabel::no: return "no";
        case TernaryLabel::unsure: return "unsure";
    }
    return "unsure";
}

inline std::optional<TernaryLabel> ternary_from_string(std::string_view s) {
    if (s == "yes") return TernaryLabel::yes;
    if (s == "no") return TernaryLabel::no;
    if (s == "unsure") return TernaryLabel::unsure;
    return std::nullopt;
}

} // namespace valsteer
