#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "ucc/errors.hpp"

namespace ucc::detail {

// Insertion-ordered JSON everywhere: canonical documents have a fixed key
// order, so the default alphabetic sorting of nlohmann::json would fight us.
using ojson = nlohmann::ordered_json;

inline ojson parse_json(std::string_view text, const char* what) {
    ojson j = ojson::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(ParseErrorKind::MalformedJson,
                         std::string(what) + ": malformed JSON");
    }
    return j;
}

inline const ojson* find_member_ci(const ojson& obj, std::string_view key) {
    if (!obj.is_object()) return nullptr;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        if (k.size() != key.size()) continue;
        bool eq = true;
        for (size_t i = 0; i < k.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(k[i])) !=
                std::tolower(static_cast<unsigned char>(key[i]))) {
                eq = false;
                break;
            }
        }
        if (eq) return &it.value();
    }
    return nullptr;
}

} // namespace ucc::detail
