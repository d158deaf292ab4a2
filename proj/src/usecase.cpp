#include "ucc/usecase.hpp"

#include <algorithm>
#include <unordered_set>

#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

namespace {

std::vector<std::string> read_string_list(const detail::ojson& root, const char* key) {
    if (!root.contains(key)) {
        throw ParseError(ParseErrorKind::MissingKey,
                         std::string("use case: missing key \"") + key + "\"");
    }
    const auto& value = root.at(key);
    if (!value.is_array()) {
        throw ParseError(ParseErrorKind::WrongShape,
                         std::string("use case: \"") + key + "\" must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(value.size());
    for (const auto& element : value) {
        if (!element.is_string()) {
            throw ParseError(ParseErrorKind::WrongShape,
                             std::string("use case: \"") + key + "\" element is not a string");
        }
        out.push_back(detail::trim(element.get<std::string>()));
    }
    return out;
}

void check_conditions(const std::vector<std::string>& conditions, const char* field,
                      std::vector<Violation>& out) {
    std::unordered_set<std::string_view> seen;
    for (const auto& condition : conditions) {
        if (detail::trim(condition).empty()) {
            out.push_back({field, "empty-string", condition});
        } else if (!seen.insert(condition).second) {
            out.push_back({field, "duplicate-condition", condition});
        }
    }
}

} // namespace

UseCase use_case_from_json(const detail::ojson& root) {
    if (!root.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "use case: root must be a JSON object");
    }
    UseCase uc;
    uc.preconditions = read_string_list(root, "preconditions");
    uc.flow = read_string_list(root, "flow");
    uc.postconditions = read_string_list(root, "postconditions");
    if (root.contains("id")) {
        const auto& id = root.at("id");
        if (!id.is_string()) {
            throw ParseError(ParseErrorKind::WrongShape, "use case: \"id\" must be a string");
        }
        uc.id = detail::trim(id.get<std::string>());
    }
    if (root.contains("title")) {
        const auto& title = root.at("title");
        if (!title.is_string()) {
            throw ParseError(ParseErrorKind::WrongShape, "use case: \"title\" must be a string");
        }
        uc.title = title.get<std::string>();
    }
    auto violations = validate(uc);
    if (!violations.empty()) {
        throw ParseError(ParseErrorKind::ValidationFailed,
                         "use case invalid: " + format_violations(violations));
    }
    return uc;
}

UseCase parse_use_case(std::string_view json_text) {
    return use_case_from_json(detail::parse_json(json_text, "use case"));
}

detail::ojson use_case_to_json(const UseCase& uc) {
    detail::ojson j = detail::ojson::object();
    j["preconditions"] = uc.preconditions;
    j["flow"] = uc.flow;
    j["postconditions"] = uc.postconditions;
    if (uc.title) j["title"] = *uc.title;
    if (!uc.id.empty()) j["id"] = uc.id;
    return j;
}

std::string serialize_use_case(const UseCase& uc) {
    return use_case_to_json(uc).dump();
}

std::vector<Violation> validate(const UseCase& uc) {
    std::vector<Violation> out;
    if (uc.flow.empty()) {
        out.push_back({"flow", "flow-empty", ""});
    }
    check_conditions(uc.preconditions, "preconditions", out);
    for (const auto& step : uc.flow) {
        if (detail::trim(step).empty()) {
            out.push_back({"flow", "empty-string", step});
        }
    }
    check_conditions(uc.postconditions, "postconditions", out);
    return out;
}

bool content_equivalent(const UseCase& a, const UseCase& b) {
    if (a.flow != b.flow) return false;
    auto as_sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    return as_sorted(a.preconditions) == as_sorted(b.preconditions) &&
           as_sorted(a.postconditions) == as_sorted(b.postconditions);
}

std::string format_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) out += "; ";
        out += violations[i].field + ": " + violations[i].rule;
        if (!violations[i].detail.empty()) {
            out += " (\"" + violations[i].detail + "\")";
        }
    }
    return out;
}

const char* to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::MalformedJson: return "malformed-json";
        case ParseErrorKind::MissingKey: return "missing-key";
        case ParseErrorKind::WrongShape: return "wrong-shape";
        case ParseErrorKind::ValidationFailed: return "validation-failed";
    }
    return "unknown";
}

} // namespace ucc
