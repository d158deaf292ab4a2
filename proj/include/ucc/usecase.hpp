#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ucc/detail/jsonio.hpp"

namespace ucc {

/// A software use case: the unit every pipeline stage operates on.
///
/// `id` is assigned externally (corpus manifest or caller) and is empty for
/// freshly parsed model output. `title` is opaque metadata preserved verbatim
/// when present in the source JSON.
struct UseCase {
    std::string id;
    std::optional<std::string> title;
    std::vector<std::string> preconditions;
    std::vector<std::string> flow;
    std::vector<std::string> postconditions;

    friend bool operator==(const UseCase&, const UseCase&) = default;
};

struct UserStory {
    std::string actor;
    std::string action;
    std::string goal;
    std::string raw_text;

    friend bool operator==(const UserStory&, const UserStory&) = default;
};

struct AppDescription {
    std::string app_id;
    std::string full_text;
    std::string summary; // single line
};

struct LegalProvision {
    std::string provision_id;
    std::string citation;
    std::string text;
};

/// One broken invariant, as data. `field` is the use-case member, `rule` one
/// of "flow-empty", "empty-string", "duplicate-condition".
struct Violation {
    std::string field;
    std::string rule;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Parses the canonical use-case JSON.
///
/// Required keys: "preconditions", "flow", "postconditions" (arrays of
/// strings). Optional: "id", "title" (strings). Other keys are ignored. List
/// elements are whitespace-trimmed; interior whitespace is preserved. Throws
/// ParseError with a distinct kind for malformed JSON, a missing key, a wrong
/// value shape, and invariant violations.
UseCase parse_use_case(std::string_view json_text);

/// Canonical JSON: fixed key order (preconditions, flow, postconditions, then
/// title and id when set), compact separators, byte-deterministic.
/// parse_use_case(serialize_use_case(uc)) == uc for every valid uc.
std::string serialize_use_case(const UseCase& uc);

/// Empty result iff all invariants hold. Violations are data, not errors.
std::vector<Violation> validate(const UseCase& uc);

/// Flow compared as a sequence, condition lists as sets; id and title are
/// ignored. Pre/postconditions are logically conjunctive, so this is the
/// equality the edit-script round trip guarantees.
bool content_equivalent(const UseCase& a, const UseCase& b);

detail::ojson use_case_to_json(const UseCase& uc);
UseCase use_case_from_json(const detail::ojson& root);

std::string format_violations(const std::vector<Violation>& violations);

} // namespace ucc
