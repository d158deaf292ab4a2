#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "ucc/usecase.hpp"

namespace ucc {

/// The six-operation change vocabulary. `at_index` is meaningful for the two
/// flow operations only, `text` for everything except remove_flow.
enum class OpKind {
    InsertPre,
    RemovePre,
    InsertFlow,
    RemoveFlow,
    InsertPost,
    RemovePost,
};

const char* op_name(OpKind kind);
std::optional<OpKind> op_kind_from_name(std::string_view name);

struct EditOp {
    OpKind kind = OpKind::InsertPre;
    std::size_t at_index = 0;
    std::string text;

    friend bool operator==(const EditOp&, const EditOp&) = default;
};

EditOp insert_pre(std::string condition);
EditOp remove_pre(std::string condition);
EditOp insert_flow(std::size_t at_index, std::string step);
EditOp remove_flow(std::size_t at_index);
EditOp insert_post(std::string condition);
EditOp remove_post(std::string condition);

struct ChangeList {
    std::vector<EditOp> ops;

    friend bool operator==(const ChangeList&, const ChangeList&) = default;
};

std::string format_op(const EditOp& op);

enum class ApplyErrorKind {
    IndexOutOfRange,
    MissingCondition,
    DuplicateCondition,
    InvalidResult,
};

const char* to_string(ApplyErrorKind kind);

/// Carries the offending op (absent for InvalidResult, which is a property of
/// the whole script) plus its position in the list.
class ApplyError : public std::runtime_error {
public:
    ApplyError(ApplyErrorKind kind, std::size_t op_index, std::optional<EditOp> op,
               std::string message)
        : std::runtime_error(std::move(message)),
          kind_(kind),
          op_index_(op_index),
          op_(std::move(op)) {}

    ApplyErrorKind kind() const noexcept { return kind_; }
    std::size_t op_index() const noexcept { return op_index_; }
    const std::optional<EditOp>& op() const noexcept { return op_; }

private:
    ApplyErrorKind kind_;
    std::size_t op_index_;
    std::optional<EditOp> op_;
};

/// Applies ops strictly in list order. Flow indices refer to the current,
/// partially-edited flow at the moment each op applies. insert_pre/insert_post
/// append; remove_pre/remove_post match exact strings. The result is validated
/// before return; id and title carry over from `uc`.
UseCase apply(const ChangeList& cl, const UseCase& uc);

/// Minimal change list from `original` to `modified`.
///
/// Condition lists are diffed as sets (removals in source order, then
/// insertions in target order); flows as sequences via LCS alignment, emitted
/// as removals in descending index order followed by insertions in ascending
/// target order. apply(diff(a, b), a) reproduces b's flow exactly and its
/// condition sets exactly; condition order inside the lists is not meaningful.
ChangeList diff(const UseCase& original, const UseCase& modified);

/// Stable reorder into canonical class order (remove_pre, insert_pre, flow
/// removals by descending index, flow insertions by ascending index,
/// remove_post, insert_post) with lexicographic tie-break on text. Idempotent;
/// preserves apply semantics for diff-produced lists.
ChangeList canonicalize(ChangeList cl);

/// One line per op in canonical order: `<op_name> <at_index?> <text?>`.
/// Canonically equal lists serialize byte-identically. Empty list -> "".
std::string serialize_change_list(const ChangeList& cl);

/// JSON form `{"ops": [{"op": "insert_flow", "at_index": 5, "text": "..."}]}`.
/// Op text is trimmed; empty text and negative indices are rejected.
ChangeList parse_change_list(std::string_view json_text);
ChangeList change_list_from_json(const detail::ojson& root);
detail::ojson change_list_to_json(const ChangeList& cl);

} // namespace ucc
