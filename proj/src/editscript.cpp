#include "ucc/editscript.hpp"

#include <algorithm>

#include "ucc/detail/lcs.hpp"
#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

namespace {

bool takes_text(OpKind kind) {
    return kind != OpKind::RemoveFlow;
}

bool takes_index(OpKind kind) {
    return kind == OpKind::InsertFlow || kind == OpKind::RemoveFlow;
}

int class_rank(OpKind kind) {
    switch (kind) {
        case OpKind::RemovePre: return 0;
        case OpKind::InsertPre: return 1;
        case OpKind::RemoveFlow: return 2;
        case OpKind::InsertFlow: return 3;
        case OpKind::RemovePost: return 4;
        case OpKind::InsertPost: return 5;
    }
    return 6;
}

[[noreturn]] void throw_apply(ApplyErrorKind kind, std::size_t op_index, const EditOp& op,
                              const std::string& detail) {
    throw ApplyError(kind, op_index, op,
                     "op " + std::to_string(op_index) + " (" + format_op(op) + "): " + detail);
}

void apply_insert_condition(std::vector<std::string>& conditions, const EditOp& op,
                            std::size_t op_index) {
    if (std::find(conditions.begin(), conditions.end(), op.text) != conditions.end()) {
        throw_apply(ApplyErrorKind::DuplicateCondition, op_index, op, "condition already present");
    }
    conditions.push_back(op.text);
}

void apply_remove_condition(std::vector<std::string>& conditions, const EditOp& op,
                            std::size_t op_index) {
    auto it = std::find(conditions.begin(), conditions.end(), op.text);
    if (it == conditions.end()) {
        throw_apply(ApplyErrorKind::MissingCondition, op_index, op, "condition not present");
    }
    conditions.erase(it);
}

} // namespace

const char* op_name(OpKind kind) {
    switch (kind) {
        case OpKind::InsertPre: return "insert_pre";
        case OpKind::RemovePre: return "remove_pre";
        case OpKind::InsertFlow: return "insert_flow";
        case OpKind::RemoveFlow: return "remove_flow";
        case OpKind::InsertPost: return "insert_post";
        case OpKind::RemovePost: return "remove_post";
    }
    return "unknown";
}

std::optional<OpKind> op_kind_from_name(std::string_view name) {
    if (name == "insert_pre") return OpKind::InsertPre;
    if (name == "remove_pre") return OpKind::RemovePre;
    if (name == "insert_flow") return OpKind::InsertFlow;
    if (name == "remove_flow") return OpKind::RemoveFlow;
    if (name == "insert_post") return OpKind::InsertPost;
    if (name == "remove_post") return OpKind::RemovePost;
    return std::nullopt;
}

EditOp insert_pre(std::string condition) { return {OpKind::InsertPre, 0, std::move(condition)}; }
EditOp remove_pre(std::string condition) { return {OpKind::RemovePre, 0, std::move(condition)}; }
EditOp insert_flow(std::size_t at_index, std::string step) {
    return {OpKind::InsertFlow, at_index, std::move(step)};
}
EditOp remove_flow(std::size_t at_index) { return {OpKind::RemoveFlow, at_index, ""}; }
EditOp insert_post(std::string condition) { return {OpKind::InsertPost, 0, std::move(condition)}; }
EditOp remove_post(std::string condition) { return {OpKind::RemovePost, 0, std::move(condition)}; }

std::string format_op(const EditOp& op) {
    std::string out = op_name(op.kind);
    if (takes_index(op.kind)) {
        out += ' ';
        out += std::to_string(op.at_index);
    }
    if (takes_text(op.kind)) {
        out += ' ';
        out += op.text;
    }
    return out;
}

const char* to_string(ApplyErrorKind kind) {
    switch (kind) {
        case ApplyErrorKind::IndexOutOfRange: return "index-out-of-range";
        case ApplyErrorKind::MissingCondition: return "missing-condition";
        case ApplyErrorKind::DuplicateCondition: return "duplicate-condition";
        case ApplyErrorKind::InvalidResult: return "invalid-result";
    }
    return "unknown";
}

UseCase apply(const ChangeList& cl, const UseCase& uc) {
    UseCase out = uc;
    for (std::size_t i = 0; i < cl.ops.size(); ++i) {
        const EditOp& op = cl.ops[i];
        switch (op.kind) {
            case OpKind::InsertPre:
                apply_insert_condition(out.preconditions, op, i);
                break;
            case OpKind::RemovePre:
                apply_remove_condition(out.preconditions, op, i);
                break;
            case OpKind::InsertPost:
                apply_insert_condition(out.postconditions, op, i);
                break;
            case OpKind::RemovePost:
                apply_remove_condition(out.postconditions, op, i);
                break;
            case OpKind::InsertFlow:
                if (op.at_index > out.flow.size()) {
                    throw_apply(ApplyErrorKind::IndexOutOfRange, i, op,
                                "flow has " + std::to_string(out.flow.size()) + " steps");
                }
                out.flow.insert(out.flow.begin() + static_cast<std::ptrdiff_t>(op.at_index),
                                op.text);
                break;
            case OpKind::RemoveFlow:
                if (op.at_index >= out.flow.size()) {
                    throw_apply(ApplyErrorKind::IndexOutOfRange, i, op,
                                "flow has " + std::to_string(out.flow.size()) + " steps");
                }
                out.flow.erase(out.flow.begin() + static_cast<std::ptrdiff_t>(op.at_index));
                break;
        }
    }
    auto violations = validate(out);
    if (!violations.empty()) {
        throw ApplyError(ApplyErrorKind::InvalidResult, cl.ops.size(), std::nullopt,
                         "result invalid: " + format_violations(violations));
    }
    return out;
}

ChangeList diff(const UseCase& original, const UseCase& modified) {
    ChangeList cl;

    auto diff_conditions = [&cl](const std::vector<std::string>& from,
                                 const std::vector<std::string>& to, OpKind remove_kind,
                                 OpKind insert_kind) {
        auto contains = [](const std::vector<std::string>& v, const std::string& s) {
            return std::find(v.begin(), v.end(), s) != v.end();
        };
        for (const auto& condition : from) {
            if (!contains(to, condition)) cl.ops.push_back({remove_kind, 0, condition});
        }
        for (const auto& condition : to) {
            if (!contains(from, condition)) cl.ops.push_back({insert_kind, 0, condition});
        }
    };

    diff_conditions(original.preconditions, modified.preconditions, OpKind::RemovePre,
                    OpKind::InsertPre);

    auto matched = detail::lcs_pairs(original.flow, modified.flow);
    std::vector<bool> keep_from(original.flow.size(), false);
    std::vector<bool> keep_to(modified.flow.size(), false);
    for (auto [i, j] : matched) {
        keep_from[i] = true;
        keep_to[j] = true;
    }
    // Removals in descending index order keep earlier indices valid.
    for (std::size_t i = original.flow.size(); i-- > 0;) {
        if (!keep_from[i]) cl.ops.push_back(remove_flow(i));
    }
    // Insertions in ascending target order place each step at its final index.
    for (std::size_t j = 0; j < modified.flow.size(); ++j) {
        if (!keep_to[j]) cl.ops.push_back(insert_flow(j, modified.flow[j]));
    }

    diff_conditions(original.postconditions, modified.postconditions, OpKind::RemovePost,
                    OpKind::InsertPost);
    return cl;
}

ChangeList canonicalize(ChangeList cl) {
    std::stable_sort(cl.ops.begin(), cl.ops.end(), [](const EditOp& a, const EditOp& b) {
        int ra = class_rank(a.kind);
        int rb = class_rank(b.kind);
        if (ra != rb) return ra < rb;
        if (a.kind == OpKind::RemoveFlow) return a.at_index > b.at_index;
        if (a.kind == OpKind::InsertFlow) {
            if (a.at_index != b.at_index) return a.at_index < b.at_index;
        }
        return a.text < b.text;
    });
    return cl;
}

std::string serialize_change_list(const ChangeList& cl) {
    ChangeList canon = canonicalize(cl);
    std::string out;
    for (std::size_t i = 0; i < canon.ops.size(); ++i) {
        if (i > 0) out += '\n';
        out += format_op(canon.ops[i]);
    }
    return out;
}

ChangeList change_list_from_json(const detail::ojson& root) {
    if (!root.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "change list: root must be a JSON object");
    }
    if (!root.contains("ops")) {
        throw ParseError(ParseErrorKind::MissingKey, "change list: missing key \"ops\"");
    }
    const auto& ops = root.at("ops");
    if (!ops.is_array()) {
        throw ParseError(ParseErrorKind::WrongShape, "change list: \"ops\" must be an array");
    }
    ChangeList cl;
    cl.ops.reserve(ops.size());
    for (const auto& entry : ops) {
        if (!entry.is_object()) {
            throw ParseError(ParseErrorKind::WrongShape, "change list: op entry must be an object");
        }
        if (!entry.contains("op")) {
            throw ParseError(ParseErrorKind::MissingKey, "change list: op entry missing \"op\"");
        }
        if (!entry.at("op").is_string()) {
            throw ParseError(ParseErrorKind::WrongShape, "change list: \"op\" must be a string");
        }
        const std::string name = entry.at("op").get<std::string>();
        auto kind = op_kind_from_name(name);
        if (!kind) {
            throw ParseError(ParseErrorKind::WrongShape,
                             "change list: unknown op \"" + name + "\"");
        }
        EditOp op;
        op.kind = *kind;
        if (takes_index(*kind)) {
            if (!entry.contains("at_index")) {
                throw ParseError(ParseErrorKind::MissingKey,
                                 "change list: " + name + " requires \"at_index\"");
            }
            const auto& idx = entry.at("at_index");
            if (!idx.is_number_integer() || idx.get<long long>() < 0) {
                throw ParseError(ParseErrorKind::WrongShape,
                                 "change list: \"at_index\" must be a non-negative integer");
            }
            op.at_index = static_cast<std::size_t>(idx.get<long long>());
        }
        if (takes_text(*kind)) {
            if (!entry.contains("text")) {
                throw ParseError(ParseErrorKind::MissingKey,
                                 "change list: " + name + " requires \"text\"");
            }
            if (!entry.at("text").is_string()) {
                throw ParseError(ParseErrorKind::WrongShape,
                                 "change list: \"text\" must be a string");
            }
            op.text = detail::trim(entry.at("text").get<std::string>());
            if (op.text.empty()) {
                throw ParseError(ParseErrorKind::ValidationFailed,
                                 "change list: " + name + " has empty text");
            }
        }
        cl.ops.push_back(std::move(op));
    }
    return cl;
}

ChangeList parse_change_list(std::string_view json_text) {
    return change_list_from_json(detail::parse_json(json_text, "change list"));
}

detail::ojson change_list_to_json(const ChangeList& cl) {
    detail::ojson ops = detail::ojson::array();
    for (const auto& op : cl.ops) {
        detail::ojson entry = detail::ojson::object();
        entry["op"] = op_name(op.kind);
        if (takes_index(op.kind)) entry["at_index"] = op.at_index;
        if (takes_text(op.kind)) entry["text"] = op.text;
        ops.push_back(std::move(entry));
    }
    detail::ojson root = detail::ojson::object();
    root["ops"] = std::move(ops);
    return root;
}

} // namespace ucc
