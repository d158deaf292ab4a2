#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucc/editscript.hpp"
#include "ucc/gateway.hpp"
#include "ucc/prompts.hpp"
#include "ucc/usecase.hpp"

namespace ucc {

enum class SelectionMode { YesNo, Cot };
enum class ModificationMode { EditScript, Direct };
enum class Answer { Yes, No };

const char* to_string(SelectionMode mode);
const char* to_string(ModificationMode mode);
const char* to_string(Answer answer);
std::optional<SelectionMode> selection_mode_from_string(std::string_view s);
std::optional<ModificationMode> modification_mode_from_string(std::string_view s);

struct SelectionResult {
    std::string use_case_id;
    SelectionMode mode = SelectionMode::YesNo;
    Answer answer = Answer::No;
    std::optional<std::string> rationale; // cot mode only
    std::string raw_text;
};

struct ModificationResult {
    std::string use_case_id;
    ModificationMode mode = ModificationMode::EditScript;
    ChangeList change_list;
    UseCase modified;
    std::string raw_text;
};

/// A per-item failure kept as data; runs never abort on one bad model output.
struct ItemError {
    std::string use_case_id;
    std::string kind;
    std::string message;
};

struct PipelineConfig {
    SelectionMode selection_mode = SelectionMode::Cot;
    ModificationMode modification_mode = ModificationMode::EditScript;
    std::vector<std::string> forced_ids;
};

struct PipelineRun {
    std::string run_id;
    std::string provision_id;
    std::string app_id;
    std::string model_name;
    double temperature = 0.0;
    GatewayMode gateway_mode = GatewayMode::Replay;
    SelectionMode selection_mode = SelectionMode::Cot;
    std::optional<ModificationMode> modification_mode; // absent for selection-only docs
    std::vector<std::string> forced_ids;
    std::vector<SelectionResult> selections;
    std::vector<ItemError> selection_errors;
    std::vector<ModificationResult> modifications;
    std::vector<ItemError> modification_errors;

    bool has_item_errors() const {
        return !selection_errors.empty() || !modification_errors.empty();
    }
};

struct PipelineContext {
    LlmGateway& gateway;
    const PromptLibrary& prompts;
    GatewayMode mode;
};

/// First balanced `{...}` region of `text` that parses as a JSON object,
/// tolerating surrounding prose; falls back to fenced-code-block contents.
std::optional<std::string> extract_first_json_object(std::string_view text);

/// Reads the "Answer" key of the first JSON object case-insensitively,
/// accepting yes/no after trimming and case-folding; cot mode also extracts
/// "Rationale". When no JSON object is present at all, falls back to the
/// prose form "... Answer: Yes" that chain-of-thought output sometimes takes.
std::pair<Answer, std::optional<std::string>> parse_selection(const std::string& raw_text,
                                                              SelectionMode mode);

/// One user story per non-empty line, skipping list markers and header lines;
/// lines that do not match the story form are preserved with raw_text only.
std::vector<UserStory> parse_user_stories_text(const std::string& text);

// Deterministic generation-stage prompts (shared with the fixture generator).
std::string user_story_prompt(const AppDescription& app);
std::string use_case_prompt(const UserStory& story, const AppDescription& app);

std::vector<UserStory> generate_user_stories(PipelineContext& ctx, const AppDescription& app);
UseCase generate_use_case(PipelineContext& ctx, const UserStory& story, const AppDescription& app,
                          std::string id);

SelectionResult select(PipelineContext& ctx, const UseCase& uc, const LegalProvision& provision,
                       const AppDescription& app, SelectionMode mode);

/// In editscript mode the change list is parsed and applied; in direct mode
/// the modified use case is parsed (id/title stamped from the original) and
/// the change list recovered via diff. Both fields are always populated and
/// mutually consistent.
ModificationResult modify(PipelineContext& ctx, const UseCase& uc, const LegalProvision& provision,
                          const AppDescription& app, ModificationMode mode);

/// Selection over the whole corpus, then modification over the yes-flagged
/// subset plus any forced ids. Per-item failures are collected, not fatal.
/// run_id is a deterministic hash of the configuration and corpus ids.
PipelineRun run_pipeline(PipelineContext& ctx, const std::vector<UseCase>& corpus,
                         const LegalProvision& provision, const AppDescription& app,
                         const PipelineConfig& config);

detail::ojson selection_result_to_json(const SelectionResult& s);
detail::ojson modification_result_to_json(const ModificationResult& m);
detail::ojson run_to_json(const PipelineRun& run);
PipelineRun run_from_json(const detail::ojson& j);

std::string error_kind_of(const std::exception& e);

} // namespace ucc
