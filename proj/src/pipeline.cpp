#include "ucc/pipeline.hpp"

#include <algorithm>
#include <future>
#include <regex>

#include "ucc/detail/sha256.hpp"
#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

namespace {

// Scans one balanced {...} region starting at `open`, honoring string
// literals. Returns one past the closing brace, or npos if unbalanced.
size_t balanced_end(std::string_view text, size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = open; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::optional<std::string> try_parse_object(std::string_view candidate) {
    auto j = detail::ojson::parse(candidate, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return std::string(candidate);
}

std::string first_line_excerpt(const std::string& text, size_t limit = 80) {
    std::string excerpt = detail::trim(text).substr(0, limit);
    std::replace(excerpt.begin(), excerpt.end(), '\n', ' ');
    return excerpt;
}

std::string strip_list_marker(const std::string& line) {
    static const std::regex marker(R"(^\s*(?:[-*]|•|\d+[.)])\s*)");
    return std::regex_replace(line, marker, "");
}

std::optional<UserStory> parse_story_line(const std::string& line) {
    static const std::regex story_re(
        R"(^As an? (.+?), I want to (.+?)(?: so that | for the purpose of )(.+?)\.?$)",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_match(line, m, story_re)) return std::nullopt;
    UserStory story;
    story.actor = detail::trim(m[1].str());
    story.action = detail::trim(m[2].str());
    story.goal = detail::trim(m[3].str());
    story.raw_text = line;
    return story;
}

const char* mode_key(SelectionMode mode) { return to_string(mode); }

struct ParsedModification {
    ChangeList change_list;
    UseCase modified;
};

ParsedModification parse_modification(const std::string& raw, const UseCase& original,
                                      ModificationMode mode) {
    auto extracted = extract_first_json_object(raw);
    if (!extracted) {
        throw PipelineError(PipelineErrorKind::ExtractionFailed,
                            "no JSON object in modification output (starts: \"" +
                                first_line_excerpt(raw) + "\")");
    }
    ParsedModification out;
    if (mode == ModificationMode::EditScript) {
        out.change_list = parse_change_list(*extracted);
        out.modified = apply(out.change_list, original);
    } else {
        out.modified = parse_use_case(*extracted);
        out.modified.id = original.id;
        out.modified.title = original.title;
        out.change_list = diff(original, out.modified);
    }
    return out;
}

// Bounded parallel map keyed by corpus position so results join in corpus
// order no matter how the gateway schedules requests.
template <typename Item, typename Fn>
void for_each_item(const std::vector<Item>& items, int permits, Fn&& fn) {
    if (permits <= 1 || items.size() <= 1) {
        for (size_t i = 0; i < items.size(); ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        futures.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
    }
    for (auto& f : futures) f.get();
}

} // namespace

const char* to_string(SelectionMode mode) {
    return mode == SelectionMode::YesNo ? "yes_no" : "cot";
}

const char* to_string(ModificationMode mode) {
    return mode == ModificationMode::EditScript ? "editscript" : "direct";
}

const char* to_string(Answer answer) {
    return answer == Answer::Yes ? "yes" : "no";
}

std::optional<SelectionMode> selection_mode_from_string(std::string_view s) {
    if (s == "yes_no") return SelectionMode::YesNo;
    if (s == "cot") return SelectionMode::Cot;
    return std::nullopt;
}

std::optional<ModificationMode> modification_mode_from_string(std::string_view s) {
    if (s == "editscript") return ModificationMode::EditScript;
    if (s == "direct") return ModificationMode::Direct;
    return std::nullopt;
}

std::optional<std::string> extract_first_json_object(std::string_view text) {
    for (size_t i = text.find('{'); i != std::string_view::npos; i = text.find('{', i + 1)) {
        size_t end = balanced_end(text, i);
        if (end == std::string_view::npos) continue;
        if (auto obj = try_parse_object(text.substr(i, end - i))) return obj;
    }
    // Fall back to fenced-block contents (```json ... ```).
    size_t fence = text.find("```");
    while (fence != std::string_view::npos) {
        size_t body_begin = text.find('\n', fence);
        if (body_begin == std::string_view::npos) break;
        size_t close = text.find("```", body_begin);
        if (close == std::string_view::npos) break;
        std::string trimmed = detail::trim(text.substr(body_begin, close - body_begin));
        if (auto obj = try_parse_object(trimmed)) return obj;
        fence = text.find("```", close + 3);
    }
    return std::nullopt;
}

std::pair<Answer, std::optional<std::string>> parse_selection(const std::string& raw_text,
                                                              SelectionMode mode) {
    auto read_answer = [&raw_text](const std::string& value) -> Answer {
        std::string folded = detail::to_lower_ascii(detail::trim(value));
        if (folded == "yes") return Answer::Yes;
        if (folded == "no") return Answer::No;
        throw SelectionParseError(SelectionParseErrorKind::InvalidAnswer,
                                  "Answer value is not yes/no: \"" + value + "\" (raw starts: \"" +
                                      first_line_excerpt(raw_text) + "\")");
    };

    if (auto extracted = extract_first_json_object(raw_text)) {
        detail::ojson obj = detail::parse_json(*extracted, "selection");
        const detail::ojson* answer = detail::find_member_ci(obj, "answer");
        if (answer == nullptr) {
            throw SelectionParseError(SelectionParseErrorKind::AnswerMissing,
                                      "JSON object has no Answer key (raw starts: \"" +
                                          first_line_excerpt(raw_text) + "\")");
        }
        if (!answer->is_string()) {
            throw SelectionParseError(SelectionParseErrorKind::InvalidAnswer,
                                      "Answer value is not a string");
        }
        Answer a = read_answer(answer->get<std::string>());
        std::optional<std::string> rationale;
        if (mode == SelectionMode::Cot) {
            const detail::ojson* r = detail::find_member_ci(obj, "rationale");
            if (r != nullptr && r->is_string()) {
                std::string text = detail::trim(r->get<std::string>());
                if (!text.empty()) rationale = std::move(text);
            }
        }
        return {a, rationale};
    }

    // Prose form: "Rationale: ... Answer: Yes". Take the last answer marker;
    // chain-of-thought output states its final answer at the end.
    static const std::regex answer_re(R"([Aa]nswer\s*[:\-]?\s*['\"]?([Yy]es|[Nn]o)\b)");
    auto begin = std::sregex_iterator(raw_text.begin(), raw_text.end(), answer_re);
    auto end = std::sregex_iterator();
    if (begin == end) {
        throw SelectionParseError(SelectionParseErrorKind::NoJsonObject,
                                  "no JSON object or answer marker found (raw starts: \"" +
                                      first_line_excerpt(raw_text) + "\")");
    }
    std::smatch last;
    size_t answer_pos = 0;
    for (auto it = begin; it != end; ++it) {
        last = *it;
        answer_pos = static_cast<size_t>(it->position(0));
    }
    Answer a = read_answer(last[1].str());
    std::optional<std::string> rationale;
    if (mode == SelectionMode::Cot) {
        std::string prefix = raw_text.substr(0, answer_pos);
        static const std::regex rationale_re(R"([Rr]ationale\s*:\s*)");
        std::smatch rm;
        if (std::regex_search(prefix, rm, rationale_re)) {
            prefix = prefix.substr(static_cast<size_t>(rm.position(0)) + rm.length(0));
        }
        std::string text = detail::trim(prefix);
        if (!text.empty()) rationale = std::move(text);
    }
    return {a, rationale};
}

std::vector<UserStory> parse_user_stories_text(const std::string& text) {
    std::vector<UserStory> stories;
    for (const auto& raw_line : detail::split_lines(text)) {
        std::string line = detail::trim(strip_list_marker(raw_line));
        if (line.empty()) continue;
        if (line.back() == ':') continue; // preamble ("Here are the user stories:")
        if (auto story = parse_story_line(line)) {
            stories.push_back(std::move(*story));
        } else {
            stories.push_back(UserStory{"", "", "", line});
        }
    }
    return stories;
}

std::string user_story_prompt(const AppDescription& app) {
    return "Task: Read the following mobile app description and summarize a list of user stories "
           "that the app supports. Write one user story per line in the form: As a [actor], I "
           "want to [action] so that [goal].\n"
           "App Description: " +
           app.full_text +
           "\n"
           "User Stories:";
}

std::string use_case_prompt(const UserStory& story, const AppDescription& app) {
    return "Task: Read the following user story and mobile app description. Generate a use case "
           "that describes how the user story would be realized, including the preconditions, "
           "flow of events, and postconditions. Respond with JSON in the following format: "
           "{\"preconditions\": [\"condition1\", \"condition2\"], \"flow\": [\"step1\", "
           "\"step2\"], \"postconditions\": [\"postcondition1\"]}\n"
           "App Description Summary: " +
           app.summary +
           "\n"
           "User Story: " +
           story.raw_text +
           "\n"
           "Use Case:";
}

std::vector<UserStory> generate_user_stories(PipelineContext& ctx, const AppDescription& app) {
    if (detail::trim(app.full_text).empty()) {
        throw std::invalid_argument("app description text is empty");
    }
    const std::string raw =
        ctx.gateway.complete(ctx.gateway.make_request(user_story_prompt(app)), ctx.mode);
    auto stories = parse_user_stories_text(raw);
    if (stories.empty()) {
        throw PipelineError(PipelineErrorKind::NoStories,
                            "no user stories extracted (raw starts: \"" + first_line_excerpt(raw) +
                                "\")");
    }
    return stories;
}

UseCase generate_use_case(PipelineContext& ctx, const UserStory& story, const AppDescription& app,
                          std::string id) {
    if (detail::trim(story.raw_text).empty()) {
        throw std::invalid_argument("user story text is empty");
    }
    const std::string raw =
        ctx.gateway.complete(ctx.gateway.make_request(use_case_prompt(story, app)), ctx.mode);
    auto extracted = extract_first_json_object(raw);
    if (!extracted) {
        throw PipelineError(PipelineErrorKind::ExtractionFailed,
                            "no JSON object in use-case output (starts: \"" +
                                first_line_excerpt(raw) + "\")");
    }
    UseCase uc = parse_use_case(*extracted);
    uc.id = std::move(id);
    return uc;
}

SelectionResult select(PipelineContext& ctx, const UseCase& uc, const LegalProvision& provision,
                       const AppDescription& app, SelectionMode mode) {
    const PromptTemplate& t = ctx.prompts.get(
        mode == SelectionMode::YesNo ? TemplateName::YesNo : TemplateName::Cot);
    const std::string raw =
        ctx.gateway.complete(ctx.gateway.make_request(render(t, provision, app, uc)), ctx.mode);
    auto [answer, rationale] = parse_selection(raw, mode);
    return SelectionResult{uc.id, mode, answer, std::move(rationale), raw};
}

ModificationResult modify(PipelineContext& ctx, const UseCase& uc,
                          const LegalProvision& provision, const AppDescription& app,
                          ModificationMode mode) {
    const PromptTemplate& t = ctx.prompts.get(mode == ModificationMode::EditScript
                                                  ? TemplateName::ModificationEditScript
                                                  : TemplateName::ModificationDirect);
    const std::string raw =
        ctx.gateway.complete(ctx.gateway.make_request(render(t, provision, app, uc)), ctx.mode);
    auto parsed = parse_modification(raw, uc, mode);
    return ModificationResult{uc.id, mode, std::move(parsed.change_list),
                              std::move(parsed.modified), raw};
}

PipelineRun run_pipeline(PipelineContext& ctx, const std::vector<UseCase>& corpus,
                         const LegalProvision& provision, const AppDescription& app,
                         const PipelineConfig& config) {
    PipelineRun run;
    run.provision_id = provision.provision_id;
    run.app_id = app.app_id;
    run.model_name = ctx.gateway.config().model_name;
    run.temperature = ctx.gateway.config().temperature;
    run.gateway_mode = ctx.mode;
    run.selection_mode = config.selection_mode;
    run.modification_mode = config.modification_mode;
    run.forced_ids = config.forced_ids;

    for (const auto& forced : config.forced_ids) {
        if (std::none_of(corpus.begin(), corpus.end(),
                         [&](const UseCase& uc) { return uc.id == forced; })) {
            throw ConfigError("forced id not in corpus: " + forced);
        }
    }

    {
        detail::ojson seed = detail::ojson::object();
        seed["provision_id"] = run.provision_id;
        seed["model_name"] = run.model_name;
        seed["temperature"] = run.temperature;
        seed["selection_mode"] = to_string(run.selection_mode);
        seed["modification_mode"] = to_string(config.modification_mode);
        seed["forced_ids"] = run.forced_ids;
        detail::ojson ids = detail::ojson::array();
        for (const auto& uc : corpus) ids.push_back(uc.id);
        seed["corpus"] = std::move(ids);
        run.run_id = detail::sha256_hex(seed.dump()).substr(0, 16);
    }

    const int permits = ctx.gateway.config().permits;

    std::vector<std::optional<SelectionResult>> selected(corpus.size());
    std::vector<std::optional<ItemError>> selection_errors(corpus.size());
    for_each_item(corpus, permits, [&](size_t i) {
        try {
            selected[i] = select(ctx, corpus[i], provision, app, run.selection_mode);
        } catch (const std::exception& e) {
            selection_errors[i] = ItemError{corpus[i].id, error_kind_of(e), e.what()};
        }
    });
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (selected[i]) run.selections.push_back(std::move(*selected[i]));
        if (selection_errors[i]) run.selection_errors.push_back(std::move(*selection_errors[i]));
    }

    // Fig.-1 gate: modify only yes-flagged use cases, plus explicit forces.
    std::vector<size_t> to_modify;
    for (size_t i = 0; i < corpus.size(); ++i) {
        const std::string& id = corpus[i].id;
        bool flagged = std::any_of(run.selections.begin(), run.selections.end(),
                                   [&](const SelectionResult& s) {
                                       return s.use_case_id == id && s.answer == Answer::Yes;
                                   });
        bool forced = std::find(config.forced_ids.begin(), config.forced_ids.end(), id) !=
                      config.forced_ids.end();
        if (flagged || forced) to_modify.push_back(i);
    }

    std::vector<std::optional<ModificationResult>> modified(to_modify.size());
    std::vector<std::optional<ItemError>> modification_errors(to_modify.size());
    for_each_item(to_modify, permits, [&](size_t k) {
        const UseCase& uc = corpus[to_modify[k]];
        try {
            modified[k] = modify(ctx, uc, provision, app, config.modification_mode);
        } catch (const std::exception& e) {
            modification_errors[k] = ItemError{uc.id, error_kind_of(e), e.what()};
        }
    });
    for (size_t k = 0; k < to_modify.size(); ++k) {
        if (modified[k]) run.modifications.push_back(std::move(*modified[k]));
        if (modification_errors[k]) {
            run.modification_errors.push_back(std::move(*modification_errors[k]));
        }
    }
    return run;
}

detail::ojson selection_result_to_json(const SelectionResult& s) {
    detail::ojson j = detail::ojson::object();
    j["use_case_id"] = s.use_case_id;
    j["mode"] = to_string(s.mode);
    j["answer"] = to_string(s.answer);
    if (s.rationale) j["rationale"] = *s.rationale;
    j["raw_text"] = s.raw_text;
    return j;
}

detail::ojson modification_result_to_json(const ModificationResult& m) {
    detail::ojson j = detail::ojson::object();
    j["use_case_id"] = m.use_case_id;
    j["mode"] = to_string(m.mode);
    j["change_list"] = change_list_to_json(m.change_list);
    j["modified"] = use_case_to_json(m.modified);
    j["raw_text"] = m.raw_text;
    return j;
}

namespace {

detail::ojson item_error_to_json(const ItemError& e) {
    detail::ojson j = detail::ojson::object();
    j["use_case_id"] = e.use_case_id;
    j["kind"] = e.kind;
    j["message"] = e.message;
    return j;
}

ItemError item_error_from_json(const detail::ojson& j) {
    ItemError e;
    e.use_case_id = j.value("use_case_id", "");
    e.kind = j.value("kind", "");
    e.message = j.value("message", "");
    return e;
}

std::string require_string(const detail::ojson& j, const char* key, const char* what) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ParseError(ParseErrorKind::MissingKey,
                         std::string(what) + ": missing string key \"" + key + "\"");
    }
    return j.at(key).get<std::string>();
}

} // namespace

detail::ojson run_to_json(const PipelineRun& run) {
    detail::ojson j = detail::ojson::object();
    j["run_id"] = run.run_id;
    j["provision_id"] = run.provision_id;
    j["app_id"] = run.app_id;
    j["model_name"] = run.model_name;
    j["temperature"] = run.temperature;
    j["gateway_mode"] = to_string(run.gateway_mode);
    j["selection_mode"] = to_string(run.selection_mode);
    if (run.modification_mode) j["modification_mode"] = to_string(*run.modification_mode);
    j["forced_ids"] = run.forced_ids;
    detail::ojson selections = detail::ojson::array();
    for (const auto& s : run.selections) selections.push_back(selection_result_to_json(s));
    j["selections"] = std::move(selections);
    detail::ojson sel_errors = detail::ojson::array();
    for (const auto& e : run.selection_errors) sel_errors.push_back(item_error_to_json(e));
    j["selection_errors"] = std::move(sel_errors);
    detail::ojson mods = detail::ojson::array();
    for (const auto& m : run.modifications) mods.push_back(modification_result_to_json(m));
    j["modifications"] = std::move(mods);
    detail::ojson mod_errors = detail::ojson::array();
    for (const auto& e : run.modification_errors) mod_errors.push_back(item_error_to_json(e));
    j["modification_errors"] = std::move(mod_errors);
    return j;
}

PipelineRun run_from_json(const detail::ojson& j) {
    if (!j.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "run document: root must be an object");
    }
    PipelineRun run;
    run.run_id = j.value("run_id", "");
    run.provision_id = require_string(j, "provision_id", "run document");
    run.app_id = j.value("app_id", "");
    run.model_name = j.value("model_name", "");
    run.temperature = j.value("temperature", 0.0);
    if (auto mode = gateway_mode_from_string(j.value("gateway_mode", "replay"))) {
        run.gateway_mode = *mode;
    }
    auto sel_mode = selection_mode_from_string(require_string(j, "selection_mode", "run document"));
    if (!sel_mode) {
        throw ParseError(ParseErrorKind::WrongShape, "run document: bad selection_mode");
    }
    run.selection_mode = *sel_mode;
    if (j.contains("modification_mode")) {
        auto mode = modification_mode_from_string(j.at("modification_mode").get<std::string>());
        if (!mode) {
            throw ParseError(ParseErrorKind::WrongShape, "run document: bad modification_mode");
        }
        run.modification_mode = mode;
    }
    if (j.contains("forced_ids")) {
        run.forced_ids = j.at("forced_ids").get<std::vector<std::string>>();
    }
    for (const auto& s : j.value("selections", detail::ojson::array())) {
        SelectionResult r;
        r.use_case_id = require_string(s, "use_case_id", "selection");
        auto mode = selection_mode_from_string(require_string(s, "mode", "selection"));
        if (!mode) throw ParseError(ParseErrorKind::WrongShape, "selection: bad mode");
        r.mode = *mode;
        std::string answer = require_string(s, "answer", "selection");
        if (answer == "yes") {
            r.answer = Answer::Yes;
        } else if (answer == "no") {
            r.answer = Answer::No;
        } else {
            throw ParseError(ParseErrorKind::WrongShape, "selection: bad answer");
        }
        if (s.contains("rationale") && s.at("rationale").is_string()) {
            r.rationale = s.at("rationale").get<std::string>();
        }
        r.raw_text = s.value("raw_text", "");
        run.selections.push_back(std::move(r));
    }
    for (const auto& e : j.value("selection_errors", detail::ojson::array())) {
        run.selection_errors.push_back(item_error_from_json(e));
    }
    for (const auto& m : j.value("modifications", detail::ojson::array())) {
        ModificationResult r;
        r.use_case_id = require_string(m, "use_case_id", "modification");
        auto mode = modification_mode_from_string(require_string(m, "mode", "modification"));
        if (!mode) throw ParseError(ParseErrorKind::WrongShape, "modification: bad mode");
        r.mode = *mode;
        if (!m.contains("change_list")) {
            throw ParseError(ParseErrorKind::MissingKey, "modification: missing change_list");
        }
        r.change_list = change_list_from_json(m.at("change_list"));
        if (!m.contains("modified")) {
            throw ParseError(ParseErrorKind::MissingKey, "modification: missing modified");
        }
        r.modified = use_case_from_json(m.at("modified"));
        r.raw_text = m.value("raw_text", "");
        run.modifications.push_back(std::move(r));
    }
    for (const auto& e : j.value("modification_errors", detail::ojson::array())) {
        run.modification_errors.push_back(item_error_from_json(e));
    }
    return run;
}

std::string error_kind_of(const std::exception& e) {
    if (auto* p = dynamic_cast<const ParseError*>(&e)) {
        return std::string("parse/") + to_string(p->kind());
    }
    if (auto* p = dynamic_cast<const ApplyError*>(&e)) {
        return std::string("apply/") + to_string(p->kind());
    }
    if (auto* p = dynamic_cast<const GatewayError*>(&e)) {
        return std::string("gateway/") + to_string(p->kind());
    }
    if (auto* p = dynamic_cast<const SelectionParseError*>(&e)) {
        return std::string("selection-parse/") + to_string(p->kind());
    }
    if (auto* p = dynamic_cast<const PipelineError*>(&e)) {
        return std::string("pipeline/") + to_string(p->kind());
    }
    if (auto* p = dynamic_cast<const RenderError*>(&e)) {
        return std::string("render/") + to_string(p->kind());
    }
    return "error";
}

const char* to_string(SelectionParseErrorKind kind) {
    switch (kind) {
        case SelectionParseErrorKind::NoJsonObject: return "no-json-object";
        case SelectionParseErrorKind::AnswerMissing: return "answer-missing";
        case SelectionParseErrorKind::InvalidAnswer: return "invalid-answer";
    }
    return "unknown";
}

const char* to_string(PipelineErrorKind kind) {
    switch (kind) {
        case PipelineErrorKind::NoStories: return "no-stories";
        case PipelineErrorKind::ExtractionFailed: return "extraction-failed";
    }
    return "unknown";
}

} // namespace ucc
