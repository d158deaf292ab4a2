#include <doctest.h>

#include "ucc/corpus.hpp"
#include "ucc/errors.hpp"
#include "ucc/pipeline.hpp"

#include "support/paper_fixtures.hpp"
#include "support/testutil.hpp"

using namespace ucc;

namespace {

struct Fixture {
    PromptLibrary prompts = PromptLibrary::load_dir(ucctest::prompts_dir());
    LegalProvision provision =
        load_provision(ucctest::fixtures_dir() / "provisions" / "ccpa_7028a_optin.json");
    AppDescription app =
        load_app_description(ucctest::fixtures_dir() / "app" / "echotales.json");
    std::vector<ExchangeRecord> records;

    void canned(const std::string& prompt, const std::string& response) {
        LlmRequest req;
        req.prompt = prompt;
        records.push_back({request_hash(req), req, response, "2025-11-05T00:00:00Z"});
    }
    void canned_selection(const UseCase& uc, SelectionMode mode, const std::string& response) {
        const auto& t = prompts.get(mode == SelectionMode::YesNo ? TemplateName::YesNo
                                                                 : TemplateName::Cot);
        canned(render(t, provision, app, uc), response);
    }
    void canned_modification(const UseCase& uc, ModificationMode mode,
                             const std::string& response) {
        const auto& t = prompts.get(mode == ModificationMode::EditScript
                                        ? TemplateName::ModificationEditScript
                                        : TemplateName::ModificationDirect);
        canned(render(t, provision, app, uc), response);
    }
    GatewayConfig config() const {
        GatewayConfig cfg;
        cfg.api_key_env = "UCC_TEST_API_KEY";
        return cfg;
    }
};

UseCase small_use_case(const std::string& id) {
    UseCase uc;
    uc.id = id;
    uc.preconditions = {"The user is logged in."};
    uc.flow = {"The user opens the app.", "The app shares the profile with a partner."};
    uc.postconditions = {"The profile has been shared."};
    return uc;
}

} // namespace

TEST_CASE("extract_first_json_object finds objects amid prose and fences") {
    CHECK(extract_first_json_object(R"({"a":1})") == R"({"a":1})");
    CHECK(extract_first_json_object("noise before {\"a\": {\"b\": 2}} noise after") ==
          "{\"a\": {\"b\": 2}}");
    CHECK(extract_first_json_object("```json\n{\"x\": \"y\"}\n```") == "{\"x\": \"y\"}");
    CHECK(extract_first_json_object("text with braces {not json} then {\"ok\": true}") ==
          "{\"ok\": true}");
    CHECK(extract_first_json_object("a string \"{ not an object }\" only") == std::nullopt);
    CHECK(extract_first_json_object("no objects here") == std::nullopt);
    CHECK(extract_first_json_object("{\"s\": \"brace } inside string\"}") ==
          "{\"s\": \"brace } inside string\"}");
    CHECK(extract_first_json_object("[1, 2, 3]") == std::nullopt);
}

TEST_CASE("parse_selection reads JSON answers case-insensitively") {
    auto [yes, none] = parse_selection(R"({"Answer": "Yes"})", SelectionMode::YesNo);
    CHECK(yes == Answer::Yes);
    CHECK_FALSE(none.has_value());

    auto [no, rationale] = parse_selection(
        "```json\n{\"Rationale\": \"does not involve personal information\", \"Answer\": "
        "\"No\"}\n```",
        SelectionMode::Cot);
    CHECK(no == Answer::No);
    CHECK(rationale == "does not involve personal information");

    auto [upper, r2] = parse_selection(R"({"ANSWER": "NO"})", SelectionMode::Cot);
    CHECK(upper == Answer::No);
    CHECK_FALSE(r2.has_value());

    auto [padded, r3] = parse_selection(R"({"answer": "  yes  "})", SelectionMode::YesNo);
    CHECK(padded == Answer::Yes);
}

TEST_CASE("parse_selection handles the prose chain-of-thought form") {
    auto [ans, rationale] = parse_selection(
        "Rationale: The flow shares the profile with a partner without the two-step process.\n"
        "Answer: Yes",
        SelectionMode::Cot);
    CHECK(ans == Answer::Yes);
    REQUIRE(rationale.has_value());
    CHECK(rationale->find("two-step process") != std::string::npos);
}

TEST_CASE("parse_selection error kinds") {
    auto kind_of = [](const char* raw, SelectionMode mode) {
        try {
            parse_selection(raw, mode);
        } catch (const SelectionParseError& e) {
            return e.kind();
        }
        FAIL("expected SelectionParseError");
        return SelectionParseErrorKind::NoJsonObject;
    };
    CHECK(kind_of(R"({"Answer": "Maybe"})", SelectionMode::YesNo) ==
          SelectionParseErrorKind::InvalidAnswer);
    CHECK(kind_of(R"({"Answer": true})", SelectionMode::YesNo) ==
          SelectionParseErrorKind::InvalidAnswer);
    CHECK(kind_of(R"({"Verdict": "Yes"})", SelectionMode::YesNo) ==
          SelectionParseErrorKind::AnswerMissing);
    CHECK(kind_of("the model rambled with no verdict at all", SelectionMode::Cot) ==
          SelectionParseErrorKind::NoJsonObject);
}

TEST_CASE("parse_user_stories_text parses structured stories and keeps stragglers") {
    auto stories = parse_user_stories_text(
        "Here are the user stories:\n"
        "- As a user, I want to discover audiobooks so that I can enjoy stories.\n"
        "2. As an admin, I want to review flagged content for the purpose of keeping the "
        "catalog safe.\n"
        "\n"
        "something that is not a story\n");
    REQUIRE(stories.size() == 3);
    CHECK(stories[0].actor == "user");
    CHECK(stories[0].action == "discover audiobooks");
    CHECK(stories[0].goal == "I can enjoy stories");
    CHECK(stories[1].actor == "admin");
    CHECK(stories[1].goal == "keeping the catalog safe");
    CHECK(stories[2].actor.empty());
    CHECK(stories[2].raw_text == "something that is not a story");
}

TEST_CASE("generate_user_stories replays a fixture transcript of five stories") {
    Fixture fx;
    const std::string transcript =
        "Here are the user stories:\n"
        "- As a user, I want to discover audiobooks so that I can enjoy stories.\n"
        "- As a listener, I want to set a sleep timer so that playback stops.\n"
        "- As a member, I want to download audiobooks so that I can listen offline.\n"
        "- As a reader, I want to receive recommendations so that I can find books.\n"
        "- As a subscriber, I want to sync progress so that I can continue anywhere.\n";
    fx.canned(user_story_prompt(fx.app), transcript);
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    auto stories = generate_user_stories(ctx, fx.app);
    CHECK(stories.size() == 5);
    for (const auto& s : stories) CHECK_FALSE(s.actor.empty());
}

TEST_CASE("generate_user_stories rejects an empty app description") {
    Fixture fx;
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    AppDescription empty{"x", "   ", "s"};
    CHECK_THROWS_AS(generate_user_stories(ctx, empty), std::invalid_argument);
}

TEST_CASE("generate_use_case parses fenced JSON output") {
    Fixture fx;
    UserStory story{"user", "discover audiobooks", "enjoy stories",
                    "As a user, I want to discover audiobooks so that I can enjoy stories."};
    fx.canned(use_case_prompt(story, fx.app),
              "```json\n{\"preconditions\": [\"p\"], \"flow\": [\"f\"], \"postconditions\": "
              "[]}\n```");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    UseCase uc = generate_use_case(ctx, story, fx.app, "uc-gen-1");
    CHECK(uc.id == "uc-gen-1");
    CHECK(uc.flow == std::vector<std::string>{"f"});
}

TEST_CASE("generate_use_case surfaces prose with no JSON as an extraction error") {
    Fixture fx;
    UserStory story{"", "", "", "As a user, I want something."};
    fx.canned(use_case_prompt(story, fx.app), "I cannot produce JSON today, sorry.");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    try {
        generate_use_case(ctx, story, fx.app, "x");
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.kind() == PipelineErrorKind::ExtractionFailed);
    }
}

TEST_CASE("select renders, completes, and parses per mode") {
    Fixture fx;
    UseCase uc = small_use_case("uc-t1");
    fx.canned_selection(uc, SelectionMode::Cot,
                        R"({"Rationale": "shares the profile without the two-step opt-in process", "Answer": "Yes"})");
    fx.canned_selection(uc, SelectionMode::YesNo, R"({"Answer": "No"})");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};

    SelectionResult cot = select(ctx, uc, fx.provision, fx.app, SelectionMode::Cot);
    CHECK(cot.use_case_id == "uc-t1");
    CHECK(cot.answer == Answer::Yes);
    REQUIRE(cot.rationale.has_value());
    CHECK(cot.rationale->find("two-step opt-in process") != std::string::npos);
    CHECK_FALSE(cot.raw_text.empty());

    SelectionResult plain = select(ctx, uc, fx.provision, fx.app, SelectionMode::YesNo);
    CHECK(plain.answer == Answer::No);
    CHECK_FALSE(plain.rationale.has_value());
}

TEST_CASE("modify in editscript mode applies the returned change list") {
    Fixture fx;
    UseCase uc = small_use_case("uc-t2");
    fx.canned_modification(
        uc, ModificationMode::EditScript,
        R"({"ops": [
            {"op": "insert_pre", "text": "The user has previously opted out of the sale or sharing of their personal information."},
            {"op": "insert_flow", "at_index": 1, "text": "The user clearly requests to opt-in."},
            {"op": "insert_flow", "at_index": 2, "text": "The user separately confirms their choice to opt-in."},
            {"op": "insert_post", "text": "The user's consent has been recorded."}
        ]})");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    ModificationResult result = modify(ctx, uc, fx.provision, fx.app,
                                       ModificationMode::EditScript);
    CHECK(result.change_list.ops.size() == 4);
    CHECK(result.modified == apply(result.change_list, uc));
    CHECK(result.modified.flow.size() == 4);
    CHECK(result.modified.id == "uc-t2");
}

TEST_CASE("modify in direct mode recovers the change list by diffing") {
    Fixture fx;
    UseCase uc = small_use_case("uc-t3");
    UseCase modified = uc;
    modified.flow.insert(modified.flow.begin() + 1, "The user clearly requests to opt-in.");
    modified.id.clear(); // the model echoes content, not metadata
    fx.canned_modification(uc, ModificationMode::Direct, serialize_use_case(modified));
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    ModificationResult result = modify(ctx, uc, fx.provision, fx.app, ModificationMode::Direct);
    CHECK(result.modified.id == "uc-t3"); // stamped back from the original
    REQUIRE(result.change_list.ops.size() == 1);
    CHECK(result.change_list.ops[0] == insert_flow(1, "The user clearly requests to opt-in."));
    CHECK(apply(result.change_list, uc) == result.modified);
}

TEST_CASE("modify surfaces an out-of-range index with the offending op") {
    Fixture fx;
    UseCase uc = small_use_case("uc-t4");
    fx.canned_modification(uc, ModificationMode::EditScript,
                           R"({"ops": [{"op": "insert_flow", "at_index": 99, "text": "x"}]})");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    try {
        modify(ctx, uc, fx.provision, fx.app, ModificationMode::EditScript);
        FAIL("expected ApplyError");
    } catch (const ApplyError& e) {
        CHECK(e.kind() == ApplyErrorKind::IndexOutOfRange);
        REQUIRE(e.op().has_value());
        CHECK(e.op()->at_index == 99);
    }
}

TEST_CASE("run_pipeline gates modification on yes answers plus forced ids") {
    Fixture fx;
    UseCase yes_uc = small_use_case("uc-yes");
    UseCase no_uc = small_use_case("uc-no");
    UseCase forced_uc = small_use_case("uc-forced");
    const char* mod_response = R"({"ops": [{"op": "insert_pre", "text": "opted out before"}]})";
    fx.canned_selection(yes_uc, SelectionMode::Cot, R"({"Rationale": "r", "Answer": "Yes"})");
    fx.canned_selection(no_uc, SelectionMode::Cot, R"({"Rationale": "r", "Answer": "No"})");
    fx.canned_selection(forced_uc, SelectionMode::Cot, R"({"Rationale": "r", "Answer": "No"})");
    fx.canned_modification(yes_uc, ModificationMode::EditScript, mod_response);
    fx.canned_modification(forced_uc, ModificationMode::EditScript, mod_response);
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};

    PipelineConfig config;
    config.forced_ids = {"uc-forced"};
    PipelineRun run = run_pipeline(ctx, {yes_uc, no_uc, forced_uc}, fx.provision, fx.app, config);

    CHECK(run.selections.size() == 3);
    REQUIRE(run.modifications.size() == 2);
    CHECK(run.modifications[0].use_case_id == "uc-yes");
    CHECK(run.modifications[1].use_case_id == "uc-forced");
    CHECK(run.selection_errors.empty());
    CHECK(run.modification_errors.empty());
    CHECK_FALSE(run.run_id.empty());

    // Gate invariant: every unforced modification id answered yes.
    for (const auto& m : run.modifications) {
        bool forced = m.use_case_id == "uc-forced";
        bool answered_yes = false;
        for (const auto& s : run.selections) {
            if (s.use_case_id == m.use_case_id && s.answer == Answer::Yes) answered_yes = true;
        }
        CHECK((forced || answered_yes));
    }
}

TEST_CASE("run_pipeline records per-item failures without aborting") {
    Fixture fx;
    UseCase ok_uc = small_use_case("uc-ok");
    UseCase bad_uc = small_use_case("uc-bad"); // cache miss on selection
    fx.canned_selection(ok_uc, SelectionMode::Cot, R"({"Rationale": "r", "Answer": "No"})");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};

    PipelineRun run = run_pipeline(ctx, {ok_uc, bad_uc}, fx.provision, fx.app, PipelineConfig{});
    CHECK(run.selections.size() == 1);
    REQUIRE(run.selection_errors.size() == 1);
    CHECK(run.selection_errors[0].use_case_id == "uc-bad");
    CHECK(run.selection_errors[0].kind == "gateway/cache-miss");
    CHECK(run.has_item_errors());
}

TEST_CASE("run_pipeline on an empty corpus is an empty run") {
    Fixture fx;
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    PipelineRun run = run_pipeline(ctx, {}, fx.provision, fx.app, PipelineConfig{});
    CHECK(run.selections.empty());
    CHECK(run.modifications.empty());
    CHECK_FALSE(run.has_item_errors());
}

TEST_CASE("run_pipeline rejects forced ids that are not in the corpus") {
    Fixture fx;
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    PipelineConfig config;
    config.forced_ids = {"ghost"};
    CHECK_THROWS_AS(
        run_pipeline(ctx, {small_use_case("uc-1")}, fx.provision, fx.app, config),
        ConfigError);
}

TEST_CASE("run documents survive a JSON round trip") {
    Fixture fx;
    UseCase uc = small_use_case("uc-rt");
    fx.canned_selection(uc, SelectionMode::Cot, R"({"Rationale": "why", "Answer": "Yes"})");
    fx.canned_modification(uc, ModificationMode::EditScript,
                           R"({"ops": [{"op": "insert_pre", "text": "p2"}]})");
    LlmGateway gateway(fx.config(), fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    PipelineRun run = run_pipeline(ctx, {uc}, fx.provision, fx.app, PipelineConfig{});

    PipelineRun back = run_from_json(run_to_json(run));
    CHECK(back.run_id == run.run_id);
    CHECK(back.selections.size() == run.selections.size());
    CHECK(back.selections[0].rationale == run.selections[0].rationale);
    CHECK(back.modifications.size() == 1);
    CHECK(back.modifications[0].change_list == run.modifications[0].change_list);
    CHECK(back.modifications[0].modified == run.modifications[0].modified);
    CHECK(run_to_json(back).dump(2) == run_to_json(run).dump(2));
}

TEST_CASE("run_pipeline with permits > 1 joins results in corpus order") {
    Fixture fx;
    std::vector<UseCase> corpus;
    for (int i = 0; i < 12; ++i) {
        UseCase uc = small_use_case("uc-p" + std::to_string(i));
        fx.canned_selection(uc, SelectionMode::Cot,
                            i % 2 == 0 ? R"({"Rationale": "r", "Answer": "No"})"
                                       : R"({"Rationale": "r", "Answer": "Yes"})");
        if (i % 2 == 1) {
            fx.canned_modification(uc, ModificationMode::EditScript,
                                   R"({"ops": [{"op": "insert_pre", "text": "p2"}]})");
        }
        corpus.push_back(std::move(uc));
    }
    auto cfg = fx.config();
    cfg.permits = 4;
    LlmGateway gateway(cfg, fx.records);
    PipelineContext ctx{gateway, fx.prompts, GatewayMode::Replay};
    PipelineRun run = run_pipeline(ctx, corpus, fx.provision, fx.app, PipelineConfig{});
    REQUIRE(run.selections.size() == 12);
    for (int i = 0; i < 12; ++i) {
        CHECK(run.selections[static_cast<size_t>(i)].use_case_id ==
              "uc-p" + std::to_string(i));
    }
    REQUIRE(run.modifications.size() == 6);
    CHECK(run.modifications[0].use_case_id == "uc-p1");
    CHECK(run.modifications[5].use_case_id == "uc-p11");
}
