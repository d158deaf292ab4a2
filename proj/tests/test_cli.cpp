#include <doctest.h>

#include "ucc/cli.hpp"
#include "ucc/corpus.hpp"
#include "ucc/detail/jsonio.hpp"
#include "ucc/evalharness.hpp"
#include "ucc/pipeline.hpp"

#include "support/paper_fixtures.hpp"
#include "support/testutil.hpp"

using namespace ucc;
using ucc::cli::execute;

namespace {

std::string fx(const char* rel) { return (ucctest::fixtures_dir() / rel).string(); }

std::vector<std::string> with_replay_gateway(std::vector<std::string> args) {
    args.insert(args.end(), {"--mode", "replay", "--cache", fx("cache/replay_cache.jsonl"),
                             "--templates", ucctest::prompts_dir().string()});
    return args;
}

} // namespace

TEST_CASE("diff and apply round-trip through files") {
    ucctest::TempDir tmp;
    const auto from = tmp.path() / "from.json";
    const auto to = tmp.path() / "to.json";
    const auto changes = tmp.path() / "cl.json";
    const auto out = tmp.path() / "out.json";
    write_text_file(from, serialize_use_case(ucctest::discovery_use_case()));
    write_text_file(to, serialize_use_case(ucctest::discovery_modified_use_case()));

    CHECK(execute({"diff", "--from", from.string(), "--to", to.string(), "--out",
                   changes.string()}) == cli::kExitOk);
    CHECK(execute({"apply", "--use-case", from.string(), "--changes", changes.string(), "--out",
                   out.string()}) == cli::kExitOk);
    CHECK(parse_use_case(read_text_file(out)) == ucctest::discovery_modified_use_case());
}

TEST_CASE("diff of a file with itself is an empty change list") {
    ucctest::TempDir tmp;
    const auto a = tmp.path() / "a.json";
    const auto out = tmp.path() / "cl.json";
    write_text_file(a, serialize_use_case(ucctest::discovery_use_case()));
    CHECK(execute({"diff", "--from", a.string(), "--to", a.string(), "--out", out.string()}) ==
          cli::kExitOk);
    CHECK(parse_change_list(read_text_file(out)).ops.empty());
}

TEST_CASE("apply writes the modified use case for the opt-in change list") {
    ucctest::TempDir tmp;
    const auto uc_path = tmp.path() / "uc.json";
    const auto cl_path = tmp.path() / "cl.json";
    const auto out = tmp.path() / "modified.json";
    write_text_file(uc_path, serialize_use_case(ucctest::discovery_use_case()));
    write_text_file(cl_path, change_list_to_json(ucctest::discovery_opt_in_changes()).dump(2));
    CHECK(execute({"apply", "--use-case", uc_path.string(), "--changes", cl_path.string(),
                   "--out", out.string()}) == cli::kExitOk);
    CHECK(parse_use_case(read_text_file(out)) == ucctest::discovery_modified_use_case());
}

TEST_CASE("run in replay mode completes the fixture corpus and is deterministic") {
    ucctest::TempDir tmp;
    const auto out1 = tmp.path() / "run1.json";
    const auto out2 = tmp.path() / "run2.json";
    auto args = with_replay_gateway({"run", "--manifest", fx("corpus/manifest.json"),
                                     "--provision", fx("provisions/ccpa_7028a_optin.json"),
                                     "--selection-mode", "cot", "--modification-mode",
                                     "editscript"});
    auto args1 = args;
    args1.insert(args1.end(), {"--out", out1.string()});
    auto args2 = args;
    args2.insert(args2.end(), {"--out", out2.string()});
    CHECK(execute(args1) == cli::kExitOk);
    CHECK(execute(args2) == cli::kExitOk);
    CHECK(read_text_file(out1) == read_text_file(out2));

    PipelineRun run = run_from_json(detail::parse_json(read_text_file(out1), "run"));
    CHECK(run.selections.size() == 30);
    CHECK(run.modifications.size() == 12);
    CHECK_FALSE(run.has_item_errors());
}

TEST_CASE("select, eval, and report chain over the fixture corpus") {
    ucctest::TempDir tmp;
    const auto selections = tmp.path() / "yesno.json";
    const auto run_doc = tmp.path() / "cot_run.json";
    const auto report_doc = tmp.path() / "report.json";
    const auto table = tmp.path() / "tables.txt";

    CHECK(execute(with_replay_gateway(
              {"select", "--manifest", fx("corpus/manifest.json"), "--provision",
               fx("provisions/ccpa_7028a_optin.json"), "--selection-mode", "yes_no", "--out",
               selections.string()})) == cli::kExitOk);
    CHECK(execute(with_replay_gateway(
              {"run", "--manifest", fx("corpus/manifest.json"), "--provision",
               fx("provisions/ccpa_7028a_optin.json"), "--selection-mode", "cot",
               "--modification-mode", "editscript", "--out", run_doc.string()})) ==
          cli::kExitOk);
    CHECK(execute({"eval", "--run", selections.string(), "--run", run_doc.string(),
                   "--annotations", fx("annotations/optin_annotations.jsonl"), "--out",
                   report_doc.string()}) == cli::kExitOk);
    CHECK(execute({"report", "--report", report_doc.string(), "--out", table.string()}) ==
          cli::kExitOk);

    EvalReport report =
        eval_report_from_json(detail::parse_json(read_text_file(report_doc), "report"));
    REQUIRE(report.selection.size() == 2);
    CHECK(report.selection[0].mode == SelectionMode::YesNo);
    CHECK(report.selection[0].correct == 16);
    CHECK(report.selection[1].mode == SelectionMode::Cot);
    CHECK(report.selection[1].correct == 20);
    CHECK(report.selection[1].flagged == 12);
    CHECK(report.non_violative_count == 8);
    CHECK(report.self_consistent_count == 2);

    const std::string text = read_text_file(table);
    CHECK(text.find("53.3%") != std::string::npos);
    CHECK(text.find("66.7%") != std::string::npos);
}

TEST_CASE("modify consumes a selections document and honours --force") {
    ucctest::TempDir tmp;
    const auto selections = tmp.path() / "cot.json";
    const auto out = tmp.path() / "mods.json";
    CHECK(execute(with_replay_gateway(
              {"select", "--manifest", fx("corpus/manifest.json"), "--provision",
               fx("provisions/ccpa_7028a_optin.json"), "--selection-mode", "cot", "--out",
               selections.string()})) == cli::kExitOk);
    CHECK(execute(with_replay_gateway(
              {"modify", "--manifest", fx("corpus/manifest.json"), "--provision",
               fx("provisions/ccpa_7028a_optin.json"), "--selections", selections.string(),
               "--modification-mode", "editscript", "--out", out.string()})) == cli::kExitOk);
    PipelineRun run = run_from_json(detail::parse_json(read_text_file(out), "run"));
    CHECK(run.modifications.size() == 12);

    // Forcing an unflagged id adds a modification attempt; the fixture cache
    // has no response for it, so it lands in modification_errors and the exit
    // code signals per-item failures.
    const auto forced_out = tmp.path() / "forced.json";
    CHECK(execute(with_replay_gateway(
              {"modify", "--manifest", fx("corpus/manifest.json"), "--provision",
               fx("provisions/ccpa_7028a_optin.json"), "--selections", selections.string(),
               "--modification-mode", "editscript", "--force", "uc-002", "--out",
               forced_out.string()})) == cli::kExitItemErrors);
    PipelineRun forced = run_from_json(detail::parse_json(read_text_file(forced_out), "run"));
    CHECK(forced.modifications.size() == 12);
    REQUIRE(forced.modification_errors.size() == 1);
    CHECK(forced.modification_errors[0].use_case_id == "uc-002");
    CHECK(forced.modification_errors[0].kind == "gateway/cache-miss");
}

TEST_CASE("generate replays the recorded transcript into a fresh corpus") {
    ucctest::TempDir tmp;
    const auto out_dir = tmp.path() / "generated";
    CHECK(execute(with_replay_gateway({"generate", "--app", fx("app/echotales.json"),
                                       "--out-dir", out_dir.string()})) == cli::kExitOk);
    auto manifest = load_manifest(out_dir / "manifest.json");
    auto corpus = load_corpus(manifest);
    CHECK(corpus.size() == 5);
    for (const auto& uc : corpus) CHECK(validate(uc).empty());
    auto stories = detail::parse_json(read_text_file(out_dir / "stories.json"), "stories");
    CHECK(stories.at("stories").size() == 5);
}

TEST_CASE("config errors use a distinct exit code") {
    CHECK(execute({"run", "--mode", "replay", "--cache", "/does/not/exist.jsonl", "--manifest",
                   fx("corpus/manifest.json"), "--provision",
                   fx("provisions/ccpa_7028a_optin.json"), "--out", "/tmp/never.json"}) ==
          cli::kExitConfig);
    CHECK(execute({"no-such-command"}) == cli::kExitConfig);
    CHECK(execute({}) == cli::kExitConfig);
    CHECK(execute({"run", "--manifest", fx("corpus/manifest.json"), "--provision",
                   fx("provisions/ccpa_7028a_optin.json"), "--mode", "sideways", "--out",
                   "/tmp/never.json"}) == cli::kExitConfig);
    CHECK(execute({"eval", "--run", "/missing.json", "--annotations", "/missing.jsonl", "--out",
                   "/tmp/never.json"}) == cli::kExitConfig);
}

TEST_CASE("config file values apply and flags override them") {
    ucctest::TempDir tmp;
    const auto config = tmp.path() / "config.json";
    const auto out = tmp.path() / "run.json";
    detail::ojson cfg = detail::ojson::object();
    cfg["gateway_mode"] = "replay";
    cfg["cache_path"] = fx("cache/replay_cache.jsonl");
    cfg["templates_dir"] = ucctest::prompts_dir().string();
    cfg["manifest_path"] = fx("corpus/manifest.json");
    cfg["provision_path"] = fx("provisions/ccpa_7028a_optin.json");
    write_text_file(config, cfg.dump(2));
    CHECK(execute({"run", "--config", config.string(), "--selection-mode", "cot",
                   "--modification-mode", "editscript", "--out", out.string()}) == cli::kExitOk);

    // Unknown config keys are rejected.
    cfg["surprise"] = 1;
    write_text_file(config, cfg.dump(2));
    CHECK(execute({"run", "--config", config.string(), "--out", out.string()}) ==
          cli::kExitConfig);
}
