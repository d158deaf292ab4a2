#include "ucc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ucc/corpus.hpp"
#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"
#include "ucc/evalharness.hpp"
#include "ucc/gateway.hpp"
#include "ucc/pipeline.hpp"
#include "ucc/prompts.hpp"

namespace fs = std::filesystem;

namespace ucc::cli {

namespace {

struct CliConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model_name = "gpt-4o-2024-05-13";
    double temperature = 0.0;
    std::string gateway_mode = "replay";
    std::string cache_path;
    int permits = 1;
    int max_retries = 3;
    int timeout_ms = 30000;
    std::string templates_dir = "prompts";
    std::string manifest_path;
    std::string provision_path;
    std::vector<std::string> forced_ids;
};

CliConfig load_config_file(const fs::path& path) {
    detail::ojson j = detail::parse_json(read_text_file(path), "config");
    if (!j.is_object()) {
        throw ConfigError("config file must hold a JSON object: " + path.string());
    }
    CliConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "base_url") cfg.base_url = value.get<std::string>();
        else if (key == "model_name") cfg.model_name = value.get<std::string>();
        else if (key == "temperature") cfg.temperature = value.get<double>();
        else if (key == "gateway_mode") cfg.gateway_mode = value.get<std::string>();
        else if (key == "cache_path") cfg.cache_path = value.get<std::string>();
        else if (key == "permits") cfg.permits = value.get<int>();
        else if (key == "max_retries") cfg.max_retries = value.get<int>();
        else if (key == "timeout_ms") cfg.timeout_ms = value.get<int>();
        else if (key == "templates_dir") cfg.templates_dir = value.get<std::string>();
        else if (key == "manifest_path") cfg.manifest_path = value.get<std::string>();
        else if (key == "provision_path") cfg.provision_path = value.get<std::string>();
        else if (key == "forced_ids") cfg.forced_ids = value.get<std::vector<std::string>>();
        else throw ConfigError("config file: unknown key \"" + key + "\"");
    }
    return cfg;
}

// Flags given on the command line; set values override the config file.
struct FlagValues {
    std::optional<std::string> config_path;
    std::optional<std::string> base_url;
    std::optional<std::string> model_name;
    std::optional<double> temperature;
    std::optional<std::string> gateway_mode;
    std::optional<std::string> cache_path;
    std::optional<int> permits;
    std::optional<std::string> templates_dir;
    std::optional<std::string> manifest_path;
    std::optional<std::string> provision_path;
    std::vector<std::string> forced_ids;
};

void add_common_options(CLI::App* cmd, FlagValues& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--base-url", flags.base_url, "chat-completions base URL");
    cmd->add_option("--model", flags.model_name, "model name");
    cmd->add_option("--temperature", flags.temperature, "sampling temperature");
    cmd->add_option("--mode", flags.gateway_mode, "gateway mode: live|record|replay");
    cmd->add_option("--cache", flags.cache_path, "record/replay cache file (JSONL)");
    cmd->add_option("--permits", flags.permits, "max concurrent gateway requests");
    cmd->add_option("--templates", flags.templates_dir, "prompt template directory");
}

CliConfig resolve_config(const FlagValues& flags) {
    CliConfig cfg;
    if (flags.config_path) cfg = load_config_file(*flags.config_path);
    if (flags.base_url) cfg.base_url = *flags.base_url;
    if (flags.model_name) cfg.model_name = *flags.model_name;
    if (flags.temperature) cfg.temperature = *flags.temperature;
    if (flags.gateway_mode) cfg.gateway_mode = *flags.gateway_mode;
    if (flags.cache_path) cfg.cache_path = *flags.cache_path;
    if (flags.permits) cfg.permits = *flags.permits;
    if (flags.templates_dir) cfg.templates_dir = *flags.templates_dir;
    if (flags.manifest_path) cfg.manifest_path = *flags.manifest_path;
    if (flags.provision_path) cfg.provision_path = *flags.provision_path;
    for (const auto& id : flags.forced_ids) cfg.forced_ids.push_back(id);
    return cfg;
}

GatewayConfig gateway_config_from(const CliConfig& cfg) {
    auto mode = gateway_mode_from_string(cfg.gateway_mode);
    if (!mode) {
        throw ConfigError("unknown gateway mode: " + cfg.gateway_mode);
    }
    GatewayConfig gw;
    gw.base_url = cfg.base_url;
    gw.model_name = cfg.model_name;
    gw.temperature = cfg.temperature;
    gw.mode = *mode;
    gw.cache_path = cfg.cache_path;
    gw.permits = cfg.permits;
    gw.max_retries = cfg.max_retries;
    gw.timeout_ms = cfg.timeout_ms;
    return gw;
}

void write_json_doc(const fs::path& path, const detail::ojson& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void print_or_write(const std::optional<std::string>& out_path, const std::string& content) {
    if (out_path) {
        write_text_file(*out_path, content);
    } else {
        std::cout << content;
    }
}

struct LoadedCorpus {
    std::vector<UseCase> use_cases;
    AppDescription app;
    LegalProvision provision;
};

LoadedCorpus load_inputs(const CliConfig& cfg) {
    if (cfg.manifest_path.empty()) throw ConfigError("a corpus manifest is required (--manifest)");
    if (cfg.provision_path.empty()) throw ConfigError("a provision file is required (--provision)");
    CorpusManifest manifest = load_manifest(cfg.manifest_path);
    if (manifest.app_path.empty()) {
        throw ConfigError("corpus manifest has no \"app\" entry: " + cfg.manifest_path);
    }
    LoadedCorpus loaded{load_corpus(manifest), load_app_description(manifest.app_path),
                        load_provision(cfg.provision_path)};
    return loaded;
}

int cmd_generate(const CliConfig& cfg, const std::string& app_path, const std::string& out_dir) {
    AppDescription app = load_app_description(app_path);
    PromptLibrary prompts = PromptLibrary::load_dir(cfg.templates_dir);
    LlmGateway gateway(gateway_config_from(cfg));
    PipelineContext ctx{gateway, prompts, gateway.config().mode};

    auto stories = generate_user_stories(ctx, app);

    fs::create_directories(out_dir);
    detail::ojson stories_doc = detail::ojson::object();
    stories_doc["app_id"] = app.app_id;
    detail::ojson story_list = detail::ojson::array();
    for (const auto& s : stories) {
        detail::ojson row = detail::ojson::object();
        row["actor"] = s.actor;
        row["action"] = s.action;
        row["goal"] = s.goal;
        row["raw_text"] = s.raw_text;
        story_list.push_back(std::move(row));
    }
    stories_doc["stories"] = std::move(story_list);
    write_json_doc(fs::path(out_dir) / "stories.json", stories_doc);

    write_text_file(fs::path(out_dir) / "app.json", read_text_file(app_path));

    detail::ojson manifest = detail::ojson::object();
    manifest["app"] = "app.json";
    detail::ojson entries = detail::ojson::array();
    int item_errors = 0;
    for (size_t i = 0; i < stories.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "uc-gen-%03zu", i + 1);
        try {
            UseCase uc = generate_use_case(ctx, stories[i], app, id);
            const std::string file_name = std::string(id) + ".json";
            write_json_doc(fs::path(out_dir) / file_name, use_case_to_json(uc));
            detail::ojson entry = detail::ojson::object();
            entry["id"] = id;
            entry["path"] = file_name;
            entries.push_back(std::move(entry));
        } catch (const std::exception& e) {
            ++item_errors;
            std::cerr << "generate: " << id << ": [" << error_kind_of(e) << "] " << e.what()
                      << "\n";
        }
    }
    manifest["use_cases"] = std::move(entries);
    write_json_doc(fs::path(out_dir) / "manifest.json", manifest);
    std::cout << "generated " << manifest["use_cases"].size() << " use cases from "
              << stories.size() << " stories into " << out_dir << "\n";
    return item_errors > 0 ? kExitItemErrors : kExitOk;
}

int cmd_select(const CliConfig& cfg, const std::string& mode_str, const std::string& out_path) {
    auto mode = selection_mode_from_string(mode_str);
    if (!mode) throw ConfigError("unknown selection mode: " + mode_str);
    LoadedCorpus loaded = load_inputs(cfg);
    PromptLibrary prompts = PromptLibrary::load_dir(cfg.templates_dir);
    LlmGateway gateway(gateway_config_from(cfg));
    PipelineContext ctx{gateway, prompts, gateway.config().mode};

    PipelineRun run;
    run.provision_id = loaded.provision.provision_id;
    run.app_id = loaded.app.app_id;
    run.model_name = gateway.config().model_name;
    run.temperature = gateway.config().temperature;
    run.gateway_mode = ctx.mode;
    run.selection_mode = *mode;
    for (const auto& uc : loaded.use_cases) {
        try {
            run.selections.push_back(select(ctx, uc, loaded.provision, loaded.app, *mode));
        } catch (const std::exception& e) {
            run.selection_errors.push_back({uc.id, error_kind_of(e), e.what()});
        }
    }
    write_json_doc(out_path, run_to_json(run));
    std::cout << "selected " << run.selections.size() << " use cases ("
              << run.selection_errors.size() << " errors) -> " << out_path << "\n";
    return run.has_item_errors() ? kExitItemErrors : kExitOk;
}

int cmd_modify(const CliConfig& cfg, const std::string& selections_path,
               const std::string& mode_str, const std::string& out_path) {
    auto mode = modification_mode_from_string(mode_str);
    if (!mode) throw ConfigError("unknown modification mode: " + mode_str);
    LoadedCorpus loaded = load_inputs(cfg);
    PromptLibrary prompts = PromptLibrary::load_dir(cfg.templates_dir);
    LlmGateway gateway(gateway_config_from(cfg));
    PipelineContext ctx{gateway, prompts, gateway.config().mode};

    PipelineRun run =
        run_from_json(detail::parse_json(read_text_file(selections_path), "selections document"));
    run.modification_mode = mode;
    run.forced_ids = cfg.forced_ids;
    run.modifications.clear();
    run.modification_errors.clear();

    for (const auto& uc : loaded.use_cases) {
        bool flagged = std::any_of(run.selections.begin(), run.selections.end(),
                                   [&](const SelectionResult& s) {
                                       return s.use_case_id == uc.id && s.answer == Answer::Yes;
                                   });
        bool forced = std::find(cfg.forced_ids.begin(), cfg.forced_ids.end(), uc.id) !=
                      cfg.forced_ids.end();
        if (!flagged && !forced) continue;
        try {
            run.modifications.push_back(modify(ctx, uc, loaded.provision, loaded.app, *mode));
        } catch (const std::exception& e) {
            run.modification_errors.push_back({uc.id, error_kind_of(e), e.what()});
        }
    }
    write_json_doc(out_path, run_to_json(run));
    std::cout << "modified " << run.modifications.size() << " use cases ("
              << run.modification_errors.size() << " errors) -> " << out_path << "\n";
    return run.has_item_errors() ? kExitItemErrors : kExitOk;
}

int cmd_run(const CliConfig& cfg, const std::string& selection_mode_str,
            const std::string& modification_mode_str, const std::string& out_path) {
    auto selection_mode = selection_mode_from_string(selection_mode_str);
    if (!selection_mode) throw ConfigError("unknown selection mode: " + selection_mode_str);
    auto modification_mode = modification_mode_from_string(modification_mode_str);
    if (!modification_mode) {
        throw ConfigError("unknown modification mode: " + modification_mode_str);
    }
    LoadedCorpus loaded = load_inputs(cfg);
    PromptLibrary prompts = PromptLibrary::load_dir(cfg.templates_dir);
    LlmGateway gateway(gateway_config_from(cfg));
    PipelineContext ctx{gateway, prompts, gateway.config().mode};

    PipelineConfig pipeline_config;
    pipeline_config.selection_mode = *selection_mode;
    pipeline_config.modification_mode = *modification_mode;
    pipeline_config.forced_ids = cfg.forced_ids;

    PipelineRun run =
        run_pipeline(ctx, loaded.use_cases, loaded.provision, loaded.app, pipeline_config);
    write_json_doc(out_path, run_to_json(run));
    std::cout << "run " << run.run_id << ": " << run.selections.size() << " selections, "
              << run.modifications.size() << " modifications ("
              << run.selection_errors.size() + run.modification_errors.size() << " errors) -> "
              << out_path << "\n";
    return run.has_item_errors() ? kExitItemErrors : kExitOk;
}

int cmd_diff(const std::string& from_path, const std::string& to_path,
             const std::optional<std::string>& out_path, bool as_text) {
    UseCase from = load_use_case_file(from_path);
    UseCase to = load_use_case_file(to_path);
    ChangeList cl = diff(from, to);
    if (as_text) {
        std::string text = serialize_change_list(cl);
        print_or_write(out_path, text.empty() ? text : text + "\n");
    } else if (out_path) {
        write_json_doc(*out_path, change_list_to_json(cl));
    } else {
        std::cout << change_list_to_json(cl).dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_apply(const std::string& use_case_path, const std::string& changes_path,
              const std::optional<std::string>& out_path) {
    UseCase uc = load_use_case_file(use_case_path);
    ChangeList cl = parse_change_list(read_text_file(changes_path));
    UseCase modified = apply(cl, uc);
    print_or_write(out_path, serialize_use_case(modified) + "\n");
    return kExitOk;
}

int cmd_eval(const std::vector<std::string>& run_paths, const std::string& annotations_path,
             const std::string& out_path) {
    if (run_paths.empty()) throw ConfigError("eval needs at least one --run document");
    std::vector<PipelineRun> runs;
    runs.reserve(run_paths.size());
    for (const auto& path : run_paths) {
        runs.push_back(run_from_json(detail::parse_json(read_text_file(path), "run document")));
    }
    auto annotations = load_annotations(annotations_path);
    EvalReport report = evaluate_runs(runs, annotations);
    write_json_doc(out_path, eval_report_to_json(report));
    std::cout << "evaluated " << runs.size() << " run(s) -> " << out_path << "\n";
    return kExitOk;
}

int cmd_report(const std::string& report_path, const std::optional<std::string>& out_path) {
    EvalReport report =
        eval_report_from_json(detail::parse_json(read_text_file(report_path), "eval report"));
    print_or_write(out_path, render_text_report(report));
    return kExitOk;
}

} // namespace

int execute(const std::vector<std::string>& args) {
    CLI::App app{"use-case compliance pipeline: generate, classify, modify, evaluate"};
    app.require_subcommand(1);

    FlagValues flags;
    std::function<int()> action;

    // generate
    {
        auto* cmd = app.add_subcommand("generate",
                                       "app description -> user stories -> use cases");
        add_common_options(cmd, flags);
        auto app_path = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>();
        cmd->add_option("--app", *app_path, "app description JSON")->required();
        cmd->add_option("--out-dir", *out_dir, "output directory")->required();
        cmd->callback([&, app_path, out_dir] {
            action = [&, app_path, out_dir] {
                return cmd_generate(resolve_config(flags), *app_path, *out_dir);
            };
        });
    }
    // select
    {
        auto* cmd = app.add_subcommand("select", "classify corpus use cases against a provision");
        add_common_options(cmd, flags);
        cmd->add_option("--manifest", flags.manifest_path, "corpus manifest JSON");
        cmd->add_option("--provision", flags.provision_path, "provision JSON");
        auto mode = std::make_shared<std::string>("cot");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--selection-mode", *mode, "yes_no|cot");
        cmd->add_option("--out", *out, "output document")->required();
        cmd->callback([&, mode, out] {
            action = [&, mode, out] { return cmd_select(resolve_config(flags), *mode, *out); };
        });
    }
    // modify
    {
        auto* cmd = app.add_subcommand("modify", "modify flagged use cases from a selections doc");
        add_common_options(cmd, flags);
        cmd->add_option("--manifest", flags.manifest_path, "corpus manifest JSON");
        cmd->add_option("--provision", flags.provision_path, "provision JSON");
        cmd->add_option("--force", flags.forced_ids, "also modify this use case id");
        auto selections = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>("editscript");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--selections", *selections, "selections document")->required();
        cmd->add_option("--modification-mode", *mode, "editscript|direct");
        cmd->add_option("--out", *out, "output document")->required();
        cmd->callback([&, selections, mode, out] {
            action = [&, selections, mode, out] {
                return cmd_modify(resolve_config(flags), *selections, *mode, *out);
            };
        });
    }
    // run
    {
        auto* cmd = app.add_subcommand("run", "full pipeline: select then modify");
        add_common_options(cmd, flags);
        cmd->add_option("--manifest", flags.manifest_path, "corpus manifest JSON");
        cmd->add_option("--provision", flags.provision_path, "provision JSON");
        cmd->add_option("--force", flags.forced_ids, "also modify this use case id");
        auto selection_mode = std::make_shared<std::string>("cot");
        auto modification_mode = std::make_shared<std::string>("editscript");
        auto out = std::make_shared<std::string>();
        cmd->add_option("--selection-mode", *selection_mode, "yes_no|cot");
        cmd->add_option("--modification-mode", *modification_mode, "editscript|direct");
        cmd->add_option("--out", *out, "output document")->required();
        cmd->callback([&, selection_mode, modification_mode, out] {
            action = [&, selection_mode, modification_mode, out] {
                return cmd_run(resolve_config(flags), *selection_mode, *modification_mode, *out);
            };
        });
    }
    // diff
    {
        auto* cmd = app.add_subcommand("diff", "change list between two use case files");
        auto from = std::make_shared<std::string>();
        auto to = std::make_shared<std::string>();
        auto out = std::make_shared<std::optional<std::string>>();
        auto as_text = std::make_shared<bool>(false);
        cmd->add_option("--from", *from, "original use case JSON")->required();
        cmd->add_option("--to", *to, "modified use case JSON")->required();
        cmd->add_option("--out", *out, "output file (default stdout)");
        cmd->add_flag("--text", *as_text, "emit canonical line format instead of JSON");
        cmd->callback([&, from, to, out, as_text] {
            action = [from, to, out, as_text] { return cmd_diff(*from, *to, *out, *as_text); };
        });
    }
    // apply
    {
        auto* cmd = app.add_subcommand("apply", "apply a change list to a use case file");
        auto uc = std::make_shared<std::string>();
        auto changes = std::make_shared<std::string>();
        auto out = std::make_shared<std::optional<std::string>>();
        cmd->add_option("--use-case", *uc, "use case JSON")->required();
        cmd->add_option("--changes", *changes, "change list JSON")->required();
        cmd->add_option("--out", *out, "output file (default stdout)");
        cmd->callback([&, uc, changes, out] {
            action = [uc, changes, out] { return cmd_apply(*uc, *changes, *out); };
        });
    }
    // eval
    {
        auto* cmd = app.add_subcommand("eval", "score runs against expert annotations");
        auto runs = std::make_shared<std::vector<std::string>>();
        auto annotations = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--run", *runs, "run/selections document (repeatable)")->required();
        cmd->add_option("--annotations", *annotations, "annotations JSONL")->required();
        cmd->add_option("--out", *out, "output report JSON")->required();
        cmd->callback([&, runs, annotations, out] {
            action = [runs, annotations, out] { return cmd_eval(*runs, *annotations, *out); };
        });
    }
    // report
    {
        auto* cmd = app.add_subcommand("report", "render an eval report as plain-text tables");
        auto report = std::make_shared<std::string>();
        auto out = std::make_shared<std::optional<std::string>>();
        cmd->add_option("--report", *report, "eval report JSON")->required();
        cmd->add_option("--out", *out, "output file (default stdout)");
        cmd->callback([&, report, out] {
            action = [report, out] { return cmd_report(*report, *out); };
        });
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ucc");
    for (const auto& arg : args) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        return action ? action() : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GatewayError& e) {
        if (e.kind() == GatewayErrorKind::Config ||
            e.kind() == GatewayErrorKind::CredentialMissing) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}

} // namespace ucc::cli
