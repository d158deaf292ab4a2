// Regenerates fixtures/cache/replay_cache.jsonl from the authored response
// texts in fixtures/responses/. Run after changing prompt templates, the
// corpus, or the canonical use-case serialization; the cache is keyed by
// request hash, so it must be rebuilt whenever rendered prompts change.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ucc/corpus.hpp"
#include "ucc/detail/jsonio.hpp"
#include "ucc/errors.hpp"
#include "ucc/gateway.hpp"
#include "ucc/pipeline.hpp"
#include "ucc/prompts.hpp"

namespace fs = std::filesystem;
using ucc::detail::ojson;

namespace {

constexpr const char* kRecordedAt = "2025-11-05T00:00:00Z";

ojson load_json(const fs::path& path) {
    return ucc::detail::parse_json(ucc::read_text_file(path), path.string().c_str());
}

} // namespace

int main(int argc, char** argv) {
    fs::path source_dir = ".";
    fs::path out_path;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--source" && i + 1 < argc) {
            source_dir = argv[++i];
        } else if (arg == "--out" && i + 1 < argc) {
            out_path = argv[++i];
        } else {
            std::cerr << "usage: ucc-fixturegen [--source DIR] [--out FILE]\n";
            return 2;
        }
    }
    if (out_path.empty()) {
        out_path = source_dir / "fixtures" / "cache" / "replay_cache.jsonl";
    }

    try {
        const fs::path fixtures = source_dir / "fixtures";
        auto manifest = ucc::load_manifest(fixtures / "corpus" / "manifest.json");
        auto corpus = ucc::load_corpus(manifest);
        auto app = ucc::load_app_description(manifest.app_path);
        auto provision = ucc::load_provision(fixtures / "provisions" / "ccpa_7028a_optin.json");
        auto prompts = ucc::PromptLibrary::load_dir(source_dir / "prompts");

        ojson generation = load_json(fixtures / "responses" / "generation.json");
        ojson yes_no = load_json(fixtures / "responses" / "selection_yes_no.json");
        ojson cot = load_json(fixtures / "responses" / "selection_cot.json");
        ojson modification = load_json(fixtures / "responses" / "modification_editscript.json");

        std::vector<ucc::ExchangeRecord> records;
        auto add = [&records](std::string prompt, std::string response) {
            ucc::LlmRequest req;
            req.prompt = std::move(prompt);
            records.push_back({ucc::request_hash(req), std::move(req), std::move(response),
                               kRecordedAt});
        };

        const std::string stories_text = generation.at("user_stories").get<std::string>();
        add(ucc::user_story_prompt(app), stories_text);
        auto stories = ucc::parse_user_stories_text(stories_text);
        const auto& use_case_responses = generation.at("use_cases");
        if (use_case_responses.size() != stories.size()) {
            throw ucc::ConfigError("generation.json: use_cases count (" +
                                   std::to_string(use_case_responses.size()) +
                                   ") != parsed stories (" + std::to_string(stories.size()) + ")");
        }
        for (size_t i = 0; i < stories.size(); ++i) {
            add(ucc::use_case_prompt(stories[i], app),
                use_case_responses[i].get<std::string>());
        }

        const auto& yes_no_template = prompts.get(ucc::TemplateName::YesNo);
        const auto& cot_template = prompts.get(ucc::TemplateName::Cot);
        const auto& mod_template = prompts.get(ucc::TemplateName::ModificationEditScript);
        for (const auto& uc : corpus) {
            add(ucc::render(yes_no_template, provision, app, uc),
                yes_no.at(uc.id).get<std::string>());
        }
        for (const auto& uc : corpus) {
            add(ucc::render(cot_template, provision, app, uc), cot.at(uc.id).get<std::string>());
        }
        for (const auto& uc : corpus) {
            if (!modification.contains(uc.id)) continue;
            add(ucc::render(mod_template, provision, app, uc),
                modification.at(uc.id).get<std::string>());
        }

        std::string out;
        for (const auto& rec : records) {
            out += ucc::exchange_record_to_json(rec).dump();
            out += '\n';
        }
        ucc::write_text_file(out_path, out);
        std::cout << "wrote " << records.size() << " exchange records to " << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fixturegen: " << e.what() << "\n";
        return 1;
    }
}
