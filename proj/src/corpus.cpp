#include "ucc/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write file: " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    detail::ojson j = detail::parse_json(read_text_file(path), "corpus manifest");
    if (!j.is_object() || !j.contains("use_cases") || !j.at("use_cases").is_array()) {
        throw ParseError(ParseErrorKind::WrongShape,
                         "corpus manifest: expected object with \"use_cases\" array");
    }
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    CorpusManifest manifest;
    if (j.contains("app")) {
        if (!j.at("app").is_string()) {
            throw ParseError(ParseErrorKind::WrongShape, "corpus manifest: \"app\" must be a string");
        }
        manifest.app_path = base / j.at("app").get<std::string>();
    }
    std::unordered_set<std::string> seen;
    for (const auto& entry : j.at("use_cases")) {
        if (!entry.is_object() || !entry.contains("id") || !entry.contains("path") ||
            !entry.at("id").is_string() || !entry.at("path").is_string()) {
            throw ParseError(ParseErrorKind::WrongShape,
                             "corpus manifest: use_cases entries need string \"id\" and \"path\"");
        }
        std::string id = detail::trim(entry.at("id").get<std::string>());
        if (id.empty()) {
            throw ParseError(ParseErrorKind::ValidationFailed, "corpus manifest: empty id");
        }
        if (!seen.insert(id).second) {
            throw ParseError(ParseErrorKind::ValidationFailed,
                             "corpus manifest: duplicate id \"" + id + "\"");
        }
        manifest.use_cases.push_back({std::move(id), base / entry.at("path").get<std::string>()});
    }
    return manifest;
}

UseCase load_use_case_file(const std::filesystem::path& path) {
    return parse_use_case(read_text_file(path));
}

std::vector<UseCase> load_corpus(const CorpusManifest& manifest) {
    std::vector<UseCase> corpus;
    corpus.reserve(manifest.use_cases.size());
    for (const auto& entry : manifest.use_cases) {
        UseCase uc = load_use_case_file(entry.path);
        if (!uc.id.empty() && uc.id != entry.id) {
            throw ParseError(ParseErrorKind::ValidationFailed,
                             "use case file " + entry.path.string() + " has id \"" + uc.id +
                                 "\" but the manifest says \"" + entry.id + "\"");
        }
        uc.id = entry.id;
        corpus.push_back(std::move(uc));
    }
    return corpus;
}

LegalProvision load_provision(const std::filesystem::path& path) {
    detail::ojson j = detail::parse_json(read_text_file(path), "provision");
    if (!j.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "provision: root must be an object");
    }
    LegalProvision p;
    for (const char* key : {"provision_id", "citation", "text"}) {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ParseError(ParseErrorKind::MissingKey,
                             std::string("provision: missing string key \"") + key + "\"");
        }
    }
    p.provision_id = detail::trim(j.at("provision_id").get<std::string>());
    p.citation = j.at("citation").get<std::string>();
    p.text = j.at("text").get<std::string>();
    if (p.provision_id.empty() || detail::trim(p.text).empty()) {
        throw ParseError(ParseErrorKind::ValidationFailed,
                         "provision: provision_id and text must be non-empty");
    }
    return p;
}

AppDescription load_app_description(const std::filesystem::path& path) {
    detail::ojson j = detail::parse_json(read_text_file(path), "app description");
    if (!j.is_object()) {
        throw ParseError(ParseErrorKind::WrongShape, "app description: root must be an object");
    }
    AppDescription app;
    for (const char* key : {"app_id", "full_text", "summary"}) {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ParseError(ParseErrorKind::MissingKey,
                             std::string("app description: missing string key \"") + key + "\"");
        }
    }
    app.app_id = detail::trim(j.at("app_id").get<std::string>());
    app.full_text = j.at("full_text").get<std::string>();
    app.summary = detail::trim(j.at("summary").get<std::string>());
    if (detail::trim(app.full_text).empty()) {
        throw ParseError(ParseErrorKind::ValidationFailed, "app description: full_text is empty");
    }
    if (app.summary.find('\n') != std::string::npos) {
        throw ParseError(ParseErrorKind::ValidationFailed,
                         "app description: summary must be a single line");
    }
    return app;
}

} // namespace ucc
