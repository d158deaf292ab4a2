#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ucc/usecase.hpp"

namespace ucc {

struct ManifestEntry {
    std::string id;
    std::filesystem::path path; // resolved against the manifest directory
};

struct CorpusManifest {
    std::filesystem::path app_path;
    std::vector<ManifestEntry> use_cases;
};

/// `{"app": "app.json", "use_cases": [{"id": "...", "path": "..."}]}`.
/// Ids must be unique; relative paths resolve against the manifest location.
CorpusManifest load_manifest(const std::filesystem::path& path);

/// Loads every use case and stamps the manifest id. A file that carries its
/// own non-empty id must agree with the manifest.
std::vector<UseCase> load_corpus(const CorpusManifest& manifest);

UseCase load_use_case_file(const std::filesystem::path& path);
LegalProvision load_provision(const std::filesystem::path& path);
AppDescription load_app_description(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace ucc
