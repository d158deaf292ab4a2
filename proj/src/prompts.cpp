#include "ucc/prompts.hpp"

#include <fstream>
#include <sstream>

#include "ucc/detail/strings.hpp"
#include "ucc/errors.hpp"

namespace ucc {

namespace {

constexpr std::string_view kPlaceholders[] = {"legal_text", "app_summary", "use_case"};

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

// Calls fn(name, begin, end) for every `{identifier}` span in the body.
template <typename Fn>
void scan_placeholders(std::string_view body, Fn&& fn) {
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] != '{') {
            ++i;
            continue;
        }
        size_t close = body.find('}', i + 1);
        if (close == std::string_view::npos) break;
        std::string_view inner = body.substr(i + 1, close - i - 1);
        if (is_identifier(inner)) {
            fn(inner, i, close + 1);
            i = close + 1;
        } else {
            ++i;
        }
    }
}

} // namespace

const char* to_string(TemplateName name) {
    switch (name) {
        case TemplateName::YesNo: return "yes_no";
        case TemplateName::Cot: return "cot";
        case TemplateName::ModificationEditScript: return "modification_editscript";
        case TemplateName::ModificationDirect: return "modification_direct";
    }
    return "unknown";
}

const char* template_file_name(TemplateName name) {
    switch (name) {
        case TemplateName::YesNo: return "yes_no.txt";
        case TemplateName::Cot: return "cot.txt";
        case TemplateName::ModificationEditScript: return "modification_editscript.txt";
        case TemplateName::ModificationDirect: return "modification_direct.txt";
    }
    return "unknown.txt";
}

PromptTemplate parse_prompt_template(TemplateName name, std::string body) {
    int counts[3] = {0, 0, 0};
    scan_placeholders(body, [&](std::string_view inner, size_t, size_t) {
        bool known = false;
        for (int k = 0; k < 3; ++k) {
            if (inner == kPlaceholders[k]) {
                ++counts[k];
                known = true;
                break;
            }
        }
        if (!known) {
            throw RenderError(RenderErrorKind::UnknownPlaceholder,
                              "template " + std::string(to_string(name)) +
                                  ": unknown placeholder {" + std::string(inner) + "}");
        }
    });
    for (int k = 0; k < 3; ++k) {
        if (counts[k] == 0) {
            throw RenderError(RenderErrorKind::MissingPlaceholder,
                              "template " + std::string(to_string(name)) +
                                  ": missing placeholder {" + std::string(kPlaceholders[k]) + "}");
        }
        if (counts[k] > 1) {
            throw RenderError(RenderErrorKind::DuplicatePlaceholder,
                              "template " + std::string(to_string(name)) + ": placeholder {" +
                                  std::string(kPlaceholders[k]) + "} appears more than once");
        }
    }
    return PromptTemplate{name, std::move(body)};
}

PromptTemplate load_prompt_template(TemplateName name, const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read prompt template: " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_prompt_template(name, buf.str());
}

std::string render(const PromptTemplate& t, const LegalProvision& provision,
                   const AppDescription& app, const UseCase& uc) {
    if (detail::trim(provision.text).empty()) {
        throw RenderError(RenderErrorKind::EmptyProvision,
                          "provision \"" + provision.provision_id + "\" has empty text");
    }
    const std::string use_case_json = serialize_use_case(uc);
    std::string out;
    out.reserve(t.body.size() + provision.text.size() + app.summary.size() +
                use_case_json.size());
    size_t last = 0;
    scan_placeholders(t.body, [&](std::string_view inner, size_t begin, size_t end) {
        out.append(t.body, last, begin - last);
        if (inner == "legal_text") {
            out += provision.text;
        } else if (inner == "app_summary") {
            out += app.summary;
        } else {
            out += use_case_json;
        }
        last = end;
    });
    out.append(t.body, last, t.body.size() - last);
    return out;
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (TemplateName name : {TemplateName::YesNo, TemplateName::Cot,
                              TemplateName::ModificationEditScript,
                              TemplateName::ModificationDirect}) {
        lib.templates_.push_back(load_prompt_template(name, dir / template_file_name(name)));
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(TemplateName name) const {
    for (const auto& t : templates_) {
        if (t.name == name) return t;
    }
    throw ConfigError(std::string("prompt template not loaded: ") + to_string(name));
}

const char* to_string(RenderErrorKind kind) {
    switch (kind) {
        case RenderErrorKind::UnknownPlaceholder: return "unknown-placeholder";
        case RenderErrorKind::DuplicatePlaceholder: return "duplicate-placeholder";
        case RenderErrorKind::MissingPlaceholder: return "missing-placeholder";
        case RenderErrorKind::EmptyProvision: return "empty-provision";
    }
    return "unknown";
}

} // namespace ucc
