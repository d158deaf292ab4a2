#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ucc/usecase.hpp"

namespace ucc {

enum class TemplateName {
    YesNo,
    Cot,
    ModificationEditScript,
    ModificationDirect,
};

const char* to_string(TemplateName name);
const char* template_file_name(TemplateName name);

/// A prompt template body with the three injection points {legal_text},
/// {app_summary} and {use_case}, each required exactly once. Any other
/// brace-wrapped span that is not a bare identifier (e.g. the JSON answer
/// format shown to the model) is literal text.
struct PromptTemplate {
    TemplateName name = TemplateName::YesNo;
    std::string body;
};

/// Validates placeholder usage; throws RenderError on an unknown, duplicate,
/// or missing placeholder.
PromptTemplate parse_prompt_template(TemplateName name, std::string body);

PromptTemplate load_prompt_template(TemplateName name, const std::filesystem::path& file);

/// Injects provision.text, app.summary and serialize_use_case(uc) verbatim.
/// Throws RenderError when the provision text is empty.
std::string render(const PromptTemplate& t, const LegalProvision& provision,
                   const AppDescription& app, const UseCase& uc);

/// The four templates, loaded from `<dir>/<name>.txt`.
class PromptLibrary {
public:
    static PromptLibrary load_dir(const std::filesystem::path& dir);

    const PromptTemplate& get(TemplateName name) const;

private:
    std::vector<PromptTemplate> templates_;
};

} // namespace ucc
