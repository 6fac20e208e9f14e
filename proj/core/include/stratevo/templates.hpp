#pragma once

#include <map>
#include <string>
#include <string_view>

namespace stratevo {

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Prompt template text compiled in from core/templates/<name>.txt.
/// Throws Error for an unknown name.
std::string_view prompt_template(std::string_view name);

/// Shortest decimal text that reads back to exactly `x`.
std::string format_number(double x);

/// Substitutes every {{key}}. Throws Error on a placeholder with no value.
std::string render_template(std::string_view tpl, const TemplateVars& vars);

}  // namespace stratevo
