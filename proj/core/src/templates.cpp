#include "stratevo/templates.hpp"

#include <charconv>

#include "stratevo/error.hpp"
#include "template_data.hpp"

namespace stratevo {

std::string_view prompt_template(std::string_view name) {
  for (const auto& t : detail::kTemplates) {
    if (t.name == name) return t.text;
  }
  throw Error("unknown prompt template '" + std::string(name) + "'");
}

std::string render_template(std::string_view tpl, const TemplateVars& vars) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = tpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    const std::size_t close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error("unterminated placeholder in template");
    out.append(tpl.substr(pos, open - pos));
    const std::string_view key = tpl.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) throw Error("template placeholder {{" + std::string(key) + "}} has no value");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace stratevo
