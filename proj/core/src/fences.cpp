#include "stratevo/fences.hpp"

#include <algorithm>
#include <cctype>

namespace stratevo {

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

bool is_bare_fence(std::string_view line) { return trim(line) == "```"; }

bool opens(std::string_view line, std::string_view tag) {
  const std::string t = trim(line);
  return t.size() > 3 && t.starts_with("```") && iequals(trim(std::string_view(t).substr(3)), tag);
}

std::string join_body(const std::vector<std::string_view>& lines, std::size_t begin, std::size_t end) {
  while (begin < end && trim(lines[begin]).empty()) ++begin;
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out.append(lines[i]);
    if (i + 1 < end) out.push_back('\n');
  }
  while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
  return out;
}

}  // namespace

std::optional<std::string> tagged_section(std::string_view text, std::string_view tag,
                                          std::span<const std::string_view> known_tags) {
  const auto lines = split_lines(text);
  std::size_t open = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (opens(lines[i], tag)) {
      open = i;
      break;
    }
  }
  if (open == lines.size()) return std::nullopt;

  std::size_t limit = lines.size();
  for (std::size_t i = open + 1; i < lines.size() && limit == lines.size(); ++i) {
    for (auto other : known_tags) {
      if (opens(lines[i], other)) {
        limit = i;
        break;
      }
    }
  }
  std::size_t close = limit;
  for (std::size_t i = limit; i > open + 1; --i) {
    if (is_bare_fence(lines[i - 1])) {
      close = i - 1;
      break;
    }
  }
  return join_body(lines, open + 1, close);
}

std::optional<std::string> first_fence(std::string_view text) {
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!trim(lines[i]).starts_with("```")) continue;
    std::size_t close = lines.size();
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (is_bare_fence(lines[j])) {
        close = j;
        break;
      }
    }
    if (close == lines.size()) return std::nullopt;
    return join_body(lines, i + 1, close);
  }
  return std::nullopt;
}

std::string strip_fences(std::string_view text) {
  std::string out;
  for (auto line : split_lines(text)) {
    if (trim(line).starts_with("```")) continue;
    out.append(line);
    out.push_back('\n');
  }
  return trim(out);
}

}  // namespace stratevo
