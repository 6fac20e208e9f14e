#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stratevo {

/// Extracts the body of a fence opened by a line reading exactly "```TAG"
/// (tag compared case-insensitively, surrounding whitespace ignored).
///
/// A section runs until the next opening of any tag in `known_tags`, and its
/// body ends at the last bare "```" line inside that span, so bodies may
/// themselves contain fenced blocks. A missing closing fence takes the span to
/// its end. Leading blank lines and trailing whitespace are removed.
std::optional<std::string> tagged_section(std::string_view text, std::string_view tag,
                                          std::span<const std::string_view> known_tags);

/// Body of the first fenced block of any kind, ending at the first bare "```".
std::optional<std::string> first_fence(std::string_view text);

/// Drops fence marker lines and trims the result.
std::string strip_fences(std::string_view text);

std::string trim(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace stratevo
