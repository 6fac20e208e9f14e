#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "stratevo/archive.hpp"
#include "stratevo/providers.hpp"

namespace stratevo {

/// Four-part summary of the strategy landscape. Valid until the next refresh.
struct LandscapeGuidance {
  std::string effective;
  std::string saturated;
  std::string underexplored;
  std::string concrete;
  int refreshed_at = 0;

  bool operator==(const LandscapeGuidance&) const = default;
};

inline constexpr std::size_t kDefaultSlnEntryBudget = 200;

/// True iff t is a positive multiple of delta. Throws Error if t < 1 or delta < 1.
bool should_refresh(int t, int delta);

/// Lists (generation, fitness, strategy) of every live entry in generation
/// order. Past `entry_budget` entries only the most recent are listed and the
/// rest are counted in an "N older entries omitted" line. Program source is
/// never included. Throws ArchiveError on an empty archive.
Prompt build_sln_prompt(const Archive& archive, std::string_view task_brief,
                        std::size_t entry_budget = kDefaultSlnEntryBudget);

/// Throws ParseFailure unless all four sections are present and non-empty.
LandscapeGuidance parse_guidance(std::string_view text, int t);

/// The four fenced sections parse_guidance expects.
std::string render_guidance(const LandscapeGuidance& guidance);

std::string guidance_to_record(const LandscapeGuidance& guidance);
LandscapeGuidance guidance_from_record(std::string_view line);

}  // namespace stratevo
