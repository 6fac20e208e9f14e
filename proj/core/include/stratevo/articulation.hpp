#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "stratevo/archive.hpp"
#include "stratevo/navigation.hpp"
#include "stratevo/providers.hpp"
#include "stratevo/strategy_space.hpp"

namespace stratevo {

/// Parsed diagnose/direct/implement reply. Only strategy and program are kept.
struct SaResponse {
  std::string diagnosis;
  std::string strategy;
  std::string program;

  bool operator==(const SaResponse&) const = default;
};

inline constexpr std::string_view kUndescribedCandidate = "UNDESCRIBED CANDIDATE";

/// Renders the single strategy-articulation prompt.
///
/// The parent is shown in full (source, fitness, strategy, validation
/// summary). Each pick contributes only its role, fitness and strategy text.
/// Throws Error if `inspirations.parent` is not `parent`.
Prompt build_sa_prompt(const ArchiveEntry& parent, const InspirationSet& inspirations,
                       const LandscapeGuidance* guidance, std::string_view task_brief);

/// Throws ParseFailure when STRATEGY or PROGRAM is missing or empty.
SaResponse parse_sa_response(std::string_view text);

std::string render_sa_response(const SaResponse& response);

Prompt build_describe_prompt(std::string_view program, std::string_view task_brief);

/// One chat call asking for a short strategy description of `program`.
/// An empty reply yields kUndescribedCandidate. Sampling parameters are
/// taken from `settings`.
std::string describe_program(std::string_view program, std::string_view task_brief, ChatProvider& chat,
                             int generation = 0, const ExchangeObserver& observer = {},
                             const ChatRequest& settings = {});

}  // namespace stratevo
