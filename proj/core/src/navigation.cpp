#include "stratevo/navigation.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "stratevo/error.hpp"
#include "stratevo/fences.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {

namespace {

constexpr std::string_view kTags[] = {"EFFECTIVE", "SATURATED", "UNEXPLORED", "GUIDANCE"};

}  // namespace

bool should_refresh(int t, int delta) {
  if (t < 1 || delta < 1) throw Error("should_refresh requires t >= 1 and delta >= 1");
  return t % delta == 0;
}

Prompt build_sln_prompt(const Archive& archive, std::string_view task_brief, std::size_t entry_budget) {
  if (archive.empty()) throw ArchiveError("cannot summarize an empty archive");
  std::vector<const ArchiveEntry*> ordered;
  for (const auto& e : archive.entries()) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ArchiveEntry* a, const ArchiveEntry* b) { return a->generation < b->generation; });

  std::size_t omitted = 0;
  if (entry_budget > 0 && ordered.size() > entry_budget) omitted = ordered.size() - entry_budget;

  std::string stanzas;
  for (std::size_t i = omitted; i < ordered.size(); ++i) {
    stanzas += render_template(prompt_template("sln_stanza"),
                               {{"generation", std::to_string(ordered[i]->generation)},
                                {"fitness", format_number(ordered[i]->fitness)},
                                {"strategy", ordered[i]->strategy_description}});
  }
  Prompt p;
  p.system = std::string(prompt_template("sln_system"));
  p.user = render_template(
      prompt_template("sln_user"),
      {{"task_brief", std::string(task_brief)},
       {"count", std::to_string(ordered.size())},
       {"omitted", omitted ? std::to_string(omitted) + " older entries omitted\n" : std::string()},
       {"stanzas", stanzas}});
  return p;
}

LandscapeGuidance parse_guidance(std::string_view text, int t) {
  LandscapeGuidance g;
  g.refreshed_at = t;
  std::string* fields[] = {&g.effective, &g.saturated, &g.underexplored, &g.concrete};
  for (std::size_t i = 0; i < 4; ++i) {
    auto body = tagged_section(text, kTags[i], kTags);
    if (!body || body->empty()) {
      throw ParseFailure("landscape guidance is missing the " + std::string(kTags[i]) + " section");
    }
    *fields[i] = std::move(*body);
  }
  return g;
}

std::string render_guidance(const LandscapeGuidance& g) {
  return "```EFFECTIVE\n" + g.effective + "\n```\n\n```SATURATED\n" + g.saturated +
         "\n```\n\n```UNEXPLORED\n" + g.underexplored + "\n```\n\n```GUIDANCE\n" + g.concrete + "\n```\n";
}

std::string guidance_to_record(const LandscapeGuidance& g) {
  nlohmann::ordered_json j;
  j["refreshed_at"] = g.refreshed_at;
  j["effective"] = g.effective;
  j["saturated"] = g.saturated;
  j["underexplored"] = g.underexplored;
  j["concrete"] = g.concrete;
  return j.dump();
}

LandscapeGuidance guidance_from_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  LandscapeGuidance g;
  g.refreshed_at = j.at("refreshed_at").get<int>();
  g.effective = j.at("effective").get<std::string>();
  g.saturated = j.at("saturated").get<std::string>();
  g.underexplored = j.at("underexplored").get<std::string>();
  g.concrete = j.at("concrete").get<std::string>();
  return g;
}

}  // namespace stratevo
