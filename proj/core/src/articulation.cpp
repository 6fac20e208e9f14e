#include "stratevo/articulation.hpp"

#include "stratevo/error.hpp"
#include "stratevo/fences.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {

namespace {

constexpr std::string_view kTags[] = {"DIAGNOSIS", "STRATEGY", "PROGRAM"};

std::string feedback_line(const ArchiveEntry& e) {
  if (!e.behavior_vector) return {};
  std::size_t solved = 0;
  std::string pattern;
  for (auto bit : *e.behavior_vector) {
    solved += bit ? 1 : 0;
    pattern.push_back(bit ? '1' : '0');
  }
  return "Validation: solved " + std::to_string(solved) + " of " + std::to_string(e.behavior_vector->size()) +
         " instances (per-instance success: " + pattern + ")\n";
}

}  // namespace

Prompt build_sa_prompt(const ArchiveEntry& parent, const InspirationSet& inspirations,
                       const LandscapeGuidance* guidance, std::string_view task_brief) {
  if (inspirations.parent == nullptr || inspirations.parent->id != parent.id) {
    throw Error("inspiration set was built for a different parent");
  }
  std::string block;
  if (!inspirations.picks.empty()) {
    std::string stanzas;
    for (std::size_t i = 0; i < inspirations.picks.size(); ++i) {
      const auto& pick = inspirations.picks[i];
      stanzas += render_template(prompt_template("sa_inspiration_stanza"),
                                 {{"index", std::to_string(i + 1)},
                                  {"role", std::string(to_string(pick.role))},
                                  {"fitness", format_number(pick.entry->fitness)},
                                  {"strategy", pick.entry->strategy_description}});
    }
    block = render_template(prompt_template("sa_inspirations"), {{"stanzas", stanzas}});
  }
  std::string guidance_block;
  if (guidance != nullptr) {
    guidance_block = render_template(prompt_template("sa_guidance"),
                                     {{"refreshed_at", std::to_string(guidance->refreshed_at)},
                                      {"effective", guidance->effective},
                                      {"saturated", guidance->saturated},
                                      {"underexplored", guidance->underexplored},
                                      {"concrete", guidance->concrete}});
  }
  Prompt p;
  p.system = std::string(prompt_template("sa_system"));
  p.user = render_template(prompt_template("sa_user"),
                           {{"task_brief", std::string(task_brief)},
                            {"parent_fitness", format_number(parent.fitness)},
                            {"parent_strategy", parent.strategy_description},
                            {"parent_feedback", feedback_line(parent)},
                            {"parent_program", parent.program_source},
                            {"inspirations", block},
                            {"guidance", guidance_block}});
  return p;
}

SaResponse parse_sa_response(std::string_view text) {
  SaResponse r;
  r.diagnosis = tagged_section(text, "DIAGNOSIS", kTags).value_or("");
  auto strategy = tagged_section(text, "STRATEGY", kTags);
  if (!strategy || strategy->empty()) throw ParseFailure("response has no STRATEGY section");
  auto program = tagged_section(text, "PROGRAM", kTags);
  if (!program || program->empty()) throw ParseFailure("response has no PROGRAM section");
  r.strategy = std::move(*strategy);
  r.program = std::move(*program);
  return r;
}

std::string render_sa_response(const SaResponse& r) {
  return "```DIAGNOSIS\n" + r.diagnosis + "\n```\n\n```STRATEGY\n" + r.strategy + "\n```\n\n```PROGRAM\n" +
         r.program + "\n```\n";
}

Prompt build_describe_prompt(std::string_view program, std::string_view task_brief) {
  Prompt p;
  p.system = std::string(prompt_template("describe_system"));
  p.user = render_template(prompt_template("describe_user"),
                           {{"task_brief", std::string(task_brief)}, {"program", std::string(program)}});
  return p;
}

std::string describe_program(std::string_view program, std::string_view task_brief, ChatProvider& chat,
                             int generation, const ExchangeObserver& observer, const ChatRequest& settings) {
  if (program.empty()) throw Error("cannot describe an empty program");
  const Prompt prompt = build_describe_prompt(program, task_brief);
  ChatRequest req = settings;
  req.system = prompt.system;
  req.user = prompt.user;
  req.generation = generation;
  const ChatExchange ex = chat.chat(req);
  if (observer) observer(ex);

  static constexpr std::string_view kDescribeTags[] = {"DESCRIPTION"};
  std::string text = tagged_section(ex.response.text, "DESCRIPTION", kDescribeTags)
                         .value_or(strip_fences(ex.response.text));
  text = trim(text);
  if (text.empty()) return std::string(kUndescribedCandidate);
  return text;
}

}  // namespace stratevo
