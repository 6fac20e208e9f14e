#include <gtest/gtest.h>

#include "golden.hpp"
#include "stratevo/articulation.hpp"
#include "stratevo/engine.hpp"
#include "stratevo/error.hpp"
#include "stratevo/strategy_space.hpp"
#include "support.hpp"

namespace stratevo {
namespace {

using test::make_entry;

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t at = haystack.find(needle); at != std::string::npos; at = haystack.find(needle, at + 1)) ++n;
  return n;
}

struct Fixture {
  Archive archive{ArchiveLimits{10, 4, std::nullopt}};
  Fixture() {
    const double f[] = {1.0, 4.0, 9.0, 2.0, 7.0};
    for (EntryId id = 1; id <= 5; ++id) {
      auto e = make_entry(id, f[id - 1]);
      e.program_source = "def construct_packing():\n    return variant_" + std::to_string(id) + "()\n";
      e.strategy_description = "Strategy text of entry " + std::to_string(id) + ".";
      archive.insert(e);
    }
  }
};

LandscapeGuidance sample_guidance() {
  return {"Hexagonal lattices keep improving.", "Uniform grids have plateaued.",
          "Simulated annealing on radii.", "Perturb the outer ring and re-solve the radii.", 10};
}

TEST(SaPrompt, OmitsInspirationBlockWhenNoPicks) {
  Archive a({10, 4, std::nullopt});
  a.insert(make_entry(1, 1.0));
  Rng rng(0);
  const auto set = select_inspirations(a, 1, 0, 10, nullptr, rng);
  const Prompt p = build_sa_prompt(a.entries()[0], set, nullptr, "brief");
  EXPECT_EQ(p.user.find("Inspiration"), std::string::npos);
  EXPECT_NE(p.user.find("program #1"), std::string::npos);
}

TEST(SaPrompt, TwoStanzasAndNoInspirationSource) {
  Fixture fx;
  Rng rng(0);
  const auto set = select_inspirations(fx.archive, 4, 3, 10, nullptr, rng);
  const Prompt p = build_sa_prompt(*fx.archive.find(4), set, nullptr, "Pack circles.");
  EXPECT_EQ(count(p.user, "## Inspiration "), 2u);
  for (const auto& pick : set.picks) {
    EXPECT_EQ(p.user.find(pick.entry->program_source), std::string::npos);
    EXPECT_NE(p.user.find(pick.entry->strategy_description), std::string::npos);
  }
  const ArchiveEntry& parent = *fx.archive.find(4);
  EXPECT_NE(p.user.find(parent.program_source), std::string::npos);
  EXPECT_NE(p.user.find("Fitness: 2"), std::string::npos);
  EXPECT_NE(p.user.find(parent.strategy_description), std::string::npos);
  EXPECT_NE(p.user.find("Pack circles."), std::string::npos);
  for (const char* tag : {"```DIAGNOSIS", "```STRATEGY", "```PROGRAM"}) {
    EXPECT_NE(p.system.find(tag), std::string::npos);
  }
}

TEST(SaPrompt, GuidanceFieldsVerbatim) {
  Fixture fx;
  Rng rng(0);
  const auto set = select_inspirations(fx.archive, 4, 3, 10, nullptr, rng);
  const auto g = sample_guidance();
  const Prompt p = build_sa_prompt(*fx.archive.find(4), set, &g, "Pack circles.");
  for (const auto& field : {g.effective, g.saturated, g.underexplored, g.concrete}) {
    EXPECT_NE(p.user.find(field), std::string::npos) << field;
  }
  EXPECT_NE(p.user.find("avoid saturated"), std::string::npos);
}

TEST(SaPrompt, ParentMismatchThrows) {
  Fixture fx;
  Rng rng(0);
  const auto set = select_inspirations(fx.archive, 4, 3, 10, nullptr, rng);
  EXPECT_THROW(build_sa_prompt(*fx.archive.find(1), set, nullptr, "b"), Error);
}

TEST(SaPrompt, Golden) {
  Fixture fx;
  Rng rng(0);
  const auto set = select_inspirations(fx.archive, 4, 3, 10, nullptr, rng);
  const auto g = sample_guidance();
  const Prompt p = build_sa_prompt(*fx.archive.find(4), set, &g, "Pack 26 circles in the unit square.");
  test::expect_golden("sa_prompt.txt", "[system]\n" + p.system + "\n[user]\n" + p.user);
}

TEST(SaPrompt, InstanceFeedbackLine) {
  Archive a({10, 4, 4});
  a.insert(make_entry(1, 0.5, 4, BehaviorVector{1, 0, 1, 0}));
  Rng rng(0);
  const auto set = select_inspirations(a, 1, 0, 10, nullptr, rng);
  const Prompt p = build_sa_prompt(a.entries()[0], set, nullptr, "b");
  EXPECT_NE(p.user.find("2 of 4"), std::string::npos) << p.user;
}

TEST(ParseSa, WellFormed) {
  const SaResponse r = parse_sa_response(
      "```DIAGNOSIS\nToo sparse.\n```\n\n```STRATEGY\nUse a hex grid.\n```\n\n```PROGRAM\nprint(1)\n```\n");
  EXPECT_EQ(r.diagnosis, "Too sparse.");
  EXPECT_EQ(r.strategy, "Use a hex grid.");
  EXPECT_EQ(r.program, "print(1)");
}

TEST(ParseSa, MissingStrategyFails) {
  EXPECT_THROW(parse_sa_response("```DIAGNOSIS\nx\n```\n```PROGRAM\ny\n```\n"), ParseFailure);
  EXPECT_THROW(parse_sa_response("```STRATEGY\nx\n```\n"), ParseFailure);
  EXPECT_THROW(parse_sa_response("```STRATEGY\n\n```\n```PROGRAM\ny\n```\n"), ParseFailure);
}

TEST(ParseSa, PreambleIsIgnored) {
  const std::string clean = "```DIAGNOSIS\nd\n```\n```STRATEGY\ns\n```\n```PROGRAM\np\n```\n";
  const std::string chatty = "Sure! Here is my answer.\n\n" + clean + "\nHope this helps.";
  EXPECT_EQ(parse_sa_response(chatty), parse_sa_response(clean));
}

TEST(ParseSaProperty, RenderRoundTrip) {
  const std::vector<std::string> programs = {
      "x = 1", "def f():\n    return [1, 2]\n\nprint(f())", "{\"placement\": {\"circles\": [[0.5, 0.5, 0.5]]}}",
      "s = '''\n```\nnot a fence end\n```\n'''\nprint(s)"};
  const std::vector<std::string> strategies = {"Grid.", "Two-phase: hex lattice, then radius LP.",
                                               "Line one.\nLine two."};
  for (const auto& prog : programs) {
    for (const auto& strat : strategies) {
      const SaResponse in{"some diagnosis", strat, prog};
      const SaResponse out = parse_sa_response(render_sa_response(in));
      EXPECT_EQ(out.strategy, strat);
      EXPECT_EQ(out.program, prog);
    }
  }
}

class ScriptedChat : public ChatProvider {
 public:
  explicit ScriptedChat(std::string reply) : reply_(std::move(reply)) {}
  ChatExchange chat(const ChatRequest& request) override {
    ++calls;
    last = request;
    ChatExchange ex;
    ex.request = request;
    ex.response.text = reply_;
    ex.kind = classify_prompt(request.system, request.user);
    return ex;
  }
  int calls = 0;
  ChatRequest last;

 private:
  std::string reply_;
};

TEST(Describe, ReturnsDescription) {
  ScriptedChat chat("```DESCRIPTION\nPlaces circles on a grid.\n```");
  EXPECT_EQ(describe_program("print(1)", "brief", chat), "Places circles on a grid.");
  EXPECT_EQ(chat.calls, 1);
  EXPECT_NE(chat.last.user.find("print(1)"), std::string::npos);
  EXPECT_EQ(classify_prompt(chat.last.system, chat.last.user), PromptKind::describe);
}

TEST(Describe, UnfencedReplyIsUsed) {
  ScriptedChat chat("  Greedy placement.  ");
  EXPECT_EQ(describe_program("p", "b", chat), "Greedy placement.");
}

TEST(Describe, EmptyReplyGivesSentinel) {
  ScriptedChat chat("");
  EXPECT_EQ(describe_program("p", "b", chat), std::string(kUndescribedCandidate));
}

TEST(Describe, ObserverSeesExchange) {
  ScriptedChat chat("```DESCRIPTION\nd\n```");
  int seen = 0;
  describe_program("p", "b", chat, 4, [&](const ChatExchange& ex) {
    ++seen;
    EXPECT_EQ(ex.request.generation, 4);
  });
  EXPECT_EQ(seen, 1);
}

TEST(BasePrompt, HasNoStrategyMaterial) {
  auto parent = make_entry(3, 1.25);
  const Prompt p = build_base_prompt(parent, "brief text");
  EXPECT_NE(p.user.find(parent.program_source), std::string::npos);
  EXPECT_NE(p.user.find("1.25"), std::string::npos);
  EXPECT_NE(p.user.find("brief text"), std::string::npos);
  EXPECT_EQ(p.user.find(parent.strategy_description), std::string::npos);
  EXPECT_EQ(classify_prompt(p.system, p.user), PromptKind::base);
  test::expect_golden("base_prompt.txt", "[system]\n" + p.system + "\n[user]\n" + p.user);
}

TEST(DescribePrompt, Golden) {
  const Prompt p = build_describe_prompt("def solve(instance):\n    return 0\n", "Predict the next term.");
  test::expect_golden("describe_prompt.txt", "[system]\n" + p.system + "\n[user]\n" + p.user);
}

}  // namespace
}  // namespace stratevo
