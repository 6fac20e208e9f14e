#include <gtest/gtest.h>

#include "golden.hpp"
#include "stratevo/error.hpp"
#include "stratevo/navigation.hpp"
#include "support.hpp"

namespace stratevo {
namespace {

using test::make_entry;

TEST(ShouldRefresh, Schedule) {
  EXPECT_TRUE(should_refresh(10, 10));
  EXPECT_FALSE(should_refresh(1, 10));
  EXPECT_TRUE(should_refresh(20, 10));
  EXPECT_TRUE(should_refresh(3, 1));
  EXPECT_THROW(should_refresh(0, 10), Error);
  EXPECT_THROW(should_refresh(5, 0), Error);
}

TEST(ShouldRefreshProperty, FloorTOverDeltaRefreshes) {
  for (int delta = 1; delta <= 15; ++delta) {
    for (int T = 1; T <= 120; T += 7) {
      int n = 0;
      for (int t = 1; t <= T; ++t) n += should_refresh(t, delta) ? 1 : 0;
      ASSERT_EQ(n, T / delta);
    }
  }
}

TEST(SlnPrompt, ListsEveryEntryWithoutSource) {
  Archive a({10, 4, std::nullopt});
  for (EntryId id = 1; id <= 3; ++id) a.insert(make_entry(id, static_cast<double>(id)));
  const Prompt p = build_sln_prompt(a, "brief");
  for (const auto& e : a.entries()) {
    EXPECT_NE(p.user.find(e.strategy_description), std::string::npos);
    EXPECT_EQ(p.user.find(e.program_source), std::string::npos);
  }
  EXPECT_EQ(classify_prompt(p.system, p.user), PromptKind::sln);
  for (const char* tag : {"```EFFECTIVE", "```SATURATED", "```UNEXPLORED", "```GUIDANCE"}) {
    EXPECT_NE(p.system.find(tag), std::string::npos);
  }
  test::expect_golden("sln_prompt.txt", "[system]\n" + p.system + "\n[user]\n" + p.user);
}

TEST(SlnPrompt, OrderedByGeneration) {
  Archive a({100, 4, std::nullopt});
  const int gens[] = {0, 50, 7, 23, 7, 49};
  for (EntryId id = 1; id <= 6; ++id) {
    auto e = make_entry(id, 1.0);
    e.generation = gens[id - 1];
    a.insert(e);
  }
  const Prompt p = build_sln_prompt(a, "brief");
  std::size_t last = 0;
  for (EntryId id : {1, 3, 5, 4, 6, 2}) {
    const std::size_t at = p.user.find("strategy " + std::to_string(id) + "\n");
    ASSERT_NE(at, std::string::npos);
    EXPECT_GT(at, last);
    last = at;
  }
}

TEST(SlnPrompt, BudgetKeepsMostRecent) {
  Archive a({600, 4, std::nullopt});
  for (EntryId id = 1; id <= 500; ++id) a.insert(make_entry(id, 1.0));
  const Prompt p = build_sln_prompt(a, "brief", 200);
  EXPECT_NE(p.user.find("300 older entries omitted\n"), std::string::npos);
  EXPECT_EQ(p.user.find("strategy 300\n"), std::string::npos);
  EXPECT_NE(p.user.find("strategy 301\n"), std::string::npos);
  EXPECT_NE(p.user.find("strategy 500\n"), std::string::npos);
  std::size_t stanzas = 0;
  for (std::size_t at = p.user.find("- [generation "); at != std::string::npos; at = p.user.find("- [generation ", at + 1)) {
    ++stanzas;
  }
  EXPECT_EQ(stanzas, 200u);
}

TEST(SlnPrompt, EmptyArchiveThrows) {
  Archive a;
  EXPECT_THROW(build_sln_prompt(a, "b"), ArchiveError);
}

const char* kFourPartReply =
    "Here is my analysis of the archive.\n\n"
    "```EFFECTIVE\n- Hexagonal lattices with radius refinement keep improving.\n- Greedy insertion by size.\n```\n\n"
    "```SATURATED\n- Uniform square grids have stopped improving.\n```\n\n"
    "```UNEXPLORED\n- Annealing on centre positions.\n- Boundary-first placement.\n```\n\n"
    "```GUIDANCE\n1. Perturb the outer ring.\n2. Solve radii with a linear program.\n```\n";

TEST(ParseGuidance, FourSections) {
  const LandscapeGuidance g = parse_guidance(kFourPartReply, 10);
  EXPECT_EQ(g.refreshed_at, 10);
  EXPECT_EQ(g.effective, "- Hexagonal lattices with radius refinement keep improving.\n- Greedy insertion by size.");
  EXPECT_EQ(g.saturated, "- Uniform square grids have stopped improving.");
  EXPECT_EQ(g.underexplored, "- Annealing on centre positions.\n- Boundary-first placement.");
  EXPECT_EQ(g.concrete, "1. Perturb the outer ring.\n2. Solve radii with a linear program.");
}

TEST(ParseGuidance, MissingSectionFails) {
  const std::string reply = "```EFFECTIVE\na\n```\n```SATURATED\nb\n```\n```UNEXPLORED\nc\n```\n";
  EXPECT_THROW(parse_guidance(reply, 10), ParseFailure);
}

TEST(Guidance, RenderAndRecordRoundTrip) {
  const LandscapeGuidance g = parse_guidance(kFourPartReply, 20);
  EXPECT_EQ(parse_guidance(render_guidance(g), 20), g);
  EXPECT_EQ(guidance_from_record(guidance_to_record(g)), g);
}

}  // namespace
}  // namespace stratevo
