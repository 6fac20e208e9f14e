#include <gtest/gtest.h>

#include "stratevo/error.hpp"
#include "stratevo/fences.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {
namespace {

constexpr std::string_view kTags[] = {"DIAGNOSIS", "STRATEGY", "PROGRAM"};

TEST(TaggedSection, ExtractsBody) {
  const std::string text = "```STRATEGY\nuse a hex grid\n```\n";
  EXPECT_EQ(tagged_section(text, "STRATEGY", kTags), "use a hex grid");
  EXPECT_EQ(tagged_section(text, "PROGRAM", kTags), std::nullopt);
}

TEST(TaggedSection, TagIsCaseInsensitive) {
  EXPECT_EQ(tagged_section("```strategy\nx\n```", "STRATEGY", kTags), "x");
}

TEST(TaggedSection, BodyMayContainFences) {
  const std::string text =
      "```PROGRAM\n"
      "def f():\n"
      "    doc = '''\n"
      "```python\n"
      "inner\n"
      "```\n"
      "'''\n"
      "```\n"
      "trailing chatter\n";
  EXPECT_EQ(tagged_section(text, "PROGRAM", kTags),
            "def f():\n    doc = '''\n```python\ninner\n```\n'''");
}

TEST(TaggedSection, SectionStopsAtNextKnownTag) {
  const std::string text = "```STRATEGY\na\n```\n```PROGRAM\nb\n```\n";
  EXPECT_EQ(tagged_section(text, "STRATEGY", kTags), "a");
  EXPECT_EQ(tagged_section(text, "PROGRAM", kTags), "b");
}

TEST(TaggedSection, UnclosedFenceRunsToEnd) {
  EXPECT_EQ(tagged_section("```PROGRAM\nx = 1\n", "PROGRAM", kTags), "x = 1");
}

TEST(FirstFence, TakesFirstBlock) {
  EXPECT_EQ(first_fence("prose\n```python\nA\n```\nmore\n```\nB\n```\n"), "A");
  EXPECT_EQ(first_fence("no fences here"), std::nullopt);
}

TEST(StripFences, DropsMarkers) {
  EXPECT_EQ(strip_fences("```DESCRIPTION\n  grid search  \n```\n"), "grid search");
}

TEST(Templates, RenderAndMissingKey) {
  EXPECT_EQ(render_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "2"}}), "a 1 b 2");
  EXPECT_THROW(render_template("{{missing}}", {}), Error);
  EXPECT_THROW(prompt_template("no_such_template"), Error);
  EXPECT_FALSE(prompt_template("sa_system").empty());
}

TEST(Templates, ValuesAreNotRescanned) {
  EXPECT_EQ(render_template("{{a}}", {{"a", "{{b}}"}, {"b", "x"}}), "{{b}}");
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_number(2.3658321334167627), "2.3658321334167627");
}

}  // namespace
}  // namespace stratevo
