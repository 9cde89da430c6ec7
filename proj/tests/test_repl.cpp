#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mixcheck/parser.hpp"
#include "mixcheck/repl.hpp"
#include "support.hpp"

using namespace mixcheck;
using namespace testsupport;

namespace {

const std::vector<std::string> kRunningExample{
    "interface trait ICell.",
    "trait BICell extends ICell.",
    "trait Double extends ICell.",
    "trait Inc extends ICell.",
    "class OddICell extends BICell with Inc with Double.",
    "class EvenICell extends BICell with Double with Inc.",
};

Session declared() {
  Session s;
  for (const auto& l : kRunningExample) {
    auto o = s.eval_line(l);
    EXPECT_FALSE(o.error) << l << ": " << o.text;
  }
  return s;
}

// Verdicts of every command in `lines`, via a session and via one batch parse.
std::pair<std::vector<std::string>, std::vector<std::string>> both_ways(const std::vector<std::string>& lines) {
  std::vector<std::string> repl, batch;
  Session s;
  for (const auto& l : lines)
    for (const auto& q : s.eval_line(l).results) repl.push_back(q.verdict);
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  ParseResult r = parse_program(text);
  if (!r.ok()) return {repl, {"parse error: " + format_diagnostic(r.diagnostics[0])}};
  PredEnv env(r.program);
  for (const auto& c : r.commands) batch.push_back(run_command(r.program, env, c, {}).verdict);
  return {repl, batch};
}

}  // namespace

TEST(Repl, DeclarationsPersistAcrossLines) {
  Session s = declared();
  auto o = s.eval_line("subtype OddICell (BICell with Inc with Double).");
  ASSERT_EQ(o.results.size(), 1u);
  EXPECT_EQ(o.results[0].verdict, "Valid");
  auto e = s.eval_line("subtype EvenICell <: (BICell with Inc with Double).");
  EXPECT_EQ(e.results.at(0).verdict, "NotProven");
}

TEST(Repl, Linearization) {
  Session s = declared();
  auto o = s.eval_line("lin OddICell.");
  EXPECT_EQ(o.text, "OddICell ← Double ← Inc ← BICell ← ICell\n");
}

TEST(Repl, RedefinitionIsRejectedAndStateKept) {
  Session s = declared();
  auto before = s.state_hash();
  auto o = s.eval_line("trait Inc extends ICell.");
  EXPECT_TRUE(o.error);
  EXPECT_NE(o.text.find("already defined"), std::string::npos) << o.text;
  EXPECT_EQ(s.state_hash(), before);
}

TEST(Repl, ErrorIsolation) {
  Session s = declared();
  for (const char* bad : {"trait X extends Nope.", "class K extends .", "checkentail x::Nope<> |- emp.",
                          "subtype OddICell <: Missing.", ":budget -1", ":frobnicate", "trait Y extends Y."}) {
    auto before = s.state_hash();
    Program p = s.program();
    auto o = s.eval_line(bad);
    EXPECT_TRUE(o.error) << bad;
    EXPECT_EQ(s.state_hash(), before) << bad;
    EXPECT_EQ(s.program(), p) << bad;
  }
}

TEST(Repl, Reset) {
  Session s = declared();
  s.eval_line(":reset");
  EXPECT_TRUE(s.program().empty());
  EXPECT_FALSE(s.eval_line("trait Inc.").error);
}

TEST(Repl, BudgetAppliesToLaterQueries) {
  Session s;
  std::istringstream ls(lists_decls());
  for (std::string l; std::getline(ls, l);) ASSERT_FALSE(s.eval_line(l).error) << l;
  s.eval_line(":budget 0");
  EXPECT_EQ(s.budget(), 0);
  EXPECT_EQ(s.eval_line("checkentail x::node<_,null> |- x::ll<m> & m=1.").results.at(0).verdict, "NotProven");
  s.eval_line(":budget 8");
  EXPECT_EQ(s.budget(), 8);
  EXPECT_EQ(s.eval_line("checkentail x::node<_,null> |- x::ll<m> & m=1.").results.at(0).verdict, "Valid");
}

TEST(Repl, DumpRoundTrips) {
  Session s = declared();
  std::istringstream ls(lists_decls());
  for (std::string l; std::getline(ls, l);) ASSERT_FALSE(s.eval_line(l).error) << l;
  auto o = s.eval_line(":dump");
  ParseResult r = parse_program(o.text);
  ASSERT_TRUE(r.ok()) << o.text;
  EXPECT_EQ(r.program, s.program());
}

TEST(Repl, HistoryRecordsInputs) {
  Session s;
  s.eval_line("trait A.");
  s.eval_line(":dump");
  ASSERT_EQ(s.history().size(), 2u);
  EXPECT_EQ(s.history()[0].first, "trait A.");
}

TEST(Repl, RunReplExitStatusAndPrompt) {
  Session s;
  std::string script;
  for (const auto& l : kRunningExample) script += l + "\n";
  std::istringstream in(script + "subtype OddICell <: OddICell.\n:quit\nsubtype EvenICell <: OddICell.\n");
  std::ostringstream out;
  EXPECT_EQ(run_repl(in, out, s), 0);
  EXPECT_EQ(out.str().rfind(kPrompt, 0), 0u);

  Session t;
  std::istringstream in2(script + "subtype EvenICell <: OddICell.\n");
  std::ostringstream out2;
  EXPECT_EQ(run_repl(in2, out2, t), 1);

  Session u;
  std::istringstream in3("trait A extends B.\n");
  std::ostringstream out3;
  EXPECT_EQ(run_repl(in3, out3, u), 2);
}

TEST(Repl, MatchesBatchOnRandomScripts) {
  std::mt19937 rng(61);
  for (int i = 0; i < 30; ++i) {
    auto lines = random_script(rng);
    auto [repl, batch] = both_ways(lines);
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    EXPECT_EQ(repl, batch) << text;
  }
}
