#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "mixcheck/cli.hpp"
#include "support.hpp"

using namespace mixcheck;
using namespace testsupport;
using nlohmann::json;

namespace {

struct CliRun {
  int status;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "mixcheck");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  int st = run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {st, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / ("mixcheck_cli_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Percentage, RoundsLikeThePublishedTable) {
  EXPECT_EQ(percentage(11, 11), 100);
  EXPECT_EQ(percentage(4, 5), 80);
  EXPECT_EQ(percentage(6, 6), 100);
  EXPECT_EQ(percentage(12, 27), 44);
  EXPECT_EQ(percentage(33, 49), 67);
  EXPECT_EQ(percentage(1, 2), 50);
  EXPECT_FALSE(percentage(0, 0));
  for (int t = 1; t <= 60; ++t)
    for (int v = 0; v <= t; ++v) {
      double exact = 100.0 * v / t;
      EXPECT_LE(std::abs(*percentage(v, t) - exact), 0.5) << v << "/" << t;
    }
}

TEST(StudyReport, TotalsSumTheRows) {
  StudyReport r{{{"A", 11, 11, {}, {}}, {"B", 27, 12, {}, {}}, {"C", 5, 4, {}, {}}}};
  StudyRow t = r.totals();
  EXPECT_EQ(t.total, 43);
  EXPECT_EQ(t.verified, 27);
}

TEST(StudyReport, TextAndJsonAgree) {
  StudyReport r{{{"Maths", 5, 4, {}, {"x"}}, {"ICell", 2, 1, {}, {}}}};
  std::string text = render_text(r);
  json j = json::parse(render_json(r));
  ASSERT_EQ(j["rows"].size(), 2u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(j["rows"][i]["name"], r.rows[i].name);
    EXPECT_EQ(j["rows"][i]["total"], r.rows[i].total);
    EXPECT_EQ(j["rows"][i]["verified"], r.rows[i].verified);
    EXPECT_EQ(j["rows"][i]["percentage"], *percentage(r.rows[i].verified, r.rows[i].total));
  }
  EXPECT_EQ(j["totals"]["total"], 7);
  EXPECT_EQ(j["totals"]["percentage"], 71);
  for (const char* h : {"Class Hierarchy", "Total Num of Mixins", "Mixins with Subtyping", "Percentage"})
    EXPECT_NE(text.find(h), std::string::npos);
  EXPECT_NE(text.find("Maths"), std::string::npos);
  EXPECT_NE(text.find("80"), std::string::npos);
  EXPECT_NE(text.find("71"), std::string::npos);
}

TEST(Cli, CheckRunningExample) {
  CliRun r = cli({"check", corpus_path("icell.mix")});
  EXPECT_EQ(r.status, 1);
  auto valid = r.out.find("  Valid");
  auto invalid = r.out.find("  Invalid (not proven)");
  ASSERT_NE(valid, std::string::npos) << r.out;
  ASSERT_NE(invalid, std::string::npos) << r.out;
  EXPECT_LT(valid, invalid);
  EXPECT_NE(r.out.find("OddICell ← Double ← Inc ← BICell ← ICell"), std::string::npos);
}

TEST(Cli, LinSubcommand) {
  CliRun r = cli({"lin", corpus_path("icell.mix"), "OddICell"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "OddICell ← Double ← Inc ← BICell ← ICell\n");
  CliRun j = cli({"lin", corpus_path("icell.mix"), "EvenICell", "--json"});
  json doc = json::parse(j.out);
  EXPECT_EQ(doc["queries"][0]["order"], json({"EvenICell", "Inc", "Double", "BICell", "ICell"}));
  EXPECT_EQ(cli({"lin", corpus_path("icell.mix"), "Nope"}).status, 2);
}

TEST(Cli, EmptyCheckFile) {
  CliRun r = cli({"check", temp_file("empty.mix", "")});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"check", corpus_path("lists.mix")}).status, 0);
  EXPECT_EQ(cli({"subtype", corpus_path("icell.mix"), "OddICell", "BICell with Inc with Double"}).status, 0);
  EXPECT_EQ(cli({"subtype", corpus_path("icell.mix"), "EvenICell", "BICell with Inc with Double"}).status, 1);
  EXPECT_EQ(cli({"subtype", corpus_path("icell.mix"), "EvenICell", "Nope"}).status, 2);
  EXPECT_EQ(cli({"check", "/nonexistent/file.mix"}).status, 2);
  EXPECT_EQ(cli({"check", temp_file("bad.mix", "trait A extends B.")}).status, 2);
  EXPECT_EQ(cli({"check", corpus_path("lists.mix"), "--budget", "-3"}).status, 2);
  EXPECT_EQ(cli({}).status, 2);
}

TEST(Cli, EntailQueryAgainstFile) {
  CliRun ok = cli({"entail", corpus_path("lists.mix"), "x::node<_, null> |- x::ll<m> & m = 1"});
  EXPECT_EQ(ok.status, 0) << ok.err;
  CliRun no = cli({"entail", corpus_path("lists.mix"), "x::node<_, null> |- x::ll<m> & m = 2"});
  EXPECT_EQ(no.status, 1);
  CliRun frame = cli({"entail", corpus_path("lists.mix"), "x::node<1, y> * y::node<2, null> |- x::node<a, b>", "--no-frame"});
  EXPECT_EQ(frame.status, 1);
}

TEST(Cli, BudgetFlagAndEnvironment) {
  EXPECT_EQ(cli({"entail", corpus_path("lists.mix"), "x::node<_, null> |- x::ll<m> & m = 1", "--budget", "0"}).status, 1);
  setenv("MIXCHECK_BUDGET", "0", 1);
  EXPECT_EQ(cli({"entail", corpus_path("lists.mix"), "x::node<_, null> |- x::ll<m> & m = 1"}).status, 1);
  unsetenv("MIXCHECK_BUDGET");
  EXPECT_EQ(cli({"entail", corpus_path("lists.mix"), "x::node<_, null> |- x::ll<m> & m = 1"}).status, 0);
}

TEST(Cli, JsonSchema) {
  CliRun r = cli({"check", corpus_path("lists.mix"), "--json", "--trace"});
  json doc = json::parse(r.out);
  EXPECT_EQ(doc["version"], "mixcheck-1");
  ASSERT_EQ(doc["queries"].size(), 4u);
  for (const auto& q : doc["queries"]) {
    EXPECT_EQ(q["kind"], "entail");
    EXPECT_EQ(q["verdict"], "Valid");
    EXPECT_TRUE(q.contains("residue"));
    EXPECT_TRUE(q.contains("trace"));
    EXPECT_TRUE(q["input"].is_string());
  }
  json plain = json::parse(cli({"check", corpus_path("lists.mix"), "--json"}).out);
  EXPECT_FALSE(plain["queries"][0].contains("trace"));
}

TEST(Cli, StudyMaths) {
  CliRun r = cli({"study", corpus_path("maths.mix")});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("PartialOrdering is NOT SUPERTYPE of Ordering"), std::string::npos) << r.out;
  CliRun j = cli({"study", corpus_path("maths.mix"), corpus_path("icell.mix"), "--json"});
  json doc = json::parse(j.out);
  ASSERT_EQ(doc["study"]["rows"].size(), 2u);
  EXPECT_EQ(doc["study"]["rows"][0]["name"], "Maths");
  EXPECT_EQ(doc["study"]["rows"][0]["total"], 5);
  EXPECT_EQ(doc["study"]["rows"][0]["verified"], 4);
  EXPECT_EQ(doc["study"]["rows"][0]["percentage"], 80);
  EXPECT_EQ(doc["study"]["rows"][1]["name"], "ICell");
  EXPECT_EQ(doc["study"]["rows"][1]["percentage"], 50);
  EXPECT_EQ(doc["study"]["totals"]["total"], 7);
  EXPECT_EQ(doc["study"]["totals"]["verified"], 5);
}

TEST(Cli, StudyEmptyAndBrokenFiles) {
  CliRun e = cli({"study", "--json"});
  EXPECT_EQ(e.status, 0);
  json doc = json::parse(e.out);
  EXPECT_TRUE(doc["study"]["rows"].empty());
  EXPECT_TRUE(doc["study"]["totals"]["percentage"].is_null());
  EXPECT_NE(cli({"study"}).out.find("—"), std::string::npos);
  CliRun bad = cli({"study", corpus_path("maths.mix"), "/nonexistent.mix"});
  EXPECT_EQ(bad.status, 2);
  EXPECT_NE(bad.out.find("Maths"), std::string::npos);
}

TEST(Cli, PredsDump) {
  CliRun r = cli({"preds", corpus_path("icell.mix")});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("pred OddICell<> == exists v, v1: self::BICell<v> * v::Inc<v1> * v1::Double<null>."),
            std::string::npos)
      << r.out;
}

TEST(Cli, ReplSubcommand) {
  CliRun r = cli({"repl", corpus_path("icell.mix")}, "subtype OddICell <: (BICell with Inc with Double).\n:quit\n");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("mixcheck> "), std::string::npos);
}
