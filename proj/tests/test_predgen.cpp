#include <gtest/gtest.h>

#include <random>

#include "mixcheck/linearizer.hpp"
#include "mixcheck/parser.hpp"
#include "mixcheck/predgen.hpp"
#include "support.hpp"

using namespace mixcheck;
using namespace testsupport;

namespace {

using V = std::vector<std::string>;

// Body of `def` with its root parameter renamed to `self`.
Formula body_at_self(const PredDef& def) {
  return substitute(def.body(), {{def.params.at(0), Ident("self")}});
}

}  // namespace

TEST(GenTraitPred, AbstractWithSelfAndNext) {
  ParseResult r = parse_corpus("icell.mix");
  auto inc = gen_trait_pred(*r.program.find_trait("Inc"));
  ASSERT_TRUE(inc);
  EXPECT_TRUE(inc->is_abstract());
  EXPECT_EQ(inc->name.name(), "Inc");
  EXPECT_EQ(inc->arity(), 2u);
  auto bicell = gen_trait_pred(*r.program.find_trait("BICell"));
  ASSERT_TRUE(bicell);
  EXPECT_EQ(bicell->arity(), 2u);
  EXPECT_FALSE(gen_trait_pred(*r.program.find_trait("ICell")));
}

TEST(GenMixinPred, OddICellMatchesDisplayedDefinition) {
  ParseResult r = parse_corpus("icell.mix");
  PredDef d = gen_mixin_pred(r.program, *r.program.find_class("OddICell"));
  EXPECT_TRUE(d.is_defined());
  EXPECT_EQ(d.arity(), 1u);
  Formula want = parse_formula("exists v, v1: self::BICell<v> * v::Inc<v1> * v1::Double<null>");
  EXPECT_TRUE(alpha_equivalent(body_at_self(d), want)) << to_string(d);
}

TEST(GenMixinPred, EvenICellMatchesDisplayedDefinition) {
  ParseResult r = parse_corpus("icell.mix");
  PredDef d = gen_mixin_pred(r.program, *r.program.find_class("EvenICell"));
  Formula want = parse_formula("exists v, v1: self::BICell<v> * v::Double<v1> * v1::Inc<null>");
  EXPECT_TRUE(alpha_equivalent(body_at_self(d), want)) << to_string(d);
}

TEST(GenMixinPred, SingleLink) {
  ParseResult r = parse_program("interface trait I. trait BICell extends I. class K extends BICell.");
  PredDef d = gen_mixin_pred(r.program, *r.program.find_class("K"));
  EXPECT_TRUE(alpha_equivalent(body_at_self(d), parse_formula("self::BICell<null>"))) << to_string(d);
}

TEST(GenChain, Examples) {
  ParseResult r = parse_corpus("icell.mix");
  Chain odd = gen_chain(r.program, Ident("OddICell"), Ident("this"));
  EXPECT_EQ(odd.link_names(), (V{"BICell", "Inc", "Double"}));
  EXPECT_EQ(odd.links[0].root, Ident("this"));
  EXPECT_TRUE(odd.terminal().is_null());
  EXPECT_TRUE(alpha_equivalent(Formula(odd.heap()),
                               parse_formula("exists v, v1: this::BICell<v> * v::Inc<v1> * v1::Double<null>")));
  Chain even = gen_chain(r.program, Ident("EvenICell"), Ident("this"));
  EXPECT_EQ(even.link_names(), (V{"BICell", "Double", "Inc"}));
  Chain single = gen_chain(r.program, Ident("BICell"), Ident("x"));
  EXPECT_TRUE(alpha_equivalent(Formula(single.heap()), parse_formula("x::BICell<null>")));
  Chain anon = gen_chain(r.program, parse_type_expr("BICell with Inc with Double"), Ident("this"));
  EXPECT_EQ(anon.link_names(), (V{"BICell", "Inc", "Double"}));
}

TEST(GenChain, LinksAreConnected) {
  ParseResult r = parse_corpus("maths.mix");
  Chain c = gen_chain(r.program, Ident("Numeric"), Ident("this"));
  ASSERT_EQ(c.linking_vars.size() + 1, c.links.size());
  for (std::size_t i = 0; i + 1 < c.links.size(); ++i) {
    EXPECT_EQ(c.links[i].args.at(0), c.linking_vars[i]);
    EXPECT_EQ(c.links[i + 1].root, c.linking_vars[i]);
  }
}

TEST(GenChain, InterfaceOnlyChainIsAnError) {
  ParseResult r = parse_program("interface trait I. interface trait J extends I. class K extends J.");
  EXPECT_THROW(gen_chain(r.program, Ident("K"), Ident("this")), Error);
  EXPECT_THROW(gen_mixin_pred(r.program, *r.program.find_class("K")), Error);
  for (const char* text : {"K", "J with I"}) {
    try {
      gen_chain(r.program, parse_type_expr(text), Ident("this"));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(std::string("'") + text + "'"), std::string::npos) << e.what();
    }
  }
}

TEST(GenChain, DeterministicUpToRenaming) {
  ParseResult r = parse_corpus("icell.mix");
  auto a = gen_chain(r.program, Ident("OddICell"), Ident("this")).heap();
  auto b = gen_chain(r.program, Ident("OddICell"), Ident("this")).heap();
  EXPECT_TRUE(alpha_equivalent(a, b));
}

TEST(GenChain, LengthAndOrderOnRandomHierarchies) {
  std::mt19937 rng(31);
  for (int round = 0; round < 300; ++round) {
    Hierarchy h = random_hierarchy(rng, 8, 4);
    ParseResult r = parse_program(h.text);
    ASSERT_TRUE(r.ok());
    for (const auto& n : h.classes) {
      auto lin = naive_lin(r.program, n);
      V expect;
      for (auto it = lin.rbegin(); it != lin.rend(); ++it) {
        const TraitDecl* t = r.program.find_trait(*it);
        if (t && !t->interface_only) expect.push_back(*it);
      }
      if (expect.empty()) {
        EXPECT_THROW(gen_chain(r.program, Ident(n), Ident("this")), Error);
        continue;
      }
      Chain c = gen_chain(r.program, Ident(n), Ident("this"));
      EXPECT_EQ(c.link_names(), expect) << h.text << n;
      std::size_t interfaces = 0, classes = 0;
      for (const auto& x : lin) {
        const TraitDecl* t = r.program.find_trait(x);
        interfaces += t && t->interface_only;
        classes += r.program.find_class(x) != nullptr;
      }
      // Owner and inherited classes contribute no link.
      EXPECT_EQ(c.links.size(), lin.size() - interfaces - classes);
    }
  }
}

TEST(PredEnv, HoldsGeneratedAndDeclaredPredicates) {
  ParseResult r = parse_corpus("icell.mix");
  PredEnv env(r.program);
  EXPECT_TRUE(env.get("OddICell").is_defined());
  EXPECT_TRUE(env.get("Inc").is_abstract());
  EXPECT_EQ(env.find("ICell"), nullptr);
  EXPECT_THROW(env.get("Missing"), Error);
}

TEST(GeneratedPreds, PrintedFormReparses) {
  ParseResult r = parse_corpus("icell.mix");
  std::string text = to_string(r.program);
  for (const auto& d : generated_preds(r.program))
    if (d.is_defined()) text += "checkentail this::" + d.name.str() + "<> |- " + to_string(d.body()) + ".\n";
  ParseResult again = parse_program(text);
  EXPECT_TRUE(again.ok()) << text;
}
