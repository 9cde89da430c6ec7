// Compiles traits into abstract two-parameter predicates `T<self, next>` and
// mixin classes into defined one-parameter predicates whose body is the chain
// of their traits, base first, terminated by null:
//
//   OddICell<self> == exists v, v1: self::BICell<v> * v::Inc<v1> * v1::Double<null>

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixcheck/core.hpp"

namespace mixcheck {

struct Chain {
  Ident owner;
  Ident self;
  /// links[i] = vars[i]::T<vars[i+1]>; the last link's argument is the
  /// terminal (null unless reopened).
  std::vector<PredInst> links;
  /// Linking variables between consecutive links (links.size() - 1 of them).
  std::vector<Ident> linking_vars;

  std::vector<std::string> link_names() const;
  const Ident& terminal() const { return links.back().args.front(); }
  /// The chain as a symbolic heap with its linking variables quantified.
  SymbolicHeap heap() const;
};

/// Abstract `T<self, next>`; interface-only traits get no predicate.
std::optional<PredDef> gen_trait_pred(const TraitDecl& t);

/// Chain of the non-interface traits in the linearization of `t`, reversed
/// (base first), rooted at `self`. Throws Error when no link remains.
Chain gen_chain(const Program& p, const TypeExpr& t, const Ident& self);
Chain gen_chain(const Program& p, const Ident& name, const Ident& self);

/// Whether the chain of `name` has at least one link.
bool has_chain(const Program& p, const Ident& name);

/// `C<self> == exists v, v1, ...: chain`.
PredDef gen_mixin_pred(const Program& p, const ClassDecl& c);

/// Every predicate usable in formulas over `p`: data, user-declared and
/// generated ones, with their parameter kinds.
class PredEnv {
 public:
  PredEnv() = default;
  explicit PredEnv(const Program& p);

  void add(PredDef d);
  const PredDef* find(const std::string& name) const;
  /// Throws Error for unknown names.
  const PredDef& get(const std::string& name) const;
  const Signatures& signatures() const { return sigs_; }
  const std::vector<std::string>& names() const { return order_; }

 private:
  std::map<std::string, PredDef> defs_;
  std::vector<std::string> order_;
  Signatures sigs_;
};

/// The generated predicates of `p` in declaration order. Classes with an
/// empty chain get none.
std::vector<PredDef> generated_preds(const Program& p);

}  // namespace mixcheck
