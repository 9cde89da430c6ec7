#include <algorithm>
#include <functional>

#include "mixcheck/core.hpp"
#include "mixcheck/predgen.hpp"

namespace mixcheck {

namespace {

const char* kind_name(VarKind k) {
  switch (k) {
    case VarKind::Pointer:
      return "pointer";
    case VarKind::Integer:
      return "integer";
    case VarKind::Bag:
      return "bag";
    case VarKind::Unknown:
      break;
  }
  return "unknown";
}

// Union-find over identifiers, each class carrying one kind.
class KindSolver {
 public:
  explicit KindSolver(std::vector<std::string>* conflicts) : conflicts_(conflicts) {}

  void touch(const Ident& v) { find(v); }

  void require(const Ident& v, VarKind k) {
    if (v.is_null() || k == VarKind::Unknown) return;
    Ident r = find(v);
    VarKind& cur = kind_[r];
    if (cur == VarKind::Unknown) {
      cur = k;
    } else if (cur != k) {
      report(v, cur, k);
    }
  }

  void unite(const Ident& a, const Ident& b) {
    if (a.is_null() || b.is_null()) {
      require(a.is_null() ? b : a, VarKind::Pointer);
      return;
    }
    Ident ra = find(a), rb = find(b);
    if (ra == rb) return;
    VarKind ka = kind_[ra], kb = kind_[rb];
    parent_[rb] = ra;
    if (ka == VarKind::Unknown) {
      kind_[ra] = kb;
    } else if (kb != VarKind::Unknown && ka != kb) {
      report(a, ka, kb);
    }
  }

  VarKind kind(const Ident& v) { return kind_[find(v)]; }

  std::map<Ident, VarKind> result() {
    std::map<Ident, VarKind> out;
    std::vector<Ident> keys;
    for (const auto& [v, p] : parent_) keys.push_back(v);
    for (const auto& v : keys) out[v] = kind(v);
    return out;
  }

 private:
  Ident find(const Ident& v) {
    auto it = parent_.find(v);
    if (it == parent_.end()) {
      parent_.emplace(v, v);
      kind_.emplace(v, VarKind::Unknown);
      return v;
    }
    if (it->second == v) return v;
    Ident root = find(it->second);
    parent_[v] = root;
    return root;
  }

  void report(const Ident& v, VarKind a, VarKind b) {
    if (conflicts_)
      conflicts_->push_back("variable '" + v.str() + "' is used both as " + kind_name(a) + " and " + kind_name(b));
  }

  std::map<Ident, Ident> parent_;
  std::map<Ident, VarKind> kind_;
  std::vector<std::string>* conflicts_;
};

void constrain(KindSolver& ks, const Signatures& sigs, const SymbolicHeap& h) {
  for (const auto& a : h.spatial) {
    if (!a.root.is_null()) ks.require(a.root, VarKind::Pointer);
    auto it = sigs.find(a.name.name());
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (!a.args[i].is_null()) ks.touch(a.args[i]);
      if (it != sigs.end() && i + 1 < it->second.size()) ks.require(a.args[i], it->second[i + 1]);
    }
  }
  for (const auto& p : h.pure.atoms) {
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, VarEq>) {
            ks.unite(b.lhs, b.rhs);
          } else if constexpr (std::is_same_v<T, NullEq>) {
            ks.require(b.var, VarKind::Pointer);
          } else {
            for (const auto& [v, k] : b.expr.coeffs) ks.require(v, VarKind::Integer);
          }
        },
        p.body);
  }
  for (const auto& e : h.existentials) ks.touch(e);
}

struct Checker {
  const Program& program;
  Signatures sigs;
  std::vector<Diagnostic> diags;

  void error(const SourceSpan& at, std::string msg) { diags.push_back({at, std::move(msg)}); }

  void check_atoms(const SymbolicHeap& h, const SourceSpan& at) {
    for (const auto& a : h.spatial) {
      const std::string& n = a.name.name();
      auto it = sigs.find(n);
      if (it == sigs.end()) {
        const TraitDecl* t = program.find_trait(n);
        if (t && t->interface_only) {
          error(at, "interface trait '" + n + "' has no predicate");
        } else {
          error(at, "unknown predicate '" + n + "'");
        }
        continue;
      }
      if (it->second.size() != a.args.size() + 1) {
        error(at, "predicate '" + n + "' expects " + std::to_string(it->second.size()) + " arguments (root included), got " +
                      std::to_string(a.args.size() + 1));
      }
    }
  }

  void check_formula(const Formula& f, const SourceSpan& at, const IdentSet* allowed_free,
                     const std::vector<std::pair<Ident, VarKind>>& seeds) {
    for (const auto& d : f.disjuncts) {
      check_atoms(d, at);
      IdentSet ex;
      for (const auto& e : d.existentials) {
        if (!ex.insert(e).second) error(at, "existential '" + e.str() + "' is bound twice");
        if (e.is_null()) error(at, "'null' cannot be quantified");
      }
      if (allowed_free) {
        for (const auto& v : free_vars(d))
          if (!allowed_free->count(v)) error(at, "variable '" + v.str() + "' is not a parameter (quantify it with exists)");
      }
    }
    std::vector<std::string> conflicts;
    KindSolver ks(&conflicts);
    for (const auto& [v, k] : seeds) ks.require(v, k);
    for (const auto& d : f.disjuncts) constrain(ks, sigs, d);
    for (auto& c : conflicts) error(at, std::move(c));
  }

  void check_pred(const PredDef& d) {
    IdentSet params;
    for (const auto& p : d.params)
      if (!params.insert(p).second) error(d.span, "parameter '" + p.str() + "' of '" + d.name.str() + "' is repeated");
    if (d.is_data()) {
      for (const auto& f : d.fields()) {
        if (f.sort.tag == Sort::Tag::Ptr && !program.declares(f.sort.type_name))
          error(d.span, "field '" + f.name.str() + "' has undeclared type '" + f.sort.type_name + "'");
      }
    }
    std::vector<std::pair<Ident, VarKind>> seeds;
    auto it = sigs.find(d.name.name());
    if (it != sigs.end())
      for (std::size_t i = 0; i < d.params.size() && i < it->second.size(); ++i) seeds.emplace_back(d.params[i], it->second[i]);
    if (d.is_defined()) check_formula(d.body(), d.span, &params, seeds);
    if (d.invariant) {
      for (const auto& v : free_vars(*d.invariant))
        if (!params.count(v)) error(d.span, "invariant of '" + d.name.str() + "' mentions non-parameter '" + v.str() + "'");
    }
  }

  void check_hierarchy() {
    for (const auto* t : program.traits()) {
      IdentSet seen;
      for (const auto& p : t->parents) {
        if (p == t->name) {
          error(t->span, "trait '" + t->name.str() + "' extends itself");
        } else if (!program.find_trait(p.name())) {
          error(t->span, "parent '" + p.str() + "' of trait '" + t->name.str() + "' is not a declared trait");
        }
        if (!seen.insert(p).second) error(t->span, "parent '" + p.str() + "' listed twice");
      }
    }
    for (const auto* c : program.classes()) {
      if (c->parents.empty()) error(c->span, "class '" + c->name.str() + "' needs at least one parent");
      IdentSet seen;
      for (const auto& p : c->parents) {
        if (p == c->name) {
          error(c->span, "class '" + c->name.str() + "' extends itself");
        } else if (!program.find_trait(p.name()) && !program.find_class(p.name())) {
          error(c->span, "parent '" + p.str() + "' of class '" + c->name.str() + "' is not a declared trait or class");
        }
        if (!seen.insert(p).second) error(c->span, "parent '" + p.str() + "' listed twice");
      }
    }
    check_cycles();
  }

  const std::vector<Ident>* parents_of(const std::string& n) const {
    if (const auto* t = program.find_trait(n)) return &t->parents;
    if (const auto* c = program.find_class(n)) return &c->parents;
    return nullptr;
  }

  void check_cycles() {
    std::map<std::string, int> state;  // 1 = on stack, 2 = done
    std::function<bool(const std::string&)> dfs = [&](const std::string& n) -> bool {
      state[n] = 1;
      if (const auto* ps = parents_of(n)) {
        for (const auto& p : *ps) {
          if (p.name() == n) continue;  // reported as self-extension
          int s = state[p.name()];
          if (s == 1) return true;
          if (s == 0 && parents_of(p.name()) && dfs(p.name())) return true;
        }
      }
      state[n] = 2;
      return false;
    };
    for (const auto& d : program.decls()) {
      if (std::holds_alternative<PredDef>(d)) continue;
      const std::string& n = decl_name(d).name();
      if (state[n] == 0 && dfs(n)) {
        error(decl_span(d), "inheritance cycle through '" + n + "'");
        return;
      }
    }
  }
};

}  // namespace

Signatures signatures(const Program& p) {
  Signatures sigs;
  for (const auto& d : p.decls()) {
    if (const auto* pd = std::get_if<PredDef>(&d)) {
      std::vector<VarKind> ks(pd->params.size(), VarKind::Unknown);
      if (!ks.empty()) ks[0] = VarKind::Pointer;
      if (pd->is_data()) {
        const auto& fs = pd->fields();
        for (std::size_t i = 0; i < fs.size() && i + 1 < ks.size(); ++i) ks[i + 1] = kind_of(fs[i].sort);
      }
      sigs[pd->name.name()] = std::move(ks);
    } else if (const auto* t = std::get_if<TraitDecl>(&d)) {
      if (!t->interface_only) sigs[t->name.name()] = {VarKind::Pointer, VarKind::Pointer};
    } else if (const auto* c = std::get_if<ClassDecl>(&d)) {
      bool links = true;
      try {
        links = has_chain(p, c->name);
      } catch (const Error&) {
        // unknown parents or cycles are reported separately
      }
      if (links) sigs[c->name.name()] = {VarKind::Pointer};
    }
  }
  // Defined predicates: propagate kinds through bodies until stable.
  for (int round = 0; round < 16; ++round) {
    bool changed = false;
    for (const auto* pd : p.pred_defs()) {
      if (!pd->is_defined()) continue;
      auto& ks = sigs[pd->name.name()];
      KindSolver solver(nullptr);
      for (std::size_t i = 0; i < pd->params.size(); ++i) solver.require(pd->params[i], ks[i]);
      for (const auto& d : pd->body().disjuncts) constrain(solver, sigs, d);
      if (pd->invariant) constrain(solver, sigs, SymbolicHeap{{}, {}, *pd->invariant});
      auto& ks2 = sigs[pd->name.name()];
      for (std::size_t i = 0; i < pd->params.size(); ++i) {
        VarKind k = solver.kind(pd->params[i]);
        if (ks2[i] == VarKind::Unknown && k != VarKind::Unknown) {
          ks2[i] = k;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return sigs;
}

std::map<Ident, VarKind> infer_kinds(const Signatures& sigs, const Formula& f, std::vector<std::string>* conflicts) {
  KindSolver ks(conflicts);
  for (const auto& d : f.disjuncts) constrain(ks, sigs, d);
  return ks.result();
}

std::vector<Diagnostic> well_formed(const Program& p) {
  Checker c{p, signatures(p), {}};
  c.check_hierarchy();
  for (const auto* d : p.data_defs()) c.check_pred(*d);
  for (const auto* d : p.pred_defs()) c.check_pred(*d);
  return std::move(c.diags);
}

std::vector<Diagnostic> well_formed_formula(const Program& p, const Formula& f, const SourceSpan& where) {
  Checker c{p, signatures(p), {}};
  c.check_formula(f, where, nullptr, {});
  return std::move(c.diags);
}

std::vector<Diagnostic> well_formed_type(const Program& p, const TypeExpr& t, const SourceSpan& where) {
  std::vector<Diagnostic> out;
  auto check = [&](const Ident& n) {
    if (!p.find_trait(n.name()) && !p.find_class(n.name()))
      out.push_back({where, "'" + n.str() + "' is not a declared trait or class"});
  };
  check(t.base);
  for (const auto& m : t.mixed) check(m);
  return out;
}

}  // namespace mixcheck
