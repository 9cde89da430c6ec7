#include "mixcheck/entail.hpp"

#include <algorithm>
#include <optional>

#include "mixcheck/pure.hpp"

namespace mixcheck {

namespace {

constexpr std::size_t kMaxLog = 400;

const PredDef& def_of(const PredEnv& env, const PredInst& a) {
  const PredDef& d = env.get(a.name.name());
  if (d.arity() != a.args.size() + 1)
    throw Error("arity mismatch for '" + a.name.str() + "': expected " + std::to_string(d.arity()) + ", got " +
                std::to_string(a.args.size() + 1));
  return d;
}

Subst param_subst(const PredDef& d, const PredInst& a) {
  Subst s;
  s[d.params[0]] = a.root;
  for (std::size_t i = 0; i < a.args.size(); ++i) s[d.params[i + 1]] = a.args[i];
  return s;
}

SymbolicHeap instantiate_body(const PredDef& d, const PredInst& a, std::size_t i) {
  return substitute(fresh_rename(d.body().disjuncts[i]), param_subst(d, a));
}

bool proven(const PureFormula& gamma, const PureAtom& a) {
  return pure_entail(gamma, PureFormula{{a}}) == PureVerdict::Proven;
}

LinearExpr replace_var(const LinearExpr& e, const Ident& u, const LinearExpr& by) {
  std::int64_t k = e.coeff(u);
  if (k == 0) return e;
  LinearExpr out = e;
  out.add_term(u, -k);
  out.add(by, k);
  return out;
}

bool mentions(const PureAtom& a, const Ident& u) {
  IdentSet vs;
  a.collect_vars(vs);
  return vs.count(u) != 0;
}

bool is_disequality(const PureAtom& a) {
  return a.negated && !std::holds_alternative<Leq0>(a.body);
}

// Removes the unbound instantiable variables `vars` from the goal, keeping
// an equivalent (for the existential closure) formula over the rest.
// Returns nullopt when some variable cannot be eliminated exactly.
std::optional<PureFormula> eliminate(PureFormula g, const IdentSet& vars) {
  auto live = [&]() {
    IdentSet out;
    for (const auto& a : g.atoms) {
      IdentSet vs;
      a.collect_vars(vs);
      for (const auto& v : vs)
        if (vars.count(v)) out.insert(v);
    }
    return out;
  };

  // Plain (null) equalities bind directly.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < g.atoms.size() && !changed; ++i) {
      const PureAtom& a = g.atoms[i];
      if (a.negated) continue;
      Subst s;
      if (const auto* e = std::get_if<VarEq>(&a.body)) {
        if (vars.count(e->lhs)) s[e->lhs] = e->rhs;
        else if (vars.count(e->rhs)) s[e->rhs] = e->lhs;
      } else if (const auto* n = std::get_if<NullEq>(&a.body)) {
        if (vars.count(n->var)) s[n->var] = Ident::null();
      }
      if (s.empty()) continue;
      g.atoms.erase(g.atoms.begin() + static_cast<std::ptrdiff_t>(i));
      try {
        g = substitute(g, s);
      } catch (const Error&) {
        return std::nullopt;
      }
      changed = true;
    }
  }

  for (const Ident& u : live()) {
    // Arithmetic occurrences only from here on: turn remaining equalities on u
    // into Eq0 atoms, give up on null tests.
    for (auto& a : g.atoms) {
      if (const auto* e = std::get_if<VarEq>(&a.body)) {
        if (e->lhs == u || e->rhs == u) a = PureAtom::eq0(LinearExpr::of_var(e->lhs) - LinearExpr::of_var(e->rhs), a.negated);
      } else if (const auto* n = std::get_if<NullEq>(&a.body)) {
        if (n->var == u) return std::nullopt;
      }
    }

    auto solved = std::find_if(g.atoms.begin(), g.atoms.end(), [&](const PureAtom& a) {
      const auto* e = std::get_if<Eq0>(&a.body);
      return e && !a.negated && (e->expr.coeff(u) == 1 || e->expr.coeff(u) == -1);
    });
    if (solved != g.atoms.end()) {
      LinearExpr e = std::get<Eq0>(solved->body).expr;
      std::int64_t k = e.coeff(u);
      e.add_term(u, -k);
      LinearExpr value = k == 1 ? -e : e;
      g.atoms.erase(solved);
      for (auto& a : g.atoms) {
        if (auto* l = std::get_if<Leq0>(&a.body)) l->expr = replace_var(l->expr, u, value);
        else if (auto* q = std::get_if<Eq0>(&a.body)) q->expr = replace_var(q->expr, u, value);
      }
      continue;
    }

    bool only_diseq = std::all_of(g.atoms.begin(), g.atoms.end(),
                                  [&](const PureAtom& a) { return !mentions(a, u) || is_disequality(a); });
    if (only_diseq) {
      std::erase_if(g.atoms, [&](const PureAtom& a) { return mentions(a, u); });
      continue;
    }

    std::vector<LinearExpr> lower, upper;
    PureFormula rest;
    for (const auto& a : g.atoms) {
      if (!mentions(a, u)) {
        rest.add(a);
        continue;
      }
      const auto* l = std::get_if<Leq0>(&a.body);
      if (!l) return std::nullopt;
      LinearExpr e = a.negated ? (-l->expr + LinearExpr::of_const(1)) : l->expr;
      std::int64_t k = e.coeff(u);
      if (k == 1) upper.push_back(e);
      else if (k == -1) lower.push_back(e);
      else return std::nullopt;
    }
    for (const auto& lo : lower)
      for (const auto& up : upper) rest.add(PureAtom::leq0(lo + up));
    g = std::move(rest);
  }
  return g;
}

struct Branch {
  std::vector<PredInst> ante;       // unconsumed antecedent atoms
  std::vector<Ident> data_roots;    // every data root owned on this branch
  PureFormula pure;                 // antecedent pure part, kept in the residue
  PureFormula facts;                // pure + heap facts
  bool facts_changed = true;
  std::vector<PredInst> todo;       // unmatched consequent atoms
  PureFormula goal;                 // consequent pure and equality obligations
  Subst sigma;
  IdentSet inst;
  int budget = 0;
  std::vector<std::string> trace;
};

struct Outcome {
  std::vector<SymbolicHeap> residues;
  std::vector<std::string> trace;
  Subst sigma;
};

class Search {
 public:
  Search(const PredEnv& env, bool frame) : env_(env), frame_(frame) {}

  void own(Branch& b, const std::vector<PredInst>& atoms) const {
    for (const auto& a : atoms) {
      const PredDef& d = def_of(env_, a);
      if (d.is_data()) {
        b.facts.add(PureAtom::equal(a.root, Ident::null(), true));
        for (const auto& r : b.data_roots) b.facts.add(PureAtom::equal(a.root, r, true));
        b.data_roots.push_back(a.root);
      }
      if (d.invariant) b.facts.append(substitute(*d.invariant, param_subst(d, a)));
      b.ante.push_back(a);
    }
    b.facts_changed = true;
  }

  std::optional<Outcome> prove(Branch b) {
    if (b.facts_changed) {
      b.facts_changed = false;
      if (pure_sat(b.facts) == SatResult::Unsat) {
        b.trace.push_back("CONTRADICTION");
        SymbolicHeap f;
        f.pure.add(PureAtom::falsum());
        return Outcome{{f}, b.trace, b.sigma};
      }
    }
    if (b.todo.empty()) return finish(std::move(b));

    const PredInst c = substitute(b.todo.front(), b.sigma);
    const PredDef& cd = def_of(env_, c);
    const bool free_root = unbound(b, c.root);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < b.ante.size(); ++i)
      if (b.ante[i].name == c.name && b.ante[i].root == c.root) order.push_back(i);
    for (std::size_t i = 0; i < b.ante.size(); ++i)
      if (b.ante[i].name == c.name && !(b.ante[i].root == c.root)) order.push_back(i);

    for (std::size_t i : order) {
      const PredInst& a = b.ante[i];
      if (!(a.root == c.root) && !free_root && !proven(b.facts, PureAtom::equal(c.root, a.root))) continue;
      Branch nb = b;
      if (free_root) nb.sigma[c.root] = a.root;
      for (std::size_t j = 0; j < c.args.size(); ++j) {
        auto it = nb.sigma.find(c.args[j]);
        const Ident x = it == nb.sigma.end() ? c.args[j] : it->second;
        const Ident& y = a.args[j];
        if (x == y) continue;
        if (unbound(nb, x)) nb.sigma[x] = y;
        else nb.goal.add(PureAtom::equal(x, y));
      }
      step(nb, "MATCH " + c.name.str() + " " + c.root.str() + "↦" + a.root.str());
      nb.ante.erase(nb.ante.begin() + static_cast<std::ptrdiff_t>(i));
      nb.todo.erase(nb.todo.begin());
      if (auto r = prove(std::move(nb))) return r;
    }

    if (b.budget <= 0) return std::nullopt;

    std::vector<std::size_t> near, far;
    bool left_first = false;
    for (std::size_t k = 0; k < b.ante.size(); ++k) {
      if (!def_of(env_, b.ante[k]).is_defined()) continue;
      const bool same_root =
          !free_root && (b.ante[k].root == c.root || proven(b.facts, PureAtom::equal(c.root, b.ante[k].root)));
      (same_root ? near : far).push_back(k);
      if (same_root && !(b.ante[k].name == c.name)) left_first = true;
    }

    auto try_left = [&](const std::vector<std::size_t>& ks) -> std::optional<Outcome> {
      for (std::size_t k : ks)
        if (auto r = unfold_left(b, k)) return r;
      return std::nullopt;
    };
    if (left_first)
      if (auto r = try_left(near)) return r;
    if (cd.is_defined()) {
      for (std::size_t i = 0; i < cd.body().disjuncts.size(); ++i) {
        Branch nb = b;
        SymbolicHeap body = instantiate_body(cd, c, i);
        nb.inst.insert(body.existentials.begin(), body.existentials.end());
        nb.todo.erase(nb.todo.begin());
        nb.todo.insert(nb.todo.begin(), body.spatial.begin(), body.spatial.end());
        nb.goal.append(body.pure);
        nb.budget--;
        step(nb, "UNFOLD-R " + c.name.str() + "#" + std::to_string(i + 1));
        if (auto r = prove(std::move(nb))) return r;
      }
    }
    if (!left_first)
      if (auto r = try_left(near)) return r;
    return try_left(far);
  }

  const std::vector<std::string>& log() const { return log_; }

 private:
  static bool unbound(const Branch& b, const Ident& v) { return b.inst.count(v) && !b.sigma.count(v); }

  void step(Branch& b, std::string s) {
    if (log_.size() < kMaxLog) log_.push_back(s);
    b.trace.push_back(std::move(s));
  }

  // Every body disjunct of ante[k] must lead to a proof.
  std::optional<Outcome> unfold_left(const Branch& b, std::size_t k) {
    const PredInst a = b.ante[k];
    const PredDef& d = def_of(env_, a);
    Outcome all;
    for (std::size_t i = 0; i < d.body().disjuncts.size(); ++i) {
      Branch nb = b;
      nb.ante.erase(nb.ante.begin() + static_cast<std::ptrdiff_t>(k));
      SymbolicHeap body = instantiate_body(d, a, i);
      nb.pure.append(body.pure);
      nb.facts.append(body.pure);
      own(nb, body.spatial);
      nb.budget--;
      step(nb, "UNFOLD-L " + a.name.str() + "#" + std::to_string(i + 1));
      auto r = prove(std::move(nb));
      if (!r) return std::nullopt;
      if (i == 0) all.sigma = r->sigma;
      all.residues.insert(all.residues.end(), r->residues.begin(), r->residues.end());
      all.trace = std::move(r->trace);
    }
    return all;
  }

  std::optional<Outcome> finish(Branch b) {
    if (!frame_ && !b.ante.empty()) {
      if (b.budget <= 0) return std::nullopt;
      for (std::size_t k = 0; k < b.ante.size(); ++k)
        if (def_of(env_, b.ante[k]).is_defined())
          if (auto r = unfold_left(b, k)) return r;
      return std::nullopt;
    }
    PureFormula goal;
    try {
      goal = substitute(b.goal, b.sigma);
    } catch (const Error&) {
      return std::nullopt;
    }
    IdentSet open;
    for (const auto& v : b.inst)
      if (!b.sigma.count(v)) open.insert(v);
    auto g = eliminate(std::move(goal), open);
    if (!g || pure_entail(b.facts, *g) != PureVerdict::Proven) return std::nullopt;
    step(b, "EMP-RIGHT");
    return Outcome{{SymbolicHeap{{}, b.ante, b.pure}}, b.trace, b.sigma};
  }

  const PredEnv& env_;
  bool frame_;
  std::vector<std::string> log_;
};

// Removes pure atoms that only constrain bound variables absent from the
// spatial part, when they are satisfiable on their own (so the quantified
// conjunction is just true).
SymbolicHeap drop_local_pure(SymbolicHeap h) {
  IdentSet local(h.existentials.begin(), h.existentials.end());
  for (const auto& a : h.spatial) {
    local.erase(a.root);
    for (const auto& x : a.args) local.erase(x);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& a : h.pure.atoms) {
      IdentSet vs;
      a.collect_vars(vs);
      bool mixed = std::any_of(vs.begin(), vs.end(), [&](const Ident& v) { return !v.is_null() && !local.count(v); });
      if (!mixed) continue;
      for (const auto& v : vs) changed = local.erase(v) > 0 || changed;
    }
  }
  PureFormula keep, drop;
  for (const auto& a : h.pure.atoms) {
    IdentSet vs;
    a.collect_vars(vs);
    bool only_local = !vs.empty() && std::all_of(vs.begin(), vs.end(), [&](const Ident& v) { return local.count(v) > 0; });
    (only_local ? drop : keep).add(a);
  }
  if (drop.empty() || pure_sat(drop) != SatResult::Sat) return h;
  h.pure = std::move(keep);
  std::erase_if(h.existentials, [&](const Ident& v) { return local.count(v) > 0; });
  return h;
}

// Quantifies everything outside `keep` and gives the bound variables short
// readable names.
SymbolicHeap tidy(const SymbolicHeap& h, const IdentSet& keep) {
  IdentSet fv = free_vars(h);
  IdentSet taken;
  for (const auto& v : fv)
    if (keep.count(v) || !v.is_fresh()) taken.insert(v);
  Subst s;
  std::vector<Ident> bound;
  for (const auto& v : fv) {
    if (keep.count(v)) continue;
    Ident n = v;
    if (v.is_fresh()) {
      n = Ident(v.name());
      for (int i = 1; taken.count(n); ++i) n = Ident(v.name() + std::to_string(i));
      taken.insert(n);
      s[v] = n;
    }
    bound.push_back(n);
  }
  SymbolicHeap out = substitute(h, s);
  out.existentials = bound;
  return drop_local_pure(out);
}

bool is_falsum(const SymbolicHeap& h) {
  return std::any_of(h.pure.atoms.begin(), h.pure.atoms.end(), [](const PureAtom& a) { return a == PureAtom::falsum(); });
}

}  // namespace

PureFormula heap_facts(const PredEnv& env, const std::vector<PredInst>& atoms) {
  Search s(env, true);
  Branch b;
  s.own(b, atoms);
  return b.facts;
}

EntailResult check_entail(const PredEnv& env, const Formula& ante, const Formula& conseq, const EntailOptions& opts) {
  if (opts.budget < 0) throw Error("unfold budget must be non-negative");
  const IdentSet ante_fv = free_vars(ante);
  IdentSet query_fv = ante_fv;
  for (const auto& v : free_vars(conseq)) query_fv.insert(v);

  EntailResult res;
  std::vector<SymbolicHeap> residues;
  for (const auto& A : ante.disjuncts) {
    SymbolicHeap a = fresh_rename(A);
    Subst skolem_names;
    for (std::size_t i = 0; i < a.existentials.size(); ++i) skolem_names[a.existentials[i]] = A.existentials[i];
    a.existentials.clear();

    std::optional<Outcome> out;
    Subst conseq_names;
    Search search(env, opts.allow_frame);
    for (const auto& C : conseq.disjuncts) {
      SymbolicHeap c = fresh_rename(C);
      Branch b;
      b.budget = opts.budget;
      b.pure = a.pure;
      b.facts = a.pure;
      search.own(b, a.spatial);
      b.todo = c.spatial;
      b.goal = c.pure;
      b.inst.insert(c.existentials.begin(), c.existentials.end());
      for (const auto& v : free_vars(C))
        if (!ante_fv.count(v)) b.inst.insert(v);
      out = search.prove(std::move(b));
      if (out) {
        conseq_names.clear();
        for (std::size_t i = 0; i < c.existentials.size(); ++i) conseq_names[c.existentials[i]] = C.existentials[i];
        break;
      }
    }
    if (!out) {
      res.verdict = Verdict::NotProven;
      res.residue.reset();
      res.instantiation.clear();
      res.trace.insert(res.trace.end(), search.log().begin(), search.log().end());
      return res;
    }
    res.trace.insert(res.trace.end(), out->trace.begin(), out->trace.end());
    if (residues.empty()) {
      for (const auto& [from, to] : out->sigma) {
        Ident name = from;
        if (auto it = conseq_names.find(from); it != conseq_names.end()) name = it->second;
        else if (!query_fv.count(from)) continue;
        Ident value = to;
        if (auto it = skolem_names.find(to); it != skolem_names.end()) value = it->second;
        res.instantiation.emplace_back(name, value);
      }
    }
    for (auto& r : out->residues) {
      if (is_falsum(r) && (out->residues.size() > 1 || !residues.empty())) continue;
      SymbolicHeap t = tidy(r, query_fv);
      bool dup = std::any_of(residues.begin(), residues.end(), [&](const SymbolicHeap& o) { return alpha_equivalent(o, t); });
      if (!dup) residues.push_back(std::move(t));
    }
  }
  res.verdict = Verdict::Valid;
  if (residues.empty()) residues.push_back(SymbolicHeap{{}, {}, PureFormula{{PureAtom::falsum()}}});
  std::erase_if(residues, [&](const SymbolicHeap& r) { return is_falsum(r) && residues.size() > 1; });
  res.residue = Formula(std::move(residues));
  return res;
}

EntailResult check_entail(const Program& p, const Formula& ante, const Formula& conseq, const EntailOptions& opts) {
  return check_entail(PredEnv(p), ante, conseq, opts);
}

std::vector<Diagnostic> check_invariants(const Program& p) {
  std::vector<Diagnostic> out;
  PredEnv env(p);
  for (const PredDef* d : p.pred_defs()) {
    if (!d->is_defined() || !d->invariant) continue;
    for (std::size_t i = 0; i < d->body().disjuncts.size(); ++i) {
      SymbolicHeap h = fresh_rename(d->body().disjuncts[i]);
      PureFormula gamma = h.pure;
      gamma.append(heap_facts(env, h.spatial));
      if (pure_entail(gamma, *d->invariant) != PureVerdict::Proven)
        out.push_back({d->span, "invariant of '" + d->name.str() + "' is not implied by body disjunct " +
                                    std::to_string(i + 1)});
    }
  }
  return out;
}

}  // namespace mixcheck
