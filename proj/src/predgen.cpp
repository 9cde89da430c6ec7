#include "mixcheck/predgen.hpp"

#include "mixcheck/linearizer.hpp"

namespace mixcheck {

namespace {

Chain chain_from(const Program& p, const Linearization& lin, const Ident& self, const std::string& shown) {
  std::vector<Ident> names;
  for (auto it = lin.order.rbegin(); it != lin.order.rend(); ++it) {
    if (*it == lin.owner) continue;
    const TraitDecl* t = p.find_trait(it->name());
    if (t && !t->interface_only) names.push_back(*it);
  }
  if (names.empty()) throw Error("empty chain: '" + shown + "' has no non-interface traits");

  Chain c{lin.owner, self, {}, {}};
  Ident cur = self;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Ident next = Ident::null();
    if (i + 1 < names.size()) {
      next = Ident::fresh("v");
      c.linking_vars.push_back(next);
    }
    c.links.push_back(PredInst{names[i], cur, {next}});
    cur = next;
  }
  return c;
}

}  // namespace

std::vector<std::string> Chain::link_names() const {
  std::vector<std::string> out;
  for (const auto& l : links) out.push_back(l.name.name());
  return out;
}

SymbolicHeap Chain::heap() const { return SymbolicHeap{linking_vars, links, {}}; }

std::optional<PredDef> gen_trait_pred(const TraitDecl& t) {
  if (t.interface_only) return std::nullopt;
  return PredDef{t.name, {Ident("self"), Ident("next")}, AbstractPred{}, std::nullopt, t.span};
}

Chain gen_chain(const Program& p, const TypeExpr& t, const Ident& self) {
  if (t.mixed.empty()) return gen_chain(p, t.base, self);
  return chain_from(p, linearize_type_expr(p, t), self, to_string(t));
}

Chain gen_chain(const Program& p, const Ident& name, const Ident& self) {
  if (p.find_class(name.name())) return chain_from(p, linearize(p, name), self, name.str());
  return chain_from(p, linearize_type_expr(p, TypeExpr::named(name)), self, name.str());
}

PredDef gen_mixin_pred(const Program& p, const ClassDecl& c) {
  const Ident self("self");
  Chain chain = chain_from(p, linearize(p, c.name), self, c.name.str());
  // Readable names for the bound linking variables: v, v1, v2, ...
  Subst s;
  std::vector<Ident> bound;
  for (std::size_t i = 0; i < chain.linking_vars.size(); ++i) {
    Ident n(i == 0 ? "v" : "v" + std::to_string(i));
    s.emplace(chain.linking_vars[i], n);
    bound.push_back(n);
  }
  SymbolicHeap body{bound, {}, {}};
  for (const auto& l : chain.links) body.spatial.push_back(substitute(l, s));
  return PredDef{c.name, {self}, DefinedPred{Formula(std::move(body))}, std::nullopt, c.span};
}

bool has_chain(const Program& p, const Ident& name) {
  Linearization lin = p.find_class(name.name()) ? linearize(p, name) : linearize_type_expr(p, TypeExpr::named(name));
  for (const auto& n : lin.order) {
    const TraitDecl* t = p.find_trait(n.name());
    if (n != lin.owner && t && !t->interface_only) return true;
  }
  return false;
}

std::vector<PredDef> generated_preds(const Program& p) {
  std::vector<PredDef> out;
  for (const auto& d : p.decls()) {
    if (const auto* t = std::get_if<TraitDecl>(&d)) {
      if (auto pd = gen_trait_pred(*t)) out.push_back(std::move(*pd));
    } else if (const auto* c = std::get_if<ClassDecl>(&d)) {
      if (has_chain(p, c->name)) out.push_back(gen_mixin_pred(p, *c));
    }
  }
  return out;
}

PredEnv::PredEnv(const Program& p) : sigs_(mixcheck::signatures(p)) {
  for (const auto& d : p.decls()) {
    if (const auto* pd = std::get_if<PredDef>(&d)) add(*pd);
  }
  for (auto& g : generated_preds(p)) add(std::move(g));
}

void PredEnv::add(PredDef d) {
  std::string n = d.name.name();
  if (!defs_.count(n)) order_.push_back(n);
  if (!sigs_.count(n)) {
    std::vector<VarKind> ks(d.params.size(), VarKind::Unknown);
    if (!ks.empty()) ks[0] = VarKind::Pointer;
    if (d.is_data())
      for (std::size_t i = 0; i < d.fields().size() && i + 1 < ks.size(); ++i) ks[i + 1] = kind_of(d.fields()[i].sort);
    if (d.is_abstract())
      for (auto& k : ks) k = k == VarKind::Unknown && d.params.size() == 2 ? VarKind::Pointer : k;
    sigs_[n] = std::move(ks);
  }
  defs_.insert_or_assign(n, std::move(d));
}

const PredDef* PredEnv::find(const std::string& name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

const PredDef& PredEnv::get(const std::string& name) const {
  const PredDef* d = find(name);
  if (!d) throw Error("unknown predicate '" + name + "'");
  return *d;
}

}  // namespace mixcheck
