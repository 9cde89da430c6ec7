#include "mixcheck/core.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>

namespace mixcheck {

namespace {

std::atomic<std::uint64_t> next_fresh_id{1};

}  // namespace

Ident::Ident(std::string name, std::uint64_t id) : name_(std::move(name)), id_(id) {
  if (name_.empty()) throw Error("identifier names must be non-empty");
}

Ident Ident::fresh(std::string_view base) {
  return Ident(std::string(base.empty() ? "v" : base), next_fresh_id.fetch_add(1));
}

Ident Ident::null() { return Ident("null"); }

void Ident::reserve(std::uint64_t id) {
  std::uint64_t cur = next_fresh_id.load();
  while (cur <= id && !next_fresh_id.compare_exchange_weak(cur, id + 1)) {
  }
}

std::string Ident::str() const {
  if (id_ == 0) return name_;
  return name_ + "#" + std::to_string(id_);
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string out = d.span.file.empty() ? std::string("<input>") : d.span.file;
  out += ":" + std::to_string(d.span.start_line) + ":" + std::to_string(d.span.start_col);
  out += ": error: " + d.message;
  return out;
}

VarKind kind_of(const Sort& s) {
  switch (s.tag) {
    case Sort::Tag::Int:
    case Sort::Tag::Bool:
      return VarKind::Integer;
    case Sort::Tag::Bag:
      return VarKind::Bag;
    case Sort::Tag::Shape:
    case Sort::Tag::Ptr:
      return VarKind::Pointer;
  }
  return VarKind::Unknown;
}

// ---------------------------------------------------------------------------
// LinearExpr / ArithTerm

LinearExpr LinearExpr::of_const(std::int64_t k) {
  LinearExpr e;
  e.constant = k;
  return e;
}

LinearExpr LinearExpr::of_var(const Ident& v, std::int64_t k) {
  LinearExpr e;
  e.add_term(v, k);
  return e;
}

LinearExpr& LinearExpr::add_term(const Ident& v, std::int64_t k) {
  if (k == 0) return *this;
  auto [it, inserted] = coeffs.emplace(v, k);
  if (!inserted) {
    it->second += k;
    if (it->second == 0) coeffs.erase(it);
  }
  return *this;
}

LinearExpr& LinearExpr::add(const LinearExpr& other, std::int64_t scale) {
  constant += scale * other.constant;
  for (const auto& [v, k] : other.coeffs) add_term(v, scale * k);
  return *this;
}

LinearExpr LinearExpr::operator-() const {
  LinearExpr e;
  return e.add(*this, -1);
}

std::int64_t LinearExpr::coeff(const Ident& v) const {
  auto it = coeffs.find(v);
  return it == coeffs.end() ? 0 : it->second;
}

std::int64_t LinearExpr::evaluate(const std::function<std::int64_t(const Ident&)>& value) const {
  std::int64_t r = constant;
  for (const auto& [v, k] : coeffs) r += k * value(v);
  return r;
}

LinearExpr LinearExpr::substitute(const Subst& s) const {
  LinearExpr e = of_const(constant);
  for (const auto& [v, k] : coeffs) {
    auto it = s.find(v);
    const Ident& target = it == s.end() ? v : it->second;
    if (target.is_null()) throw Error("null substituted into arithmetic for " + v.str());
    e.add_term(target, k);
  }
  return e;
}

ArithTerm ArithTerm::constant(std::int64_t k) { return ArithTerm(Const{k}); }
ArithTerm ArithTerm::scaled(std::int64_t k, Ident v) { return ArithTerm(Scaled{k, std::move(v)}); }
ArithTerm ArithTerm::sum(ArithTerm left, ArithTerm right) {
  return ArithTerm(std::make_shared<const Sum>(Sum{std::move(left), std::move(right)}));
}

ArithTerm ArithTerm::from_linear(const LinearExpr& e) {
  ArithTerm t = constant(e.constant);
  for (auto it = e.coeffs.rbegin(); it != e.coeffs.rend(); ++it) t = sum(scaled(it->second, it->first), t);
  return t;
}

LinearExpr ArithTerm::normalize() const {
  struct Visitor {
    LinearExpr operator()(const Const& c) const { return LinearExpr::of_const(c.k); }
    LinearExpr operator()(const Scaled& s) const { return LinearExpr::of_var(s.v, s.k); }
    LinearExpr operator()(const std::shared_ptr<const Sum>& s) const {
      return s->left.normalize() + s->right.normalize();
    }
  };
  return std::visit(Visitor{}, node_);
}

// ---------------------------------------------------------------------------
// PureAtom

PureAtom PureAtom::var_eq(Ident a, Ident b, bool negated) { return {VarEq{std::move(a), std::move(b)}, negated}; }

PureAtom PureAtom::equal(const Ident& a, const Ident& b, bool negated) {
  if (a.is_null() && b.is_null()) return negated ? falsum() : eq0(LinearExpr{});
  if (a.is_null()) return null_eq(b, negated);
  if (b.is_null()) return null_eq(a, negated);
  return var_eq(a, b, negated);
}

PureAtom PureAtom::null_eq(Ident v, bool negated) { return {NullEq{std::move(v)}, negated}; }
PureAtom PureAtom::leq0(LinearExpr e, bool negated) { return {Leq0{std::move(e)}, negated}; }
PureAtom PureAtom::eq0(LinearExpr e, bool negated) { return {Eq0{std::move(e)}, negated}; }
PureAtom PureAtom::falsum() { return leq0(LinearExpr::of_const(1)); }

PureAtom PureAtom::negation() const {
  PureAtom a = *this;
  a.negated = !negated;
  return a;
}

void PureAtom::collect_vars(IdentSet& out) const {
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          if (!b.lhs.is_null()) out.insert(b.lhs);
          if (!b.rhs.is_null()) out.insert(b.rhs);
        } else if constexpr (std::is_same_v<T, NullEq>) {
          if (!b.var.is_null()) out.insert(b.var);
        } else {
          for (const auto& [v, k] : b.expr.coeffs) out.insert(v);
        }
      },
      body);
}

// ---------------------------------------------------------------------------
// Heaps, formulas, programs

void SymbolicHeap::add(const HeapAtom& a) {
  if (const auto* p = std::get_if<PredInst>(&a)) spatial.push_back(*p);
}

Formula::Formula(std::vector<SymbolicHeap> ds) : disjuncts(std::move(ds)) {
  if (disjuncts.empty()) throw Error("a formula needs at least one disjunct");
}

const Ident& decl_name(const Decl& d) {
  return std::visit([](const auto& x) -> const Ident& { return x.name; }, d);
}

const SourceSpan& decl_span(const Decl& d) {
  return std::visit([](const auto& x) -> const SourceSpan& { return x.span; }, d);
}

void Program::add(Decl d) {
  const std::string& name = decl_name(d).name();
  if (index_.count(name)) throw Error("'" + name + "' is already defined");
  index_.emplace(name, decls_.size());
  decls_.push_back(std::move(d));
}

const Decl* Program::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &decls_[it->second];
}

const PredDef* Program::find_pred(const std::string& name) const {
  const Decl* d = find(name);
  return d ? std::get_if<PredDef>(d) : nullptr;
}

const TraitDecl* Program::find_trait(const std::string& name) const {
  const Decl* d = find(name);
  return d ? std::get_if<TraitDecl>(d) : nullptr;
}

const ClassDecl* Program::find_class(const std::string& name) const {
  const Decl* d = find(name);
  return d ? std::get_if<ClassDecl>(d) : nullptr;
}

std::vector<const PredDef*> Program::data_defs() const {
  std::vector<const PredDef*> out;
  for (const auto& d : decls_)
    if (const auto* p = std::get_if<PredDef>(&d); p && p->is_data()) out.push_back(p);
  return out;
}

std::vector<const PredDef*> Program::pred_defs() const {
  std::vector<const PredDef*> out;
  for (const auto& d : decls_)
    if (const auto* p = std::get_if<PredDef>(&d); p && !p->is_data()) out.push_back(p);
  return out;
}

std::vector<const TraitDecl*> Program::traits() const {
  std::vector<const TraitDecl*> out;
  for (const auto& d : decls_)
    if (const auto* t = std::get_if<TraitDecl>(&d)) out.push_back(t);
  return out;
}

std::vector<const ClassDecl*> Program::classes() const {
  std::vector<const ClassDecl*> out;
  for (const auto& d : decls_)
    if (const auto* c = std::get_if<ClassDecl>(&d)) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Free variables

IdentSet free_vars(const PureFormula& f) {
  IdentSet out;
  for (const auto& a : f.atoms) a.collect_vars(out);
  return out;
}

IdentSet free_vars(const SymbolicHeap& h) {
  IdentSet out = free_vars(h.pure);
  for (const auto& a : h.spatial) {
    if (!a.root.is_null()) out.insert(a.root);
    for (const auto& x : a.args)
      if (!x.is_null()) out.insert(x);
  }
  for (const auto& e : h.existentials) out.erase(e);
  return out;
}

IdentSet free_vars(const Formula& f) {
  IdentSet out;
  for (const auto& d : f.disjuncts) {
    IdentSet fv = free_vars(d);
    out.insert(fv.begin(), fv.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

const Ident& apply(const Subst& s, const Ident& v) {
  auto it = s.find(v);
  return it == s.end() ? v : it->second;
}

// Rebuilds an equality-style atom after its operands changed, folding the
// cases where null ends up on one or both sides.
std::optional<PureAtom> rebuild_equality(const Ident& a, const Ident& b, bool negated) {
  if (a.is_null() && b.is_null()) {
    if (negated) return PureAtom::falsum();
    return std::nullopt;
  }
  return PureAtom::equal(a, b, negated);
}

}  // namespace

PureFormula substitute(const PureFormula& f, const Subst& s) {
  if (s.empty()) return f;
  PureFormula out;
  for (const auto& a : f.atoms) {
    std::optional<PureAtom> r = std::visit(
        [&](const auto& b) -> std::optional<PureAtom> {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, VarEq>) {
            return rebuild_equality(apply(s, b.lhs), apply(s, b.rhs), a.negated);
          } else if constexpr (std::is_same_v<T, NullEq>) {
            return rebuild_equality(apply(s, b.var), Ident::null(), a.negated);
          } else {
            return PureAtom{T{b.expr.substitute(s)}, a.negated};
          }
        },
        a.body);
    if (r) out.add(std::move(*r));
  }
  return out;
}

PredInst substitute(const PredInst& a, const Subst& s) {
  PredInst out{a.name, apply(s, a.root), {}};
  out.args.reserve(a.args.size());
  for (const auto& x : a.args) out.args.push_back(apply(s, x));
  return out;
}

SymbolicHeap substitute(const SymbolicHeap& h, const Subst& s) {
  if (s.empty()) return h;
  IdentSet touched;
  for (const auto& [from, to] : s) {
    touched.insert(from);
    touched.insert(to);
  }
  Subst effective = s;
  SymbolicHeap out;
  for (const auto& e : h.existentials) {
    if (touched.count(e)) {
      Ident renamed = Ident::fresh(e.name());
      effective[e] = renamed;
      out.existentials.push_back(renamed);
    } else {
      out.existentials.push_back(e);
    }
  }
  for (const auto& a : h.spatial) out.spatial.push_back(substitute(a, effective));
  out.pure = substitute(h.pure, effective);
  return out;
}

Formula substitute(const Formula& f, const Subst& s) {
  std::vector<SymbolicHeap> ds;
  ds.reserve(f.disjuncts.size());
  for (const auto& d : f.disjuncts) ds.push_back(substitute(d, s));
  return Formula(std::move(ds));
}

SymbolicHeap fresh_rename(const SymbolicHeap& h) {
  if (h.existentials.empty()) return h;
  Subst s;
  SymbolicHeap out;
  for (const auto& e : h.existentials) {
    Ident renamed = Ident::fresh(e.name());
    s.emplace(e, renamed);
    out.existentials.push_back(renamed);
  }
  for (const auto& a : h.spatial) out.spatial.push_back(substitute(a, s));
  out.pure = substitute(h.pure, s);
  return out;
}

Formula fresh_rename(const Formula& f) {
  std::vector<SymbolicHeap> ds;
  for (const auto& d : f.disjuncts) ds.push_back(fresh_rename(d));
  return Formula(std::move(ds));
}

SymbolicHeap star(const SymbolicHeap& a, const SymbolicHeap& b) {
  SymbolicHeap rb = fresh_rename(b);
  SymbolicHeap out = a;
  out.existentials.insert(out.existentials.end(), rb.existentials.begin(), rb.existentials.end());
  out.spatial.insert(out.spatial.end(), rb.spatial.begin(), rb.spatial.end());
  out.pure.append(rb.pure);
  return out;
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

namespace {

std::vector<std::string> sorted_pure(const PureFormula& f) {
  std::vector<std::string> out;
  for (const auto& a : f.atoms) out.push_back(to_string(a));
  std::sort(out.begin(), out.end());
  return out;
}

bool same_under(const SymbolicHeap& a, const SymbolicHeap& b, const Subst& sa, const Subst& sb) {
  SymbolicHeap ca = substitute(SymbolicHeap{{}, a.spatial, a.pure}, sa);
  SymbolicHeap cb = substitute(SymbolicHeap{{}, b.spatial, b.pure}, sb);
  return ca.spatial == cb.spatial && sorted_pure(ca.pure) == sorted_pure(cb.pure);
}

// Existentials in order of first spatial occurrence, then the rest.
std::vector<Ident> occurrence_order(const SymbolicHeap& h, std::vector<Ident>& pure_only) {
  IdentSet ex(h.existentials.begin(), h.existentials.end());
  std::vector<Ident> order;
  IdentSet seen;
  auto visit = [&](const Ident& v) {
    if (ex.count(v) && seen.insert(v).second) order.push_back(v);
  };
  for (const auto& at : h.spatial) {
    visit(at.root);
    for (const auto& x : at.args) visit(x);
  }
  for (const auto& e : h.existentials)
    if (!seen.count(e)) pure_only.push_back(e);
  return order;
}

}  // namespace

bool alpha_equivalent(const SymbolicHeap& a, const SymbolicHeap& b) {
  if (a.existentials.size() != b.existentials.size()) return false;
  if (a.spatial.size() != b.spatial.size() || a.pure.atoms.size() != b.pure.atoms.size()) return false;
  std::vector<Ident> rest_a, rest_b;
  std::vector<Ident> oa = occurrence_order(a, rest_a);
  std::vector<Ident> ob = occurrence_order(b, rest_b);
  if (oa.size() != ob.size() || rest_a.size() != rest_b.size()) return false;

  Subst sa, sb;
  std::size_t n = 0;
  for (std::size_t i = 0; i < oa.size(); ++i, ++n) {
    Ident canon("alpha", 1'000'000'000'000ULL + n);
    sa[oa[i]] = canon;
    sb[ob[i]] = canon;
  }
  for (std::size_t i = 0; i < rest_a.size(); ++i) sa[rest_a[i]] = Ident("alpha", 1'000'000'000'000ULL + n + i);

  // Pure-only existentials: try every pairing (these sets are tiny).
  std::sort(rest_b.begin(), rest_b.end());
  if (rest_b.size() > 7) {
    for (std::size_t i = 0; i < rest_b.size(); ++i) sb[rest_b[i]] = Ident("alpha", 1'000'000'000'000ULL + n + i);
    return same_under(a, b, sa, sb);
  }
  do {
    for (std::size_t i = 0; i < rest_b.size(); ++i) sb[rest_b[i]] = Ident("alpha", 1'000'000'000'000ULL + n + i);
    if (same_under(a, b, sa, sb)) return true;
  } while (std::next_permutation(rest_b.begin(), rest_b.end()));
  return false;
}

bool alpha_equivalent(const Formula& a, const Formula& b) {
  if (a.disjuncts.size() != b.disjuncts.size()) return false;
  for (std::size_t i = 0; i < a.disjuncts.size(); ++i)
    if (!alpha_equivalent(a.disjuncts[i], b.disjuncts[i])) return false;
  return true;
}

}  // namespace mixcheck
