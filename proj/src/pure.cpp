#include "mixcheck/pure.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace mixcheck {

namespace {

constexpr std::int64_t kMagnitudeLimit = std::int64_t{1} << 40;
constexpr std::size_t kMaxConstraints = 4000;
constexpr std::size_t kMaxSplits = 20;

struct Overflow {};

std::int64_t checked(__int128 v) {
  if (v > kMagnitudeLimit || v < -kMagnitudeLimit) throw Overflow{};
  return static_cast<std::int64_t>(v);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {  // b > 0
  std::int64_t q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {  // b > 0
  std::int64_t q = a / b;
  if ((a % b != 0) && (a > 0)) ++q;
  return q;
}

std::int64_t coeff_gcd(const LinearExpr& e) {
  std::int64_t g = 0;
  for (const auto& [v, k] : e.coeffs) g = std::gcd(g, k < 0 ? -k : k);
  return g;
}

enum class Norm { Keep, Drop, Contradiction };

// e <= 0 over the integers: divide by the coefficient gcd, rounding the
// constant up.
Norm tighten(LinearExpr& e) {
  if (e.coeffs.empty()) return e.constant > 0 ? Norm::Contradiction : Norm::Drop;
  std::int64_t g = coeff_gcd(e);
  if (g > 1) {
    for (auto& [v, k] : e.coeffs) k /= g;
    e.constant = ceil_div(e.constant, g);
  }
  return Norm::Keep;
}

// e = 0 over the integers: the gcd of the coefficients must divide the
// constant.
Norm normalize_eq(LinearExpr& e) {
  if (e.coeffs.empty()) return e.constant != 0 ? Norm::Contradiction : Norm::Drop;
  std::int64_t g = coeff_gcd(e);
  if (e.constant % g != 0) return Norm::Contradiction;
  if (g > 1) {
    for (auto& [v, k] : e.coeffs) k /= g;
    e.constant /= g;
  }
  // Canonical sign: first coefficient positive.
  if (e.coeffs.begin()->second < 0) e = -e;
  return Norm::Keep;
}

void replace_var(LinearExpr& e, const Ident& v, const LinearExpr& value) {
  std::int64_t c = e.coeff(v);
  if (c == 0) return;
  e.coeffs.erase(v);
  e.constant = checked(static_cast<__int128>(e.constant) + static_cast<__int128>(c) * value.constant);
  for (const auto& [w, k] : value.coeffs) {
    std::int64_t cur = e.coeff(w);
    checked(static_cast<__int128>(cur) + static_cast<__int128>(c) * k);
    e.add_term(w, c * k);
  }
}

LinearExpr combine(const LinearExpr& pos, std::int64_t a, const LinearExpr& neg, std::int64_t b, const Ident& x) {
  // b * pos + a * neg, where pos has +a*x and neg has -b*x.
  LinearExpr out;
  out.constant = checked(static_cast<__int128>(b) * pos.constant + static_cast<__int128>(a) * neg.constant);
  std::map<Ident, __int128> acc;
  for (const auto& [v, k] : pos.coeffs)
    if (v != x) acc[v] += static_cast<__int128>(b) * k;
  for (const auto& [v, k] : neg.coeffs)
    if (v != x) acc[v] += static_cast<__int128>(a) * k;
  for (const auto& [v, k] : acc)
    if (k != 0) out.coeffs.emplace(v, checked(k));
  return out;
}

struct Stage {
  Ident var;
  std::vector<LinearExpr> constraints;
};

SatResult solve_linear_impl(std::vector<LinearExpr> eqs, std::vector<LinearExpr> ineqs, IntModel* model) {
  const std::vector<LinearExpr> orig_eqs = eqs, orig_ineqs = ineqs;

  // Unit-coefficient equalities are solved and substituted away.
  std::vector<std::pair<Ident, LinearExpr>> solved;
  for (;;) {
    std::vector<LinearExpr> kept;
    for (auto& e : eqs) {
      Norm n = normalize_eq(e);
      if (n == Norm::Contradiction) return SatResult::Unsat;
      if (n == Norm::Keep) kept.push_back(std::move(e));
    }
    eqs = std::move(kept);
    std::size_t pick = eqs.size();
    Ident var;
    for (std::size_t i = 0; i < eqs.size() && pick == eqs.size(); ++i) {
      for (const auto& [v, k] : eqs[i].coeffs) {
        if (k == 1 || k == -1) {
          pick = i;
          var = v;
          break;
        }
      }
    }
    if (pick == eqs.size()) break;
    LinearExpr e = eqs[pick];
    std::int64_t k = e.coeff(var);
    e.coeffs.erase(var);
    LinearExpr value = k == 1 ? -e : e;  // var = -(rest)/k
    eqs.erase(eqs.begin() + static_cast<std::ptrdiff_t>(pick));
    for (auto& other : eqs) replace_var(other, var, value);
    for (auto& other : ineqs) replace_var(other, var, value);
    for (auto& [w, val] : solved) replace_var(val, var, value);
    solved.emplace_back(var, value);
  }
  for (const auto& e : eqs) {
    ineqs.push_back(e);
    ineqs.push_back(-e);
  }

  std::set<LinearExpr> current;
  for (auto& e : ineqs) {
    Norm n = tighten(e);
    if (n == Norm::Contradiction) return SatResult::Unsat;
    if (n == Norm::Keep) current.insert(std::move(e));
  }

  std::vector<Stage> stages;
  while (!current.empty()) {
    std::map<Ident, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& c : current)
      for (const auto& [v, k] : c.coeffs) (k > 0 ? counts[v].first : counts[v].second)++;
    Ident best;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (const auto& [v, pn] : counts) {
      std::size_t cost = pn.first * pn.second;
      if (cost < best_cost) {
        best_cost = cost;
        best = v;
      }
    }
    Stage st{best, {}};
    std::vector<const LinearExpr*> pos, neg;
    std::set<LinearExpr> next;
    for (const auto& c : current) {
      std::int64_t k = c.coeff(best);
      if (k == 0) {
        next.insert(c);
      } else {
        st.constraints.push_back(c);
      }
    }
    for (const auto& c : st.constraints) (c.coeff(best) > 0 ? pos : neg).push_back(&c);
    for (const auto* p : pos) {
      for (const auto* n : neg) {
        LinearExpr r = combine(*p, p->coeff(best), *n, -n->coeff(best), best);
        Norm nr = tighten(r);
        if (nr == Norm::Contradiction) return SatResult::Unsat;
        if (nr == Norm::Keep) next.insert(std::move(r));
      }
    }
    if (next.size() > kMaxConstraints) return SatResult::Unknown;
    stages.push_back(std::move(st));
    current = std::move(next);
  }

  // Rationally feasible. Try to build an integer model by back-substitution.
  IntModel m;
  auto value_of = [&m](const Ident& v) -> std::int64_t { return m.emplace(v, 0).first->second; };
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();
    for (const auto& c : it->constraints) {
      std::int64_t a = c.coeff(it->var);
      LinearExpr rest = c;
      rest.coeffs.erase(it->var);
      std::int64_t r = rest.evaluate(value_of);
      if (a > 0) {
        hi = std::min(hi, floor_div(-r, a));
      } else {
        lo = std::max(lo, ceil_div(r, -a));
      }
    }
    if (lo > hi) return SatResult::Unknown;
    std::int64_t pickv = 0;
    if (lo > 0) pickv = lo;
    if (hi < 0) pickv = hi;
    m[it->var] = pickv;
  }
  for (auto it = solved.rbegin(); it != solved.rend(); ++it) {
    std::int64_t v = it->second.evaluate(value_of);
    m[it->first] = v;
  }
  for (const auto& e : orig_eqs)
    if (e.evaluate(value_of) != 0) return SatResult::Unknown;
  for (const auto& e : orig_ineqs)
    if (e.evaluate(value_of) > 0) return SatResult::Unknown;
  if (model) *model = std::move(m);
  return SatResult::Sat;
}

bool satisfies_all(const IntModel& m, const std::vector<LinearExpr>& diseqs) {
  auto value_of = [&m](const Ident& v) -> std::int64_t {
    auto it = m.find(v);
    return it == m.end() ? 0 : it->second;
  };
  for (const auto& d : diseqs)
    if (d.evaluate(value_of) == 0) return false;
  return true;
}

SatResult split(const std::vector<LinearExpr>& eqs, std::vector<LinearExpr>& ineqs, const std::vector<LinearExpr>& diseqs,
                std::size_t idx, IntModel* model) {
  IntModel m;
  SatResult base = solve_linear(eqs, ineqs, &m);
  if (base == SatResult::Unsat) return base;
  std::vector<LinearExpr> remaining(diseqs.begin() + static_cast<std::ptrdiff_t>(idx), diseqs.end());
  if (base == SatResult::Sat && satisfies_all(m, remaining)) {
    if (model) *model = std::move(m);
    return SatResult::Sat;
  }
  if (idx == diseqs.size()) return base;
  if (diseqs.size() - idx > kMaxSplits) return SatResult::Unknown;

  // d != 0  <=>  d <= -1  or  d >= 1
  const LinearExpr& d = diseqs[idx];
  bool unknown = false;
  for (int side = 0; side < 2; ++side) {
    LinearExpr branch = side == 0 ? d + LinearExpr::of_const(1) : -d + LinearExpr::of_const(1);
    ineqs.push_back(branch);
    SatResult r = split(eqs, ineqs, diseqs, idx + 1, model);
    ineqs.pop_back();
    if (r == SatResult::Sat) return r;
    if (r == SatResult::Unknown) unknown = true;
  }
  return unknown ? SatResult::Unknown : SatResult::Unsat;
}

}  // namespace

std::string to_string(SatResult r) {
  switch (r) {
    case SatResult::Sat:
      return "Sat";
    case SatResult::Unsat:
      return "Unsat";
    case SatResult::Unknown:
      break;
  }
  return "Unknown";
}

SatResult solve_linear(std::vector<LinearExpr> eqs, std::vector<LinearExpr> ineqs, IntModel* model) {
  try {
    return solve_linear_impl(std::move(eqs), std::move(ineqs), model);
  } catch (const Overflow&) {
    return SatResult::Unknown;
  }
}

// ---------------------------------------------------------------------------
// PureContext

Ident PureContext::find(const Ident& v) const {
  auto it = parent_.find(v);
  if (it == parent_.end()) {
    parent_.emplace(v, v);
    return v;
  }
  if (it->second == v) return v;
  Ident root = find(it->second);
  parent_[v] = root;
  return root;
}

void PureContext::unite(const Ident& a, const Ident& b) {
  Ident ra = find(a), rb = find(b);
  if (ra == rb) return;
  if (rb < ra) std::swap(ra, rb);
  parent_[rb] = ra;
}

Ident PureContext::representative(const Ident& v) const {
  auto it = rep_.find(v);
  return it == rep_.end() ? v : it->second;
}

bool PureContext::is_integer_class(const Ident& v) const {
  Ident r = representative(v);
  for (const auto& [m, rr] : class_members_)
    if (rr == r && int_vars_.count(m)) return true;
  return int_vars_.count(v) != 0;
}

PureContext::PureContext(const PureFormula& f) {
  const Ident null = Ident::null();
  find(null);
  for (const auto& a : f.atoms) {
    IdentSet vs;
    a.collect_vars(vs);
    for (const auto& v : vs) find(v);
    if (const auto* ve = std::get_if<VarEq>(&a.body); ve && !a.negated) unite(ve->lhs, ve->rhs);
    if (const auto* ne = std::get_if<NullEq>(&a.body); ne && !a.negated) unite(ne->var, null);
    if (const auto* l = std::get_if<Leq0>(&a.body))
      for (const auto& [v, k] : l->expr.coeffs) int_vars_.insert(v);
    if (const auto* e = std::get_if<Eq0>(&a.body))
      for (const auto& [v, k] : e->expr.coeffs) int_vars_.insert(v);
  }

  // Representatives: null for the null class, otherwise the smallest member.
  std::map<Ident, std::vector<Ident>> classes;
  std::vector<Ident> all;
  for (const auto& [v, p] : parent_) all.push_back(v);
  for (const auto& v : all) classes[find(v)].push_back(v);
  IdentSet int_classes;
  for (const auto& [root, members] : classes) {
    bool has_null = std::find(members.begin(), members.end(), null) != members.end();
    bool has_int = std::any_of(members.begin(), members.end(), [&](const Ident& m) { return int_vars_.count(m) != 0; });
    if (has_null && has_int) ill_typed_ = true;
    Ident rep = has_null ? null : *std::min_element(members.begin(), members.end());
    for (const auto& m : members) {
      rep_[m] = rep;
      class_members_.emplace_back(m, rep);
    }
    if (has_int) int_classes.insert(rep);
  }

  Subst to_rep;
  for (const auto& [m, r] : rep_)
    if (!r.is_null() && !(m == r)) to_rep.emplace(m, r);
  auto arith = [&](const LinearExpr& e) {
    LinearExpr out = LinearExpr::of_const(e.constant);
    for (const auto& [v, k] : e.coeffs) {
      auto it = to_rep.find(v);
      out.add_term(it == to_rep.end() ? v : it->second, k);
    }
    return out;
  };

  for (const auto& a : f.atoms) {
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, VarEq>) {
            if (!a.negated) return;
            Ident ra = representative(b.lhs), rb = representative(b.rhs);
            if (ra == rb) {
              contradiction_ = true;
            } else if (int_classes.count(ra) || int_classes.count(rb)) {
              if (ra.is_null() || rb.is_null()) {
                ill_typed_ = true;
              } else {
                int_diseqs_.push_back(LinearExpr::of_var(ra) - LinearExpr::of_var(rb));
              }
            } else {
              ptr_diseqs_.emplace_back(ra, rb);
            }
          } else if constexpr (std::is_same_v<T, NullEq>) {
            if (!a.negated) return;
            Ident rv = representative(b.var);
            if (rv.is_null()) {
              contradiction_ = true;
            } else if (int_classes.count(rv)) {
              ill_typed_ = true;
            } else {
              ptr_diseqs_.emplace_back(rv, null);
            }
          } else if constexpr (std::is_same_v<T, Leq0>) {
            LinearExpr e = arith(b.expr);
            if (a.negated) {
              ineqs_.push_back(-e + LinearExpr::of_const(1));
            } else {
              ineqs_.push_back(std::move(e));
            }
          } else {
            LinearExpr e = arith(b.expr);
            if (a.negated) {
              int_diseqs_.push_back(std::move(e));
            } else {
              eqs_.push_back(std::move(e));
            }
          }
        },
        a.body);
  }
}

SatResult PureContext::solve(IntModel* model) const {
  if (contradiction_) return SatResult::Unsat;
  for (const auto& [a, b] : ptr_diseqs_)
    if (a == b) return SatResult::Unsat;
  std::vector<LinearExpr> ineqs = ineqs_;
  IntModel m;
  SatResult r = split(eqs_, ineqs, int_diseqs_, 0, &m);
  if (r == SatResult::Unsat) return r;
  if (ill_typed_) return SatResult::Unknown;
  if (r == SatResult::Sat && model) {
    model->clear();
    for (const auto& [member, rep] : class_members_) {
      if (!int_vars_.count(member) && !m.count(rep)) continue;
      auto it = m.find(rep);
      (*model)[member] = it == m.end() ? 0 : it->second;
    }
  }
  return r;
}

SatResult pure_sat(const PureFormula& f, IntModel* model) { return PureContext(f).solve(model); }

PureVerdict pure_entail(const PureFormula& gamma, const PureFormula& delta) {
  for (const auto& d : delta.atoms) {
    if (std::find(gamma.atoms.begin(), gamma.atoms.end(), d) != gamma.atoms.end()) continue;
    PureFormula probe = gamma;
    probe.add(d.negation());
    if (pure_sat(probe) != SatResult::Unsat) return PureVerdict::NotProven;
  }
  return PureVerdict::Proven;
}

}  // namespace mixcheck
