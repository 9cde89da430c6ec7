#include "mixcheck/model.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

namespace mixcheck {

namespace {

using Asg = std::map<Ident, std::int64_t>;

std::optional<std::int64_t> value_of(const Asg& a, const Ident& v) {
  if (v.is_null()) return 0;
  auto it = a.find(v);
  if (it == a.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> eval_expr(const LinearExpr& e, const Asg& a) {
  std::int64_t s = e.constant;
  for (const auto& [v, k] : e.coeffs) {
    auto x = value_of(a, v);
    if (!x) return std::nullopt;
    s += k * *x;
  }
  return s;
}

std::optional<bool> eval(const PureAtom& atom, const Asg& a) {
  std::optional<bool> r = std::visit(
      [&](const auto& b) -> std::optional<bool> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          auto x = value_of(a, b.lhs), y = value_of(a, b.rhs);
          if (!x || !y) return std::nullopt;
          return *x == *y;
        } else if constexpr (std::is_same_v<T, NullEq>) {
          auto x = value_of(a, b.var);
          if (!x) return std::nullopt;
          return *x == 0;
        } else if constexpr (std::is_same_v<T, Leq0>) {
          auto x = eval_expr(b.expr, a);
          if (!x) return std::nullopt;
          return *x <= 0;
        } else {
          auto x = eval_expr(b.expr, a);
          if (!x) return std::nullopt;
          return *x == 0;
        }
      },
      atom.body);
  if (r && atom.negated) return !*r;
  return r;
}

SymbolicHeap instantiate(const PredDef& d, const PredInst& a, std::size_t i) {
  Subst s;
  s[d.params[0]] = a.root;
  for (std::size_t j = 0; j < a.args.size(); ++j) s[d.params[j + 1]] = a.args[j];
  return substitute(fresh_rename(d.body().disjuncts[i]), s);
}

std::size_t count_data(const PredEnv& env, const SymbolicHeap& h) {
  return static_cast<std::size_t>(
      std::count_if(h.spatial.begin(), h.spatial.end(), [&](const PredInst& a) { return env.get(a.name.name()).is_data(); }));
}

// Unfolds defined atoms until only data and abstract atoms remain. Paths
// with more than `max_cells` data atoms are dropped; paths that run out of
// unfoldings set `cut`.
void expand(const PredEnv& env, const SymbolicHeap& h, std::size_t max_cells, int unfolds_left,
            std::vector<SymbolicHeap>& out, bool& cut) {
  if (count_data(env, h) > max_cells) return;
  auto it = std::find_if(h.spatial.begin(), h.spatial.end(),
                         [&](const PredInst& a) { return env.get(a.name.name()).is_defined(); });
  if (it == h.spatial.end()) {
    out.push_back(h);
    return;
  }
  if (unfolds_left == 0) {
    cut = true;
    return;
  }
  const PredDef& d = env.get(it->name.name());
  const auto pos = it - h.spatial.begin();
  for (std::size_t i = 0; i < d.body().disjuncts.size(); ++i) {
    SymbolicHeap body = instantiate(d, *it, i);
    SymbolicHeap next = h;
    next.spatial.erase(next.spatial.begin() + pos);
    next.spatial.insert(next.spatial.begin() + pos, body.spatial.begin(), body.spatial.end());
    next.existentials.insert(next.existentials.end(), body.existentials.begin(), body.existentials.end());
    next.pure.append(body.pure);
    expand(env, next, max_cells, unfolds_left - 1, out, cut);
  }
}

// A check that becomes decidable once every variable up to some position in
// the assignment order has a value.
struct Constraint {
  std::function<bool(const Asg&)> holds;
};

IdentSet vars_of(const PureAtom& a) {
  IdentSet s;
  a.collect_vars(s);
  return s;
}

class Enumerator {
 public:
  Enumerator(const PredEnv& env, const SymbolicHeap& flat, const IdentSet& fv, const Bounds& b)
      : env_(env), flat_(flat), fv_(fv), bounds_(b) {
    kinds_ = infer_kinds(env.signatures(), Formula(flat));
    IdentSet all = free_vars(flat);
    all.insert(flat.existentials.begin(), flat.existentials.end());
    for (const auto& v : fv)
      if (!v.is_null()) order_.push_back(v);
    for (const auto& v : all)
      if (!fv.count(v) && !v.is_null()) order_.push_back(v);
    for (std::size_t i = 0; i < order_.size(); ++i) pos_[order_[i]] = i;
    checks_.resize(order_.size() + 1);

    std::vector<Ident> roots;
    for (const auto& a : flat.spatial) {
      if (!env.get(a.name.name()).is_data()) continue;
      Ident r = a.root;
      at({r}, [r](const Asg& s) { return *value_of(s, r) != 0; });
      for (const auto& o : roots) at({r, o}, [r, o](const Asg& s) { return *value_of(s, r) != *value_of(s, o); });
      roots.push_back(r);
    }
    for (const auto& p : flat.pure.atoms) at(vars_of(p), [p](const Asg& s) { return *eval(p, s); });
  }

  void run(std::set<std::string>& seen, Enumeration& out) { step(0, 0, seen, out); }

 private:
  void at(const IdentSet& vars, std::function<bool(const Asg&)> f) {
    std::size_t level = 0;
    for (const auto& v : vars)
      if (!v.is_null()) level = std::max(level, pos_.at(v) + 1);
    checks_[level].push_back({std::move(f)});
  }

  bool is_int(const Ident& v) const {
    auto it = kinds_.find(v);
    return it != kinds_.end() && (it->second == VarKind::Integer || it->second == VarKind::Bag);
  }

  void step(std::size_t i, std::int64_t used, std::set<std::string>& seen, Enumeration& out) {
    if (out.exhausted) return;
    for (const auto& c : checks_[i])
      if (!c.holds(asg_)) return;
    if (i == order_.size()) {
      emit(seen, out);
      return;
    }
    const Ident& v = order_[i];
    if (is_int(v)) {
      for (std::int64_t x = bounds_.int_min; x <= bounds_.int_max; ++x) {
        asg_[v] = x;
        step(i + 1, used, seen, out);
      }
    } else {
      for (std::int64_t x = 0; x <= used + 1; ++x) {
        asg_[v] = x;
        step(i + 1, std::max(used, x), seen, out);
      }
    }
    asg_.erase(v);
  }

  void emit(std::set<std::string>& seen, Enumeration& out) {
    Model m;
    for (const auto& v : fv_)
      if (!v.is_null()) m.store[v] = asg_.at(v);
    for (const auto& a : flat_.spatial) {
      const PredDef& d = env_.get(a.name.name());
      std::vector<std::int64_t> vals;
      for (const auto& x : a.args) vals.push_back(*value_of(asg_, x));
      if (d.is_data()) {
        m.heap[*value_of(asg_, a.root)] = Cell{a.name.name(), vals};
      } else {
        vals.insert(vals.begin(), *value_of(asg_, a.root));
        m.resources.insert(Resource{a.name.name(), vals});
      }
    }
    if (seen.insert(to_string(m)).second) {
      out.models.push_back(std::move(m));
      if (out.models.size() >= bounds_.max_models) out.exhausted = true;
    }
  }

  const PredEnv& env_;
  const SymbolicHeap& flat_;
  const IdentSet& fv_;
  const Bounds& bounds_;
  std::map<Ident, VarKind> kinds_;
  std::vector<Ident> order_;
  std::map<Ident, std::size_t> pos_;
  std::vector<std::vector<Constraint>> checks_;
  Asg asg_;
};

// Exact matching of a flat heap against a model.
class Matcher {
 public:
  Matcher(const PredEnv& env, const Model& m, const SymbolicHeap& flat, std::int64_t wmin, std::int64_t wmax)
      : env_(env), m_(m), flat_(flat), wmin_(wmin), wmax_(wmax) {
    for (const auto& [addr, cell] : m.heap) cells_.emplace_back(addr, &cell);
    resources_.assign(m.resources.begin(), m.resources.end());
    cell_used_.assign(cells_.size(), false);
    res_used_.assign(resources_.size(), false);
    max_addr_ = m.heap.empty() ? 0 : m.heap.rbegin()->first;
    for (const auto& [v, x] : m.store) max_addr_ = std::max(max_addr_, x);
    for (const auto& r : resources_)
      for (auto x : r.values) max_addr_ = std::max(max_addr_, x);
    kinds_ = infer_kinds(env.signatures(), Formula(flat));
  }

  bool run(Asg asg) { return match(0, std::move(asg)); }

 private:
  static bool unify(Asg& a, const Ident& v, std::int64_t x) {
    if (v.is_null()) return x == 0;
    auto [it, inserted] = a.emplace(v, x);
    return inserted || it->second == x;
  }

  bool match(std::size_t i, Asg asg) {
    if (i == flat_.spatial.size()) return solve_pure(std::move(asg));
    const PredInst& a = flat_.spatial[i];
    if (env_.get(a.name.name()).is_data()) {
      auto root = value_of(asg, a.root);
      for (std::size_t c = 0; c < cells_.size(); ++c) {
        if (cell_used_[c] || cells_[c].second->type != a.name.name()) continue;
        if (root && *root != cells_[c].first) continue;
        Asg next = asg;
        if (!unify(next, a.root, cells_[c].first)) continue;
        bool ok = true;
        for (std::size_t j = 0; j < a.args.size() && ok; ++j) ok = unify(next, a.args[j], cells_[c].second->fields[j]);
        if (!ok) continue;
        cell_used_[c] = true;
        bool r = match(i + 1, std::move(next));
        cell_used_[c] = false;
        if (r) return true;
      }
      return false;
    }
    for (std::size_t k = 0; k < resources_.size(); ++k) {
      const Resource& r = resources_[k];
      if (res_used_[k] || r.name != a.name.name() || r.values.size() != a.args.size() + 1) continue;
      Asg next = asg;
      bool ok = unify(next, a.root, r.values[0]);
      for (std::size_t j = 0; j < a.args.size() && ok; ++j) ok = unify(next, a.args[j], r.values[j + 1]);
      if (!ok) continue;
      res_used_[k] = true;
      bool res = match(i + 1, std::move(next));
      res_used_[k] = false;
      if (res) return true;
    }
    return false;
  }

  bool solve_pure(Asg asg) {
    // Propagate what the equalities determine.
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& p : flat_.pure.atoms) {
        if (p.negated) continue;
        if (const auto* e = std::get_if<VarEq>(&p.body)) {
          auto x = value_of(asg, e->lhs), y = value_of(asg, e->rhs);
          if (x && !y) changed = unify(asg, e->rhs, *x);
          else if (y && !x) changed = unify(asg, e->lhs, *y);
        } else if (const auto* n = std::get_if<NullEq>(&p.body)) {
          if (!value_of(asg, n->var)) changed = unify(asg, n->var, 0);
        } else if (const auto* q = std::get_if<Eq0>(&p.body)) {
          std::optional<Ident> open;
          std::int64_t rest = q->expr.constant;
          bool single = true;
          for (const auto& [v, k] : q->expr.coeffs) {
            if (auto x = value_of(asg, v)) rest += k * *x;
            else if (open) single = false;
            else open = v;
          }
          if (open && single) {
            std::int64_t k = q->expr.coeff(*open);
            if (rest % k != 0) return false;
            changed = unify(asg, *open, -rest / k);
          }
        }
      }
    }
    std::vector<Ident> open;
    IdentSet vs = free_vars(flat_.pure);
    for (const auto& v : vs)
      if (!v.is_null() && !asg.count(v)) open.push_back(v);
    return brute(open, 0, asg);
  }

  std::vector<std::int64_t> domain(const Ident& v) const {
    std::vector<std::int64_t> d;
    auto it = kinds_.find(v);
    VarKind k = it == kinds_.end() ? VarKind::Unknown : it->second;
    if (k != VarKind::Pointer)
      for (std::int64_t x = wmin_; x <= wmax_; ++x) d.push_back(x);
    if (k != VarKind::Integer && k != VarKind::Bag)
      for (std::int64_t x = 0; x <= max_addr_ + 2; ++x) d.push_back(x);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    return d;
  }

  bool brute(const std::vector<Ident>& open, std::size_t i, Asg& asg) {
    for (const auto& p : flat_.pure.atoms) {
      auto r = eval(p, asg);
      if (r && !*r) return false;
    }
    if (i == open.size()) return true;
    for (std::int64_t x : domain(open[i])) {
      asg[open[i]] = x;
      if (brute(open, i + 1, asg)) return true;
    }
    asg.erase(open[i]);
    return false;
  }

  const PredEnv& env_;
  const Model& m_;
  const SymbolicHeap& flat_;
  std::int64_t wmin_, wmax_;
  std::vector<std::pair<std::int64_t, const Cell*>> cells_;
  std::vector<Resource> resources_;
  std::vector<bool> cell_used_, res_used_;
  std::int64_t max_addr_ = 0;
  std::map<Ident, VarKind> kinds_;
};

}  // namespace

std::string to_string(const Model& m) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [v, x] : m.store) {
    os << (first ? "" : ", ") << v.str() << "=" << x;
    first = false;
  }
  os << "} [";
  first = true;
  for (const auto& [addr, c] : m.heap) {
    os << (first ? "" : ", ") << addr << ":" << c.type << "(";
    for (std::size_t i = 0; i < c.fields.size(); ++i) os << (i ? "," : "") << c.fields[i];
    os << ")";
    first = false;
  }
  for (const auto& r : m.resources) {
    os << (first ? "" : ", ") << r.name << "(";
    for (std::size_t i = 0; i < r.values.size(); ++i) os << (i ? "," : "") << r.values[i];
    os << ")";
    first = false;
  }
  os << "]";
  return os.str();
}

Enumeration model_enumerate(const PredEnv& env, const SymbolicHeap& h, const Bounds& bounds) {
  Enumeration out;
  const IdentSet fv = free_vars(h);
  std::vector<SymbolicHeap> flats;
  bool cut = false;
  expand(env, fresh_rename(h), static_cast<std::size_t>(bounds.heap_size), bounds.max_unfold, flats, cut);
  out.exhausted = cut;
  std::set<std::string> seen;
  for (const auto& flat : flats) {
    Enumerator e(env, flat, fv, bounds);
    e.run(seen, out);
    if (out.models.size() >= bounds.max_models) {
      out.exhausted = true;
      break;
    }
  }
  return out;
}

Enumeration model_enumerate(const Program& p, const SymbolicHeap& h, const Bounds& bounds) {
  return model_enumerate(PredEnv(p), h, bounds);
}

bool satisfies(const PredEnv& env, const Model& m, const Formula& f, const Bounds& bounds, std::int64_t witness_min,
               std::int64_t witness_max) {
  for (const auto& d : f.disjuncts) {
    std::vector<SymbolicHeap> flats;
    bool cut = false;
    expand(env, fresh_rename(d), m.heap.size(), bounds.max_unfold, flats, cut);
    for (const auto& flat : flats) {
      if (count_data(env, flat) != m.heap.size() || flat.spatial.size() != m.heap.size() + m.resources.size()) continue;
      Asg start;
      for (const auto& v : free_vars(flat))
        if (auto it = m.store.find(v); it != m.store.end()) start[v] = it->second;
      Matcher matcher(env, m, flat, witness_min, witness_max);
      if (matcher.run(start)) return true;
    }
  }
  return false;
}

}  // namespace mixcheck
