#include "mixcheck/subtype.hpp"

namespace mixcheck {

namespace {

// The chain as a formula, its linking variables renamed to base, base1, ...
SymbolicHeap chain_heap(const Chain& c, const std::string& base) {
  Subst s;
  std::vector<Ident> bound;
  for (std::size_t i = 0; i < c.linking_vars.size(); ++i) {
    Ident n(i == 0 ? base : base + std::to_string(i));
    s[c.linking_vars[i]] = n;
    bound.push_back(n);
  }
  SymbolicHeap h;
  h.existentials = bound;
  for (const auto& l : c.links) h.spatial.push_back(substitute(l, s));
  return h;
}

}  // namespace

std::string SubtypeVerdict::query() const { return to_string(ante) + " |- " + to_string(conseq); }

SubtypeVerdict is_subtype(const Program& p, const PredEnv& env, const TypeExpr& sub, const TypeExpr& super,
                          const SubtypeOptions& opts) {
  const Ident self("this");
  SymbolicHeap a = chain_heap(gen_chain(p, sub, self), "v");
  SymbolicHeap c = chain_heap(gen_chain(p, super, self), "u");
  if (opts.open_tail) {
    Ident tail("tail");
    c.spatial.back().args.back() = tail;
    c.existentials.push_back(tail);
  }
  SubtypeVerdict v{sub, super, Holds::NotProven, Formula(std::move(a)), Formula(std::move(c)), {}};
  v.result = check_entail(env, v.ante, v.conseq, EntailOptions{opts.budget, opts.allow_frame});
  v.holds = v.result.valid() ? Holds::Yes : Holds::NotProven;
  return v;
}

SubtypeVerdict is_subtype(const Program& p, const TypeExpr& sub, const TypeExpr& super, const SubtypeOptions& opts) {
  return is_subtype(p, PredEnv(p), sub, super, opts);
}

std::string ReportEntry::line() const {
  if (!verdict) return "error: " + to_string(super) + " vs " + to_string(sub) + ": " + error;
  return to_string(super) + (verdict->yes() ? " is SUPERTYPE of " : " is NOT SUPERTYPE of ") + to_string(sub);
}

std::vector<ReportEntry> supertype_report(const Program& p, const std::vector<std::pair<TypeExpr, TypeExpr>>& pairs,
                                          const SubtypeOptions& opts) {
  std::vector<ReportEntry> out;
  if (pairs.empty()) return out;
  PredEnv env(p);
  for (const auto& [super, sub] : pairs) {
    ReportEntry e{super, sub, std::nullopt, {}};
    try {
      e.verdict = is_subtype(p, env, sub, super, opts);
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string to_string(Holds h) { return h == Holds::Yes ? "Yes" : "NotProven"; }

}  // namespace mixcheck
