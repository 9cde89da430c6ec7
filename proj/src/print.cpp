#include <sstream>

#include "mixcheck/core.hpp"

namespace mixcheck {

namespace {

void append_term(std::string& out, const std::string& var, std::int64_t k, bool first) {
  std::int64_t mag = k < 0 ? -k : k;
  if (first) {
    if (k < 0) out += "-";
  } else {
    out += k < 0 ? " - " : " + ";
  }
  if (mag != 1) out += std::to_string(mag) + "*";
  out += var;
}

// Sum of positive terms plus a non-negative constant; "0" when empty.
std::string side(const std::vector<std::pair<Ident, std::int64_t>>& terms, std::int64_t c) {
  std::string out;
  bool first = true;
  for (const auto& [v, k] : terms) {
    append_term(out, v.str(), k, first);
    first = false;
  }
  if (c != 0 || first) {
    if (!first) out += " + ";
    out += std::to_string(c);
  }
  return out;
}

std::string join(const std::vector<Ident>& xs, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i].str();
  }
  return out;
}

std::string sort_name(const Sort& s) {
  switch (s.tag) {
    case Sort::Tag::Int:
      return "int";
    case Sort::Tag::Bool:
      return "bool";
    case Sort::Tag::Bag:
      return "bag";
    case Sort::Tag::Shape:
      return "shape";
    case Sort::Tag::Ptr:
      return s.type_name;
  }
  return "?";
}

std::string arith_atom(const LinearExpr& e, const char* op) {
  std::vector<std::pair<Ident, std::int64_t>> pos, neg;
  for (const auto& [v, k] : e.coeffs) (k > 0 ? pos : neg).emplace_back(v, k > 0 ? k : -k);
  std::int64_t lc = e.constant > 0 ? e.constant : 0;
  std::int64_t rc = e.constant < 0 ? -e.constant : 0;
  std::string op_s(op);
  // `x = y` and `x != y` would re-parse as variable equalities.
  if ((op_s == "=" || op_s == "!=") && pos.size() == 1 && neg.size() == 1 && pos[0].second == 1 &&
      neg[0].second == 1 && e.constant == 0) {
    return to_string(e) + " " + op_s + " 0";
  }
  return side(pos, lc) + " " + op_s + " " + side(neg, rc);
}

}  // namespace

std::string to_string(const LinearExpr& e) {
  std::string out;
  bool first = true;
  for (const auto& [v, k] : e.coeffs) {
    append_term(out, v.str(), k, first);
    first = false;
  }
  if (first) return std::to_string(e.constant);
  if (e.constant > 0) out += " + " + std::to_string(e.constant);
  if (e.constant < 0) out += " - " + std::to_string(-e.constant);
  return out;
}

std::string to_string(const PureAtom& a) {
  return std::visit(
      [&](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, VarEq>) {
          return b.lhs.str() + (a.negated ? " != " : " = ") + b.rhs.str();
        } else if constexpr (std::is_same_v<T, NullEq>) {
          return b.var.str() + (a.negated ? " != null" : " = null");
        } else if constexpr (std::is_same_v<T, Leq0>) {
          if (a == PureAtom::falsum()) return "false";
          return arith_atom(b.expr, a.negated ? ">" : "<=");
        } else {
          return arith_atom(b.expr, a.negated ? "!=" : "=");
        }
      },
      a.body);
}

std::string to_string(const PureFormula& f) {
  if (f.atoms.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < f.atoms.size(); ++i) {
    if (i) out += " & ";
    out += to_string(f.atoms[i]);
  }
  return out;
}

std::string to_string(const PredInst& a) {
  return a.root.str() + "::" + a.name.str() + "<" + join(a.args) + ">";
}

std::string to_string(const SymbolicHeap& h) {
  std::string out;
  if (!h.existentials.empty()) out += "exists " + join(h.existentials) + ": ";
  if (h.spatial.empty()) {
    out += "emp";
  } else {
    for (std::size_t i = 0; i < h.spatial.size(); ++i) {
      if (i) out += " * ";
      out += to_string(h.spatial[i]);
    }
  }
  for (const auto& a : h.pure.atoms) out += " & " + to_string(a);
  return out;
}

std::string to_string(const Formula& f) {
  std::string out;
  for (std::size_t i = 0; i < f.disjuncts.size(); ++i) {
    if (i) out += " \\/ ";
    out += to_string(f.disjuncts[i]);
  }
  return out;
}

std::string to_string(const PredDef& d) {
  std::vector<Ident> params(d.params.begin() + (d.params.empty() ? 0 : 1), d.params.end());
  if (d.is_data()) {
    std::string out = "data " + d.name.str() + " {";
    for (const auto& f : d.fields()) out += " " + sort_name(f.sort) + " " + f.name.str() + ";";
    return out + " }.";
  }
  std::string out = "pred " + d.name.str() + "<" + join(params) + ">";
  if (d.is_defined()) out += " == " + to_string(d.body());
  if (d.invariant) out += " inv " + to_string(*d.invariant);
  return out + ".";
}

std::string to_string(const TraitDecl& d) {
  std::string out = d.interface_only ? "interface trait " : "trait ";
  out += d.name.str();
  if (!d.parents.empty()) out += " extends " + join(d.parents, " with ");
  return out + ".";
}

std::string to_string(const ClassDecl& d) {
  return "class " + d.name.str() + " extends " + join(d.parents, " with ") + ".";
}

std::string to_string(const Decl& d) {
  return std::visit([](const auto& x) { return to_string(x); }, d);
}

std::string to_string(const Program& p) {
  std::string out;
  for (const auto& d : p.decls()) out += to_string(d) + "\n";
  return out;
}

std::string to_string(const TypeExpr& t) {
  std::string out = t.base.str();
  for (const auto& m : t.mixed) out += " with " + m.str();
  return out;
}

std::string to_string(Verdict v) { return v == Verdict::Valid ? "Valid" : "NotProven"; }

}  // namespace mixcheck
