// Helpers shared by the unit tests and the acceptance runner: corpus access,
// random generators and the independent oracles.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixcheck/core.hpp"
#include "mixcheck/entail.hpp"
#include "mixcheck/model.hpp"
#include "mixcheck/parser.hpp"
#include "mixcheck/predgen.hpp"
#include "mixcheck/pure.hpp"

namespace testsupport {

using namespace mixcheck;

inline std::string corpus_path(const std::string& name) { return std::string(MIXCHECK_CORPUS_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ParseResult parse_corpus(const std::string& name) {
  ParseResult r = parse_program(read_file(corpus_path(name)), name);
  if (!r.ok()) throw std::runtime_error("corpus " + name + " does not parse: " + format_diagnostic(r.diagnostics[0]));
  return r;
}

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& xs) {
  return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

inline int uniform(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(std::mt19937& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// ---------------------------------------------------------------------------
// Linearization oracle: plain list concatenation, then keep the last copy of
// every name.

inline std::vector<std::string> parents_of(const Program& p, const std::string& n) {
  std::vector<Ident> ps;
  if (auto* t = p.find_trait(n)) ps = t->parents;
  if (auto* c = p.find_class(n)) ps = c->parents;
  std::vector<std::string> out;
  for (const auto& x : ps) out.push_back(x.name());
  return out;
}

inline std::vector<std::string> naive_lin_of_parents(const Program& p, const std::vector<std::string>& parents);

inline std::vector<std::string> naive_lin(const Program& p, const std::string& n) {
  std::vector<std::string> out{n};
  auto tail = naive_lin_of_parents(p, parents_of(p, n));
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

inline std::vector<std::string> naive_lin_of_parents(const Program& p, const std::vector<std::string>& parents) {
  std::vector<std::string> cat;
  for (auto it = parents.rbegin(); it != parents.rend(); ++it) {
    auto l = naive_lin(p, *it);
    cat.insert(cat.end(), l.begin(), l.end());
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < cat.size(); ++i)
    if (std::find(cat.begin() + i + 1, cat.end(), cat[i]) == cat.end()) out.push_back(cat[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Random hierarchies: traits T0..Tn-1 (parents among earlier traits, some
// interface-only) and classes C0..Cm-1 (parents among traits and earlier
// classes).

struct Hierarchy {
  std::string text;
  std::vector<std::string> traits;
  std::vector<std::string> classes;
  std::vector<std::string> names() const {
    auto out = traits;
    out.insert(out.end(), classes.begin(), classes.end());
    return out;
  }
};

inline Hierarchy random_hierarchy(std::mt19937& rng, int max_traits, int max_classes, const std::string& prefix = "") {
  Hierarchy h;
  int nt = uniform(rng, 1, max_traits);
  int nc = uniform(rng, 0, max_classes);
  for (int i = 0; i < nt; ++i) {
    std::string n = prefix + "T" + std::to_string(i);
    std::vector<std::string> ps;
    int k = i == 0 ? 0 : uniform(rng, 0, std::min(2, i));
    while (static_cast<int>(ps.size()) < k) {
      auto c = h.traits[uniform(rng, 0, i - 1)];
      if (std::find(ps.begin(), ps.end(), c) == ps.end()) ps.push_back(c);
    }
    std::string line = coin(rng, 0.25) ? "interface trait " : "trait ";
    line += n;
    for (std::size_t j = 0; j < ps.size(); ++j) line += (j ? " with " : " extends ") + ps[j];
    h.text += line + ".\n";
    h.traits.push_back(n);
  }
  for (int i = 0; i < nc; ++i) {
    std::string n = prefix + "C" + std::to_string(i);
    std::vector<std::string> pool = h.traits;
    pool.insert(pool.end(), h.classes.begin(), h.classes.end());
    std::vector<std::string> ps;
    int k = uniform(rng, 1, std::min<int>(3, pool.size()));
    while (static_cast<int>(ps.size()) < k) {
      auto c = pick(rng, pool);
      if (std::find(ps.begin(), ps.end(), c) == ps.end()) ps.push_back(c);
    }
    std::string line = "class " + n;
    for (std::size_t j = 0; j < ps.size(); ++j) line += (j ? " with " : " extends ") + ps[j];
    h.text += line + ".\n";
    h.classes.push_back(n);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Abstract chains over a fixed alphabet, written out by hand so the oracle
// does not depend on predgen.

inline const std::vector<std::string>& chain_alphabet() {
  static const std::vector<std::string> names{"A", "B", "C", "D"};
  return names;
}

inline std::string chain_decls() { return "trait A. trait B. trait C. trait D.\n"; }

/// `exists v1..: this::N0<v1> * v1::N1<v2> * ... * vk::Nk<end>`, where end is
/// null or the free variable `tail`.
inline std::string chain_text(const std::vector<int>& seq, const std::string& var, bool open_tail) {
  std::string ex, body;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::string root = i == 0 ? "this" : var + std::to_string(i);
    std::string next = i + 1 == seq.size() ? (open_tail ? "tail" : "null") : var + std::to_string(i + 1);
    if (i) {
      ex += (ex.empty() ? "" : ", ") + root;
      body += " * ";
    }
    body += root + "::" + chain_alphabet()[seq[i]] + "<" + next + ">";
  }
  return ex.empty() ? body : "exists " + ex + ": " + body;
}

/// Every sequence over `letters` symbols with length 1..max_len.
inline std::vector<std::vector<int>> all_sequences(int letters, int max_len) {
  std::vector<std::vector<int>> out;
  for (int len = 1; len <= max_len; ++len) {
    long n = 1;
    for (int i = 0; i < len; ++i) n *= letters;
    for (long c = 0; c < n; ++c) {
      std::vector<int> s;
      long x = c;
      for (int i = 0; i < len; ++i) {
        s.push_back(static_cast<int>(x % letters));
        x /= letters;
      }
      std::reverse(s.begin(), s.end());
      out.push_back(s);
    }
  }
  return out;
}

template <class T>
bool is_prefix(const std::vector<T>& pre, const std::vector<T>& whole) {
  return pre.size() <= whole.size() && std::equal(pre.begin(), pre.end(), whole.begin());
}

// ---------------------------------------------------------------------------
// Pure formulas over x, y, z for the brute-force pure oracle.

inline const std::vector<Ident>& int_vars() {
  static const std::vector<Ident> vs{Ident("x"), Ident("y"), Ident("z")};
  return vs;
}

inline PureAtom random_int_atom(std::mt19937& rng, int nvars) {
  LinearExpr e = LinearExpr::of_const(uniform(rng, -5, 5));
  for (int i = 0; i < nvars; ++i) {
    int k = uniform(rng, -3, 3);
    if (k != 0 && coin(rng, 0.6)) e.add_term(int_vars()[i], k);
  }
  bool neg = coin(rng, 0.3);
  return coin(rng) ? PureAtom::leq0(e, neg) : PureAtom::eq0(e, neg);
}

inline PureFormula random_pure(std::mt19937& rng, int nvars, int min_atoms, int max_atoms) {
  PureFormula f;
  int n = uniform(rng, min_atoms, max_atoms);
  for (int i = 0; i < n; ++i) f.add(random_int_atom(rng, nvars));
  return f;
}

/// Truth of an integer atom under `val`, computed from the coefficients.
inline bool eval_int_atom(const PureAtom& a, const std::function<std::int64_t(const Ident&)>& val) {
  bool r = false;
  if (auto* l = std::get_if<Leq0>(&a.body)) r = l->expr.evaluate(val) <= 0;
  else if (auto* q = std::get_if<Eq0>(&a.body)) r = q->expr.evaluate(val) == 0;
  else throw std::logic_error("not an integer atom");
  return a.negated ? !r : r;
}

inline bool eval_pure(const PureFormula& f, const std::function<std::int64_t(const Ident&)>& val) {
  return std::all_of(f.atoms.begin(), f.atoms.end(), [&](const PureAtom& a) { return eval_int_atom(a, val); });
}

/// Calls `fn` for every point of [lo, hi]^3 over x, y, z until it returns false.
inline void for_box(int lo, int hi, const std::function<bool(const std::function<std::int64_t(const Ident&)>&)>& fn) {
  for (int x = lo; x <= hi; ++x)
    for (int y = lo; y <= hi; ++y)
      for (int z = lo; z <= hi; ++z) {
        auto val = [&](const Ident& v) -> std::int64_t {
          if (v.name() == "x") return x;
          if (v.name() == "y") return y;
          return z;
        };
        if (!fn(val)) return;
      }
}

/// A box point where gamma holds and delta fails, if any.
inline bool box_counterexample(const PureFormula& gamma, const PureFormula& delta, int lo = -10, int hi = 10) {
  bool found = false;
  for_box(lo, hi, [&](const auto& val) {
    if (eval_pure(gamma, val) && !eval_pure(delta, val)) found = true;
    return !found;
  });
  return found;
}

inline bool box_satisfiable(const PureFormula& f, int lo = -10, int hi = 10) {
  bool found = false;
  for_box(lo, hi, [&](const auto& val) {
    found = eval_pure(f, val);
    return !found;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Random entailments over lists and an abstract trait, checked against the
// model enumerator.

inline std::string lists_decls() {
  return "data node { int val; node next; }.\n"
         "pred ll<n> == self = null & n = 0 \\/ exists q, m: self::node<_, q> * q::ll<m> & n = m + 1 inv n >= 0.\n"
         "trait T.\n";
}

struct RandomQuery {
  std::string text;  // "checkentail ... ."
  std::string ante, conseq;
};

namespace detail {

struct Atom {
  std::string kind;  // node, ll, T
  std::string root;
  std::vector<std::string> args;
  std::string str() const {
    std::string out = root + "::" + kind + "<";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i];
    return out + ">";
  }
};

inline std::string int_arg(std::mt19937& rng, const std::vector<std::string>& ivars) {
  if (coin(rng, 0.3)) return std::to_string(uniform(rng, -3, 3));
  return pick(rng, ivars);
}

inline std::string ptr_arg(std::mt19937& rng, const std::vector<std::string>& pvars) {
  return coin(rng, 0.25) ? "null" : pick(rng, pvars);
}

inline Atom random_atom(std::mt19937& rng, const std::vector<std::string>& pvars, const std::vector<std::string>& ivars) {
  Atom a;
  a.root = pick(rng, pvars);
  int k = uniform(rng, 0, 9);
  if (k < 5) {
    a.kind = "node";
    a.args = {coin(rng, 0.2) ? "_" : int_arg(rng, ivars), ptr_arg(rng, pvars)};
  } else if (k < 8) {
    a.kind = "ll";
    a.args = {pick(rng, ivars)};
  } else {
    a.kind = "T";
    a.args = {ptr_arg(rng, pvars)};
  }
  return a;
}

inline std::string random_pure_atom(std::mt19937& rng, const std::vector<std::string>& pvars,
                                    const std::vector<std::string>& ivars) {
  int k = uniform(rng, 0, 5);
  if (k == 0) return pick(rng, pvars) + (coin(rng) ? " = " : " != ") + pick(rng, pvars);
  if (k == 1) return pick(rng, pvars) + (coin(rng) ? " = null" : " != null");
  static const std::vector<std::string> ops{"=", "!=", "<=", ">=", "<", ">"};
  std::string lhs = pick(rng, ivars);
  if (coin(rng, 0.3)) lhs += " + " + pick(rng, ivars);
  std::string rhs = coin(rng) ? std::to_string(uniform(rng, -3, 3)) : pick(rng, ivars) + " + " + std::to_string(uniform(rng, -2, 2));
  return lhs + " " + pick(rng, ops) + " " + rhs;
}

inline std::string heap_text(const std::vector<Atom>& atoms, const std::vector<std::string>& pure) {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) out += (i ? " * " : "") + atoms[i].str();
  if (atoms.empty()) out = "emp";
  for (const auto& p : pure) out += " & " + p;
  return out;
}

}  // namespace detail

/// Antecedent with at most four heap atoms; the consequent is usually
/// derived from it (dropped atoms, folded lists, existential arguments) so
/// that a good share of the queries are valid.
inline RandomQuery random_query(std::mt19937& rng) {
  using detail::Atom;
  const std::vector<std::string> pvars{"x", "y", "z"};
  const std::vector<std::string> ivars{"a", "b", "n"};
  std::vector<Atom> ante;
  int na = uniform(rng, 0, 4);
  for (int i = 0; i < na; ++i) ante.push_back(detail::random_atom(rng, pvars, ivars));
  std::vector<std::string> ante_pure;
  for (int i = uniform(rng, 0, 2); i > 0; --i) ante_pure.push_back(detail::random_pure_atom(rng, pvars, ivars));

  std::vector<Atom> conseq;
  std::vector<std::string> ex;
  auto fresh = [&]() {
    std::string v = "e" + std::to_string(ex.size());
    ex.push_back(v);
    return v;
  };
  std::vector<std::string> conseq_pure;
  if (coin(rng, 0.2)) {
    for (int i = uniform(rng, 0, 3); i > 0; --i) conseq.push_back(detail::random_atom(rng, pvars, ivars));
  } else {
    for (const auto& a : ante) {
      if (coin(rng, 0.2)) continue;  // left in the frame
      Atom c = a;
      if (c.kind == "node" && coin(rng, 0.35)) {
        // fold a node into a list segment ending in its successor's list
        c.kind = "ll";
        c.args = {fresh()};
        if (a.args[1] != "null") {
          conseq.push_back(c);
          continue;
        }
      }
      for (auto& arg : c.args) {
        if (arg == "_") arg = fresh();
        else if (coin(rng, 0.3)) arg = fresh();
      }
      conseq.push_back(c);
    }
    if (coin(rng, 0.4)) std::shuffle(conseq.begin(), conseq.end(), rng);
  }
  for (int i = uniform(rng, 0, 2); i > 0; --i) {
    auto ivs = ivars;
    for (const auto& e : ex) ivs.push_back(e);
    conseq_pure.push_back(detail::random_pure_atom(rng, pvars, coin(rng, 0.5) ? ivars : ivs));
  }
  RandomQuery q;
  q.ante = detail::heap_text(ante, ante_pure);
  std::string body = detail::heap_text(conseq, conseq_pure);
  std::string quant;
  for (const auto& e : ex)
    if (body.find(e) != std::string::npos) quant += (quant.empty() ? "" : ", ") + e;
  q.conseq = quant.empty() ? body : "exists " + quant + ": " + body;
  q.text = "checkentail " + q.ante + " |- " + q.conseq + ".";
  return q;
}

struct SoundnessOutcome {
  bool valid = false;
  bool sound = true;
  std::size_t models = 0;
  std::string witness;  // the first model violating the consequent
};

/// If the query is valid, every model of the antecedent must satisfy
/// consequent * residue.
inline SoundnessOutcome check_soundness(const PredEnv& env, const CheckEntail& q, const Bounds& bounds, int budget = 4) {
  SoundnessOutcome out;
  EntailResult r = check_entail(env, q.ante, q.conseq, {budget, true});
  out.valid = r.valid();
  if (!out.valid) return out;
  std::vector<SymbolicHeap> target;
  for (const auto& c : q.conseq.disjuncts)
    for (const auto& res : r.residue->disjuncts) target.push_back(star(c, res));
  Formula goal(target);
  for (const auto& a : q.ante.disjuncts) {
    Enumeration e = model_enumerate(env, a, bounds);
    for (const auto& m : e.models) {
      ++out.models;
      if (!satisfies(env, m, goal, bounds)) {
        out.sound = false;
        out.witness = to_string(m);
        return out;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Declaration + query scripts, one statement per line, for comparing the
// REPL with batch checking.

inline std::vector<std::string> random_script(std::mt19937& rng) {
  std::vector<std::string> lines;
  Hierarchy h = random_hierarchy(rng, 6, 3);
  const Program program = parse_program(h.text).program;
  std::vector<std::string> declared, classes;
  std::istringstream is(h.text);
  auto query = [&]() {
    if (declared.empty()) return;
    int k = uniform(rng, 0, 3);
    const std::string a = pick(rng, declared), b = pick(rng, declared);
    if (k == 0) {
      lines.push_back("lin " + a + ".");
    } else if (k == 1) {
      std::string super = b;
      if (coin(rng, 0.4)) super = "(" + b + " with " + pick(rng, declared) + ")";
      lines.push_back("subtype " + a + " <: " + super + ".");
    } else if (k == 2) {
      lines.push_back("study S" + std::to_string(lines.size()) + ": " + a + " <: " + b + ", " + b + " <: " + a + ".");
    } else if (!classes.empty()) {
      // class predicates take only the root
      lines.push_back("checkentail this::" + pick(rng, classes) + "<> & this = x |- this::" + pick(rng, classes) +
                      "<> \\/ x::" + pick(rng, classes) + "<>.");
    }
  };
  for (std::string line; std::getline(is, line);) {
    lines.push_back(line);
    const std::string kw = line.rfind("class ", 0) == 0 ? "class " : "trait ";
    const auto start = line.find(kw) + kw.size();
    declared.push_back(line.substr(start, line.find_first_of(" .", start) - start));
    if (kw == "class " && has_chain(program, Ident(declared.back()))) classes.push_back(declared.back());
    if (coin(rng, 0.4)) query();
  }
  if (coin(rng, 0.5)) {
    std::istringstream ls(lists_decls());
    for (std::string line; std::getline(ls, line);) lines.push_back(line);
    for (int i = uniform(rng, 1, 3); i > 0;) {
      RandomQuery q = random_query(rng);
      if (!parse_program(lists_decls() + q.text).ok()) continue;
      lines.push_back(q.text);
      --i;
    }
  }
  for (int i = uniform(rng, 1, 4); i > 0; --i) query();
  return lines;
}

}  // namespace testsupport
