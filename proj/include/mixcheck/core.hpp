// Core data model: identifiers, pure and spatial formulas, declarations,
// programs and entailment results. Every value here is immutable once built
// and can be shared freely; the only mutable facility is the fresh-identifier
// counter, which is atomic.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace mixcheck {

/// Raised for misuse of the API (unknown names, arity mismatches) and for
/// broken internal invariants.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A variable or declaration name. Surface names have id 0; identifiers made
/// by Ident::fresh carry a positive id and print as `name#id`, which the
/// surface lexer accepts but no surface name can collide with.
class Ident {
 public:
  Ident() = default;
  explicit Ident(std::string name, std::uint64_t id = 0);

  static Ident fresh(std::string_view base);
  static Ident null();
  /// Makes sure later fresh ids are strictly greater than `id`.
  static void reserve(std::uint64_t id);

  const std::string& name() const { return name_; }
  std::uint64_t id() const { return id_; }
  bool is_null() const { return id_ == 0 && name_ == "null"; }
  bool is_fresh() const { return id_ != 0; }
  bool empty() const { return name_.empty(); }
  std::string str() const;

  friend bool operator==(const Ident&, const Ident&) = default;
  friend std::strong_ordering operator<=>(const Ident& a, const Ident& b) {
    if (auto c = a.name_ <=> b.name_; c != 0) return c;
    return a.id_ <=> b.id_;
  }

 private:
  std::string name_;
  std::uint64_t id_ = 0;
};

using IdentSet = std::set<Ident>;
using Subst = std::map<Ident, Ident>;

struct SourceSpan {
  std::string file;
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct Diagnostic {
  SourceSpan span;
  std::string message;
};

std::string format_diagnostic(const Diagnostic& d);

// ---------------------------------------------------------------------------
// Sorts

struct Sort {
  enum class Tag { Int, Bool, Bag, Shape, Ptr };
  Tag tag = Tag::Int;
  std::string type_name;  // only for Ptr

  static Sort ptr(std::string type) { return {Tag::Ptr, std::move(type)}; }
  friend bool operator==(const Sort&, const Sort&) = default;
};

/// Coarse variable classification used by the provers and the enumerator.
enum class VarKind { Unknown, Pointer, Integer, Bag };

VarKind kind_of(const Sort& s);

// ---------------------------------------------------------------------------
// Arithmetic

/// constant + sum of coeff * var, with every stored coefficient non-zero.
struct LinearExpr {
  std::int64_t constant = 0;
  std::map<Ident, std::int64_t> coeffs;

  static LinearExpr of_const(std::int64_t k);
  static LinearExpr of_var(const Ident& v, std::int64_t k = 1);

  LinearExpr& add(const LinearExpr& other, std::int64_t scale = 1);
  LinearExpr& add_term(const Ident& v, std::int64_t k);
  LinearExpr operator-() const;
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a.add(b); }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a.add(b, -1); }

  bool is_constant() const { return coeffs.empty(); }
  std::int64_t coeff(const Ident& v) const;
  std::int64_t evaluate(const std::function<std::int64_t(const Ident&)>& value) const;
  LinearExpr substitute(const Subst& s) const;

  friend bool operator==(const LinearExpr&, const LinearExpr&) = default;
  friend bool operator<(const LinearExpr& a, const LinearExpr& b) {
    if (a.constant != b.constant) return a.constant < b.constant;
    return a.coeffs < b.coeffs;
  }
};

/// Surface arithmetic term `k | k*v | a1 + a2`. Normalizes to a LinearExpr.
class ArithTerm {
 public:
  struct Const { std::int64_t k; };
  struct Scaled { std::int64_t k; Ident v; };
  struct Sum;
  using Node = std::variant<Const, Scaled, std::shared_ptr<const Sum>>;

  static ArithTerm constant(std::int64_t k);
  static ArithTerm scaled(std::int64_t k, Ident v);
  static ArithTerm sum(ArithTerm left, ArithTerm right);
  static ArithTerm from_linear(const LinearExpr& e);

  const Node& node() const { return node_; }
  LinearExpr normalize() const;

 private:
  explicit ArithTerm(Node n) : node_(std::move(n)) {}
  Node node_;
};

struct ArithTerm::Sum {
  ArithTerm left;
  ArithTerm right;
};

// ---------------------------------------------------------------------------
// Pure formulas

struct VarEq {
  Ident lhs, rhs;
  friend bool operator==(const VarEq&, const VarEq&) = default;
};
struct NullEq {
  Ident var;
  friend bool operator==(const NullEq&, const NullEq&) = default;
};
struct Leq0 {
  LinearExpr expr;
  friend bool operator==(const Leq0&, const Leq0&) = default;
};
struct Eq0 {
  LinearExpr expr;
  friend bool operator==(const Eq0&, const Eq0&) = default;
};

struct PureAtom {
  std::variant<VarEq, NullEq, Leq0, Eq0> body;
  bool negated = false;

  static PureAtom var_eq(Ident a, Ident b, bool negated = false);
  /// `a = b` with either side possibly null; picks NullEq when one side is.
  static PureAtom equal(const Ident& a, const Ident& b, bool negated = false);
  static PureAtom null_eq(Ident v, bool negated = false);
  static PureAtom leq0(LinearExpr e, bool negated = false);
  static PureAtom eq0(LinearExpr e, bool negated = false);
  static PureAtom falsum();

  PureAtom negation() const;
  void collect_vars(IdentSet& out) const;

  friend bool operator==(const PureAtom&, const PureAtom&) = default;
};

/// Conjunction; empty means true.
struct PureFormula {
  std::vector<PureAtom> atoms;

  bool empty() const { return atoms.empty(); }
  void add(PureAtom a) { atoms.push_back(std::move(a)); }
  void append(const PureFormula& f) { atoms.insert(atoms.end(), f.atoms.begin(), f.atoms.end()); }

  friend bool operator==(const PureFormula&, const PureFormula&) = default;
};

// ---------------------------------------------------------------------------
// Spatial formulas

struct Emp {};

/// `root::name<args>`; arity is 1 + args.size().
struct PredInst {
  Ident name;
  Ident root;
  std::vector<Ident> args;

  friend bool operator==(const PredInst&, const PredInst&) = default;
};

using HeapAtom = std::variant<Emp, PredInst>;

/// `exists existentials: spatial & pure`. Emp atoms are never stored; an
/// empty spatial list is emp.
struct SymbolicHeap {
  std::vector<Ident> existentials;
  std::vector<PredInst> spatial;
  PureFormula pure;

  void add(const HeapAtom& a);
  friend bool operator==(const SymbolicHeap&, const SymbolicHeap&) = default;
};

/// Non-empty disjunction of symbolic heaps.
struct Formula {
  std::vector<SymbolicHeap> disjuncts;

  Formula() : disjuncts(1) {}
  explicit Formula(SymbolicHeap h) : disjuncts{std::move(h)} {}
  explicit Formula(std::vector<SymbolicHeap> ds);

  friend bool operator==(const Formula&, const Formula&) = default;
};

// ---------------------------------------------------------------------------
// Declarations

struct Field {
  Sort sort;
  Ident name;
  friend bool operator==(const Field&, const Field&) = default;
};

struct AbstractPred {
  friend bool operator==(const AbstractPred&, const AbstractPred&) = default;
};
struct DataPred {
  std::vector<Field> fields;
  friend bool operator==(const DataPred&, const DataPred&) = default;
};
struct DefinedPred {
  Formula body;
  friend bool operator==(const DefinedPred&, const DefinedPred&) = default;
};

/// A named predicate. params[0] is the implicit root, written `self` in
/// surface syntax.
struct PredDef {
  Ident name;
  std::vector<Ident> params;
  std::variant<AbstractPred, DataPred, DefinedPred> kind;
  std::optional<PureFormula> invariant;
  SourceSpan span;

  bool is_abstract() const { return std::holds_alternative<AbstractPred>(kind); }
  bool is_data() const { return std::holds_alternative<DataPred>(kind); }
  bool is_defined() const { return std::holds_alternative<DefinedPred>(kind); }
  const Formula& body() const { return std::get<DefinedPred>(kind).body; }
  const std::vector<Field>& fields() const { return std::get<DataPred>(kind).fields; }
  std::size_t arity() const { return params.size(); }

  friend bool operator==(const PredDef& a, const PredDef& b) {
    return a.name == b.name && a.params == b.params && a.kind == b.kind && a.invariant == b.invariant;
  }
};

struct TraitDecl {
  Ident name;
  std::vector<Ident> parents;
  bool interface_only = false;
  SourceSpan span;

  friend bool operator==(const TraitDecl& a, const TraitDecl& b) {
    return a.name == b.name && a.parents == b.parents && a.interface_only == b.interface_only;
  }
};

struct ClassDecl {
  Ident name;
  std::vector<Ident> parents;
  SourceSpan span;

  friend bool operator==(const ClassDecl& a, const ClassDecl& b) {
    return a.name == b.name && a.parents == b.parents;
  }
};

/// `base with m1 with m2 ...`
struct TypeExpr {
  Ident base;
  std::vector<Ident> mixed;

  static TypeExpr named(Ident n) { return {std::move(n), {}}; }
  friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

using Decl = std::variant<PredDef, TraitDecl, ClassDecl>;

const Ident& decl_name(const Decl& d);
const SourceSpan& decl_span(const Decl& d);

/// Declarations in source order, indexed by name. All names share one
/// namespace: a trait and the predicate generated for it are one entity.
class Program {
 public:
  /// Appends a declaration; throws Error if the name is already taken.
  void add(Decl d);

  const std::vector<Decl>& decls() const { return decls_; }
  bool empty() const { return decls_.empty(); }
  bool declares(const std::string& name) const { return index_.count(name) != 0; }

  const Decl* find(const std::string& name) const;
  const PredDef* find_pred(const std::string& name) const;  // data or pred
  const TraitDecl* find_trait(const std::string& name) const;
  const ClassDecl* find_class(const std::string& name) const;

  std::vector<const PredDef*> data_defs() const;
  std::vector<const PredDef*> pred_defs() const;
  std::vector<const TraitDecl*> traits() const;
  std::vector<const ClassDecl*> classes() const;

  friend bool operator==(const Program& a, const Program& b) { return a.decls_ == b.decls_; }

 private:
  std::vector<Decl> decls_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Results

enum class Verdict { Valid, NotProven };

struct EntailResult {
  Verdict verdict = Verdict::NotProven;
  std::optional<Formula> residue;  // present iff Valid
  /// Consequent variables bound to antecedent variables by the proof.
  std::vector<std::pair<Ident, Ident>> instantiation;
  std::vector<std::string> trace;

  bool valid() const { return verdict == Verdict::Valid; }
};

// ---------------------------------------------------------------------------
// Substitution and renaming

IdentSet free_vars(const PureFormula& f);
IdentSet free_vars(const SymbolicHeap& h);
IdentSet free_vars(const Formula& f);

PureFormula substitute(const PureFormula& f, const Subst& s);
PredInst substitute(const PredInst& a, const Subst& s);
/// Simultaneous capture-avoiding substitution; existentials that clash with
/// the mapping are renamed first.
SymbolicHeap substitute(const SymbolicHeap& h, const Subst& s);
Formula substitute(const Formula& f, const Subst& s);

/// Replaces every existential by a fresh identifier with the same base name.
SymbolicHeap fresh_rename(const SymbolicHeap& h);
Formula fresh_rename(const Formula& f);

/// Syntactic equality up to consistent renaming of existentials. Order of
/// disjuncts and spatial atoms is significant; pure atoms are compared as a
/// multiset.
bool alpha_equivalent(const SymbolicHeap& a, const SymbolicHeap& b);
bool alpha_equivalent(const Formula& a, const Formula& b);

/// `a * b`: spatial and pure parts concatenated, existentials of `b` renamed
/// apart from `a`.
SymbolicHeap star(const SymbolicHeap& a, const SymbolicHeap& b);

// ---------------------------------------------------------------------------
// Well-formedness and sorts

/// Parameter kinds for every predicate name usable in a formula (data
/// predicates, user predicates, generated trait and class predicates).
using Signatures = std::map<std::string, std::vector<VarKind>>;

Signatures signatures(const Program& p);

/// Infers a kind for every variable of `f`; conflicting uses are reported in
/// `conflicts` when given.
std::map<Ident, VarKind> infer_kinds(const Signatures& sigs, const Formula& f,
                                     std::vector<std::string>* conflicts = nullptr);

/// All violations of the program invariants: duplicate or unknown names,
/// arity mismatches, inheritance cycles, unbound variables, sort clashes.
std::vector<Diagnostic> well_formed(const Program& p);

/// Checks a formula used in a command against the program.
std::vector<Diagnostic> well_formed_formula(const Program& p, const Formula& f, const SourceSpan& where);
std::vector<Diagnostic> well_formed_type(const Program& p, const TypeExpr& t, const SourceSpan& where);

// ---------------------------------------------------------------------------
// Printing (input-language syntax; re-parses to an equal value)

std::string to_string(const LinearExpr& e);
std::string to_string(const PureAtom& a);
std::string to_string(const PureFormula& f);
std::string to_string(const PredInst& a);
std::string to_string(const SymbolicHeap& h);
std::string to_string(const Formula& f);
std::string to_string(const PredDef& d);
std::string to_string(const TraitDecl& d);
std::string to_string(const ClassDecl& d);
std::string to_string(const Decl& d);
std::string to_string(const Program& p);
std::string to_string(const TypeExpr& t);
std::string to_string(Verdict v);

}  // namespace mixcheck

template <>
struct std::hash<mixcheck::Ident> {
  std::size_t operator()(const mixcheck::Ident& i) const noexcept {
    return std::hash<std::string>{}(i.name()) ^ (std::hash<std::uint64_t>{}(i.id()) * 0x9e3779b97f4a7c15ULL);
  }
};
