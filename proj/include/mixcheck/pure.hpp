// Decision procedure for the pure fragment: conjunctions of pointer
// (dis)equalities, null tests and linear integer (in)equalities.
//
// Equalities go through union-find; the surviving linear constraints are
// decided by Fourier-Motzkin elimination with integer tightening and
// divisibility checks. Unsat answers are always sound. Sat is only reported
// when an integer model was constructed and checked; everything else is
// Unknown.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixcheck/core.hpp"

namespace mixcheck {

enum class SatResult { Sat, Unsat, Unknown };
enum class PureVerdict { Proven, NotProven };

std::string to_string(SatResult r);

/// Integer assignment for the arithmetic variables of a satisfiable formula.
using IntModel = std::map<Ident, std::int64_t>;

/// Solved form of a pure formula.
class PureContext {
 public:
  explicit PureContext(const PureFormula& f);

  SatResult solve(IntModel* model = nullptr) const;

  /// Representative of the equality class of `v` (null is its own element).
  Ident representative(const Ident& v) const;
  bool is_integer_class(const Ident& v) const;

  const std::vector<LinearExpr>& equalities() const { return eqs_; }     // e = 0
  const std::vector<LinearExpr>& inequalities() const { return ineqs_; }  // e <= 0
  const std::vector<LinearExpr>& int_disequalities() const { return int_diseqs_; }  // e != 0
  const std::vector<std::pair<Ident, Ident>>& pointer_disequalities() const { return ptr_diseqs_; }

 private:
  Ident find(const Ident& v) const;
  void unite(const Ident& a, const Ident& b);

  mutable std::map<Ident, Ident> parent_;
  std::map<Ident, Ident> rep_;
  IdentSet int_vars_;
  std::vector<LinearExpr> eqs_, ineqs_, int_diseqs_;
  std::vector<std::pair<Ident, Ident>> ptr_diseqs_;
  std::vector<std::pair<Ident, Ident>> class_members_;  // (member, rep)
  bool contradiction_ = false;
  bool ill_typed_ = false;
};

SatResult pure_sat(const PureFormula& f, IntModel* model = nullptr);

/// Proven iff every literal of `delta` is implied: gamma & !d is Unsat.
PureVerdict pure_entail(const PureFormula& gamma, const PureFormula& delta);

/// Conjunction of linear constraints over the integers (no case splits).
SatResult solve_linear(std::vector<LinearExpr> eqs, std::vector<LinearExpr> ineqs, IntModel* model = nullptr);

}  // namespace mixcheck
