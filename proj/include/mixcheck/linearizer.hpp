// Class linearization for trait/mixin compositions.
//
// L(C) = C followed by L(Cn) ++ ... ++ L(C1), keeping only the last occurrence
// of every repeated name, for `class C extends C1 with C2 ... with Cn`.

#pragma once

#include <string>
#include <vector>

#include "mixcheck/core.hpp"

namespace mixcheck {

/// Most-derived first; order[0] is the owner.
struct Linearization {
  Ident owner;
  std::vector<Ident> order;

  friend bool operator==(const Linearization&, const Linearization&) = default;
};

/// Synthetic owner used for anonymous compound types.
Ident anonymous_owner();

/// Throws Error for undeclared names or cyclic hierarchies.
Linearization linearize(const Program& p, const Ident& name);
Linearization linearize_type_expr(const Program& p, const TypeExpr& t);

/// "C ← P1 ← P2 ..."
std::string arrow_string(const Linearization& l);

}  // namespace mixcheck
