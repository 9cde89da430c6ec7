// C <: D holds when the chain generated for C, rooted at a shared `this`,
// entails the chain generated for D:
//
//   exists v..: this::C1<v1> * v1::C2<v2> * ... |- exists u..: this::D1<u1> * ...
//
// Both chains end in null unless `open_tail` is set, in which case the
// supertype chain ends in an instantiable variable and may be a prefix.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixcheck/core.hpp"
#include "mixcheck/entail.hpp"
#include "mixcheck/predgen.hpp"

namespace mixcheck {

enum class Holds { Yes, NotProven };

struct SubtypeOptions {
  bool open_tail = false;
  int budget = 4;
  bool allow_frame = true;
};

struct SubtypeVerdict {
  TypeExpr sub;
  TypeExpr super;
  Holds holds = Holds::NotProven;
  Formula ante;
  Formula conseq;
  EntailResult result;

  bool yes() const { return holds == Holds::Yes; }
  /// The submitted entailment, `ante |- conseq`.
  std::string query() const;
};

/// Throws Error for unknown names or empty chains.
SubtypeVerdict is_subtype(const Program& p, const TypeExpr& sub, const TypeExpr& super, const SubtypeOptions& opts = {});
SubtypeVerdict is_subtype(const Program& p, const PredEnv& env, const TypeExpr& sub, const TypeExpr& super,
                          const SubtypeOptions& opts = {});

struct ReportEntry {
  TypeExpr super;
  TypeExpr sub;
  std::optional<SubtypeVerdict> verdict;  // empty when the pair failed to resolve
  std::string error;

  /// "X is SUPERTYPE of Y", "X is NOT SUPERTYPE of Y" or an error line.
  std::string line() const;
};

/// One entry per (super, sub) pair, in order. Errors stay local to their
/// entry.
std::vector<ReportEntry> supertype_report(const Program& p, const std::vector<std::pair<TypeExpr, TypeExpr>>& pairs,
                                          const SubtypeOptions& opts = {});

std::string to_string(Holds h);

}  // namespace mixcheck
