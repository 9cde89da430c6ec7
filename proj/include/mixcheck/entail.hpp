// Entailment with frame inference: ante |- conseq * residue.
//
// Proof search matches consequent atoms left to right against antecedent
// atoms, unfolding defined predicates on either side within a budget.
// Valid answers are sound; NotProven covers both invalid queries and
// exhausted searches.

#pragma once

#include <vector>

#include "mixcheck/core.hpp"
#include "mixcheck/predgen.hpp"

namespace mixcheck {

struct EntailOptions {
  int budget = 4;
  /// When false, leftover antecedent atoms make the proof fail.
  bool allow_frame = true;
};

EntailResult check_entail(const PredEnv& env, const Formula& ante, const Formula& conseq,
                          const EntailOptions& opts = {});
EntailResult check_entail(const Program& p, const Formula& ante, const Formula& conseq,
                          const EntailOptions& opts = {});

/// Pure consequences of owning `atoms`: non-null, pairwise distinct data
/// roots and the invariants of defined predicates.
PureFormula heap_facts(const PredEnv& env, const std::vector<PredInst>& atoms);

/// One diagnostic per declared invariant that some body disjunct does not
/// imply.
std::vector<Diagnostic> check_invariants(const Program& p);

}  // namespace mixcheck
