// Bounded brute-force model enumeration for symbolic heaps. Used as a
// semantic oracle for the entailment engine on small instances.
//
// Values are integers; for pointer variables 0 is null and positive values
// are addresses. Abstract predicate instances are opaque resources labeled
// by name and argument values.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mixcheck/core.hpp"
#include "mixcheck/predgen.hpp"

namespace mixcheck {

struct Bounds {
  int heap_size = 3;
  std::int64_t int_min = -3;
  std::int64_t int_max = 3;
  /// Unfoldings of defined predicates along one expansion path.
  int max_unfold = 16;
  std::size_t max_models = 50000;
};

struct Cell {
  std::string type;
  std::vector<std::int64_t> fields;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Resource {
  std::string name;
  std::vector<std::int64_t> values;  // root first
  friend auto operator<=>(const Resource&, const Resource&) = default;
};

struct Model {
  std::map<Ident, std::int64_t> store;  // free variables of the enumerated heap
  std::map<std::int64_t, Cell> heap;
  std::multiset<Resource> resources;

  friend bool operator==(const Model&, const Model&) = default;
};

std::string to_string(const Model& m);

struct Enumeration {
  std::vector<Model> models;
  /// Some expansion or the model count hit a bound, so `models` may be
  /// incomplete. Distinct from an empty but complete result.
  bool exhausted = false;
};

Enumeration model_enumerate(const PredEnv& env, const SymbolicHeap& h, const Bounds& bounds = {});
Enumeration model_enumerate(const Program& p, const SymbolicHeap& h, const Bounds& bounds = {});

/// Whether `m` (store, heap and resources, consumed exactly) satisfies `f`.
/// Free variables of `f` missing from the store are existentially chosen:
/// from the heap's values, a few fresh addresses, and for the rest of the
/// integers from `witness_min..witness_max`.
bool satisfies(const PredEnv& env, const Model& m, const Formula& f, const Bounds& bounds = {},
               std::int64_t witness_min = -20, std::int64_t witness_max = 20);

}  // namespace mixcheck
