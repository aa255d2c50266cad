#pragma once

#include "gsmv/value.hpp"

#include <functional>
#include <map>
#include <span>
#include <vector>

namespace gsmv {

using ConstantPredicate = std::function<bool(const Value &)>;

struct CanonicalForm {
    std::vector<Fact> facts;          // sorted, values renamed to "#0", "#1", ...
    std::map<Value, Value> renaming;  // original value -> canonical name
};

// Canonical labeling of a set of facts up to renaming of non-constant values.
// Color refinement followed by individualization of tied values; the result is
// the lexicographically least fact list over all refinement-consistent
// labelings, so isomorphic inputs yield identical output and the function is
// idempotent.
CanonicalForm canonicalize(std::span<const Fact> facts, const ConstantPredicate &is_constant);

bool is_canonical_name(const Value &value);

} // namespace gsmv
