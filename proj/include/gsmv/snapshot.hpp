#pragma once

#include "gsmv/canonical.hpp"
#include "gsmv/model.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace gsmv {

// Relational view of a snapshot: one fact per instance, relation name
// "<type>|<stage bits><milestone bits>", arguments id then attribute values in
// declaration order; one fact "free|<type>"(id) per blank container.
std::vector<Fact> snapshot_facts(const GsmModel &model, const Snapshot &snap);

struct CanonicalSnapshot {
    Snapshot snapshot;               // values renamed to canonical names
    std::string key;                 // canonical fact listing; equal iff isomorphic
    std::map<Value, Value> renaming; // original -> canonical
};

CanonicalSnapshot canonicalize_snapshot(const GsmModel &model, const Snapshot &snap);
Snapshot rename(const Snapshot &snap, const std::map<Value, Value> &renaming);

// Information-model size: every occupied instance or blank container
// contributes one cell for its id plus one per attribute, stage and milestone.
std::size_t snapshot_size(const GsmModel &model, const Snapshot &snap);

// 64-bit content hash of the canonical serialization (diagnostic only).
std::uint64_t snapshot_hash(const GsmModel &model, const Snapshot &snap);

// Non-null values occurring in the snapshot (ids included).
std::set<Value> active_domain(const Snapshot &snap);
// Non-null values stored in scalar-sorted attributes.
std::set<Value> scalar_domain(const GsmModel &model, const Snapshot &snap);

std::vector<Value> children_of(const Snapshot &snap, const Value &parent, const std::string &type);

std::string describe(const Snapshot &snap);

struct ConditionScope {
    const GsmModel &model;
    const Snapshot &snap;
    const Value &self;
    const Value *child = nullptr;
    const Value *new_id = nullptr;
};

bool evaluate(const Condition &cond, const ConditionScope &scope);
Value evaluate(const Term &term, const ConditionScope &scope);

} // namespace gsmv
