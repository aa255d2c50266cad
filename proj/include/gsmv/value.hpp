#pragma once

#include <compare>
#include <string>
#include <vector>

namespace gsmv {

// Uninterpreted data value. Model literals are constants; everything else
// (instance ids, payload values) may be renamed freely by canonicalization.
using Value = std::string;

inline const Value kNull = "null";
inline const std::string kNewIdSlot = "id";
inline const std::string kParentAttribute = "parent";

// A ground relational fact. Used both for DCDS database instances and for the
// relational view of a GSM snapshot.
struct Fact {
    std::string relation;
    std::vector<Value> args;

    auto operator<=>(const Fact &) const = default;
    bool operator==(const Fact &) const = default;
};

std::string to_string(const Fact &fact);

} // namespace gsmv
