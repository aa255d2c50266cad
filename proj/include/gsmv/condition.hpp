#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gsmv {

// Terms of the condition language. Inside an `exists T where ...` filter or a
// child selector `T[...]`, `it` denotes the candidate child; bare attribute
// names always denote attributes of the owning instance.
struct Term {
    enum class Kind { Null, Literal, Attribute, Self, Child, ChildAttribute, NewId };
    Kind kind = Kind::Null;
    std::string name;  // literal text or attribute name

    static Term null() { return {}; }
    static Term literal(std::string text) { return {Kind::Literal, std::move(text)}; }
    static Term attribute(std::string n) { return {Kind::Attribute, std::move(n)}; }

    bool operator==(const Term &) const = default;
};

// Closed first-order condition: boolean combinations of equality atoms,
// status tests and child-existence tests. No arithmetic.
struct Condition {
    enum class Kind { True, False, And, Or, Not, Eq, Neq, Achieved, Open, ExistsChild };
    Kind kind = Kind::True;
    std::vector<Condition> operands;  // And/Or/Not; ExistsChild filter (0 or 1)
    Term lhs;
    Term rhs;
    std::string name;  // milestone, stage or child type

    static Condition truth() { return {}; }
    static Condition conj(std::vector<Condition> ops);
    static Condition disj(std::vector<Condition> ops);
    static Condition negate(Condition c);
    static Condition eq(Term a, Term b);
    static Condition neq(Term a, Term b);
    static Condition achieved(std::string milestone);
    static Condition open(std::string stage);
    static Condition exists(std::string child_type, std::optional<Condition> filter = std::nullopt);

    bool operator==(const Condition &) const = default;
};

std::string to_string(const Term &term);
std::string to_string(const Condition &cond);

// Names referenced by a condition (for validation and rule dependencies).
struct ConditionRefs {
    std::set<std::string> attributes;        // owner attributes
    std::set<std::string> child_attributes;  // (type-less) child attributes
    std::set<std::string> milestones;
    std::set<std::string> stages;
    std::set<std::string> child_types;
    std::set<std::string> literals;
};
void collect_refs(const Condition &cond, ConditionRefs &refs);
void collect_refs(const Term &term, ConditionRefs &refs);

} // namespace gsmv
