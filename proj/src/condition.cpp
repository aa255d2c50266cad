#include "gsmv/condition.hpp"

#include "gsmv/names.hpp"

namespace gsmv {

Condition Condition::conj(std::vector<Condition> ops) {
    if (ops.size() == 1)
        return std::move(ops.front());
    Condition c;
    c.kind = ops.empty() ? Kind::True : Kind::And;
    c.operands = std::move(ops);
    return c;
}

Condition Condition::disj(std::vector<Condition> ops) {
    if (ops.size() == 1)
        return std::move(ops.front());
    Condition c;
    c.kind = ops.empty() ? Kind::False : Kind::Or;
    c.operands = std::move(ops);
    return c;
}

Condition Condition::negate(Condition inner) {
    Condition c;
    c.kind = Kind::Not;
    c.operands.push_back(std::move(inner));
    return c;
}

Condition Condition::eq(Term a, Term b) {
    Condition c;
    c.kind = Kind::Eq;
    c.lhs = std::move(a);
    c.rhs = std::move(b);
    return c;
}

Condition Condition::neq(Term a, Term b) {
    Condition c = eq(std::move(a), std::move(b));
    c.kind = Kind::Neq;
    return c;
}

Condition Condition::achieved(std::string milestone) {
    Condition c;
    c.kind = Kind::Achieved;
    c.name = std::move(milestone);
    return c;
}

Condition Condition::open(std::string stage) {
    Condition c;
    c.kind = Kind::Open;
    c.name = std::move(stage);
    return c;
}

Condition Condition::exists(std::string child_type, std::optional<Condition> filter) {
    Condition c;
    c.kind = Kind::ExistsChild;
    c.name = std::move(child_type);
    if (filter)
        c.operands.push_back(std::move(*filter));
    return c;
}

std::string to_string(const Term &term) {
    switch (term.kind) {
    case Term::Kind::Null:
        return "null";
    case Term::Kind::Literal:
        return quote_literal(term.name);
    case Term::Kind::Attribute:
        return quote_name(term.name);
    case Term::Kind::Self:
        return "self";
    case Term::Kind::Child:
        return "it";
    case Term::Kind::ChildAttribute:
        return "it." + quote_name(term.name);
    case Term::Kind::NewId:
        return "new";
    }
    return {};
}

std::string to_string(const Condition &cond) {
    using K = Condition::Kind;
    switch (cond.kind) {
    case K::True:
        return "true";
    case K::False:
        return "false";
    case K::And:
    case K::Or: {
        std::string out = "(";
        for (std::size_t i = 0; i < cond.operands.size(); ++i) {
            if (i)
                out += cond.kind == K::And ? " and " : " or ";
            out += to_string(cond.operands[i]);
        }
        return out + ")";
    }
    case K::Not:
        return "not " + to_string(cond.operands.front());
    case K::Eq:
        return to_string(cond.lhs) + " = " + to_string(cond.rhs);
    case K::Neq:
        return to_string(cond.lhs) + " != " + to_string(cond.rhs);
    case K::Achieved:
        return "achieved(" + quote_name(cond.name) + ")";
    case K::Open:
        return "open(" + quote_name(cond.name) + ")";
    case K::ExistsChild:
        if (cond.operands.empty())
            return "exists " + quote_name(cond.name);
        return "exists " + quote_name(cond.name) + " where (" + to_string(cond.operands.front()) + ")";
    }
    return {};
}

void collect_refs(const Term &term, ConditionRefs &refs) {
    switch (term.kind) {
    case Term::Kind::Literal:
        refs.literals.insert(term.name);
        break;
    case Term::Kind::Attribute:
        refs.attributes.insert(term.name);
        break;
    case Term::Kind::ChildAttribute:
        refs.child_attributes.insert(term.name);
        break;
    default:
        break;
    }
}

void collect_refs(const Condition &cond, ConditionRefs &refs) {
    using K = Condition::Kind;
    switch (cond.kind) {
    case K::Eq:
    case K::Neq:
        collect_refs(cond.lhs, refs);
        collect_refs(cond.rhs, refs);
        break;
    case K::Achieved:
        refs.milestones.insert(cond.name);
        break;
    case K::Open:
        refs.stages.insert(cond.name);
        break;
    case K::ExistsChild:
        refs.child_types.insert(cond.name);
        break;
    default:
        break;
    }
    for (const auto &op : cond.operands)
        collect_refs(op, refs);
}

} // namespace gsmv
