#pragma once

#include "gsmv/value.hpp"

#include <json.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsmv {

using Tuple = std::vector<Value>;

struct Relation {
    std::string name;
    std::size_t arity = 0;
    std::vector<std::size_t> key;  // key positions; empty = whole tuple
    bool operator==(const Relation &) const = default;
};

// Value sort produced by a service, used by exploration oracles.
enum class ServiceSort { Scalar, Ref, NewId };

struct Service {
    std::string name;
    std::size_t arity = 0;
    ServiceSort sort = ServiceSort::Scalar;
    bool operator==(const Service &) const = default;
};

struct QTerm {
    enum class Kind { Var, Const };
    Kind kind = Kind::Const;
    std::string text;
    static QTerm var(std::string v) { return {Kind::Var, std::move(v)}; }
    static QTerm constant(std::string c) { return {Kind::Const, std::move(c)}; }
    bool operator==(const QTerm &) const = default;
};

// First-order queries over the database: atoms, (in)equality, the order
// comparison '<' on values, boolean connectives and existential
// quantification. Evaluated under the active-domain semantics; every query
// must be safe (variables bound by a positive atom or an equality with a bound
// term before they are negated or compared).
struct Query {
    enum class Kind { True, False, Atom, Eq, Neq, Lt, And, Or, Not, Exists };
    Kind kind = Kind::True;
    std::string relation;          // Atom
    std::vector<QTerm> args;       // Atom; Eq/Neq/Lt use args[0], args[1]
    std::vector<Query> operands;   // And/Or/Not/Exists (Exists: one operand)
    std::vector<std::string> vars; // Exists
    bool operator==(const Query &) const = default;

    static Query truth() { return {}; }
    static Query falsity() { return {Kind::False, {}, {}, {}, {}}; }
    static Query atom(std::string rel, std::vector<QTerm> args);
    static Query eq(QTerm a, QTerm b);
    static Query neq(QTerm a, QTerm b);
    static Query lt(QTerm a, QTerm b);
    static Query conj(std::vector<Query> ops);
    static Query disj(std::vector<Query> ops);
    static Query negate(Query q);
    static Query exists(std::vector<std::string> vars, Query body);
};

std::set<std::string> free_vars(const Query &q);
std::string to_string(const QTerm &t);
std::string to_string(const Query &q);

// Effect-head terms: variables, constants or service calls f(t1..tk) whose
// arguments are variables or constants.
struct ETerm {
    enum class Kind { Var, Const, Call };
    Kind kind = Kind::Const;
    std::string text;  // variable, constant or service name
    std::vector<QTerm> args;
    static ETerm var(std::string v) { return {Kind::Var, std::move(v), {}}; }
    static ETerm constant(std::string c) { return {Kind::Const, std::move(c), {}}; }
    static ETerm call(std::string f, std::vector<QTerm> a) { return {Kind::Call, std::move(f), std::move(a)}; }
    bool operator==(const ETerm &) const = default;
};

struct EffectFact {
    std::string relation;
    std::vector<ETerm> args;
    bool operator==(const EffectFact &) const = default;
};

// Q ~> E
struct Effect {
    Query query;
    std::vector<EffectFact> facts;
    bool operator==(const Effect &) const = default;
};

struct Action {
    std::string name;
    std::vector<std::string> params;
    std::vector<Effect> effects;
    bool operator==(const Action &) const = default;
};

// Q |-> alpha; the free variables of Q are exactly the action parameters.
struct CaRule {
    std::string name;
    Query condition;
    std::string action;
    bool operator==(const CaRule &) const = default;
};

struct DbInstance {
    std::map<std::string, std::set<Tuple>> relations;
    bool operator==(const DbInstance &) const = default;
    auto operator<=>(const DbInstance &) const = default;

    void insert(const std::string &rel, Tuple t) { relations[rel].insert(std::move(t)); }
    const std::set<Tuple> &tuples(const std::string &rel) const;
    std::size_t size() const;  // number of facts
    std::set<Value> active_domain() const;
};

std::string to_string(const DbInstance &db);

struct DcdsSpec {
    std::vector<Relation> schema;
    std::vector<Service> services;
    std::vector<Action> actions;
    std::vector<CaRule> rules;
    DbInstance initial;
    bool operator==(const DcdsSpec &) const = default;

    const Relation *find_relation(const std::string &name) const;
    const Service *find_service(const std::string &name) const;
    const Action *find_action(const std::string &name) const;
};

struct DcdsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural checks: heads in schema with the right arity, effect variables
// bound by the effect query or parameters, rule queries free in exactly the
// action parameters, service calls declared. Throws DcdsError.
void check_spec(const DcdsSpec &spec);

// Key violations, one message each.
std::vector<std::string> key_violations(const DcdsSpec &spec, const DbInstance &db);

using Binding = std::map<std::string, Value>;

// All extensions of `given` to the free variables of q that satisfy q.
std::vector<Binding> answers(const Query &q, const DbInstance &db, const Binding &given = {});

struct EnabledAction {
    std::size_t rule = 0;  // index into spec.rules
    std::string action;
    Binding binding;
    bool operator==(const EnabledAction &) const = default;
};

std::vector<EnabledAction> enabled_actions(const DcdsSpec &spec, const DbInstance &db);

struct ServiceCall {
    std::string service;
    std::vector<Value> args;
    auto operator<=>(const ServiceCall &) const = default;
};
std::string to_string(const ServiceCall &c);

using ServiceAssignment = std::map<ServiceCall, Value>;

// Supplies the possible results of the distinct service calls of one action
// application (nondeterministic services).
class ServiceOracle {
public:
    virtual ~ServiceOracle() = default;
    virtual std::vector<ServiceAssignment> assignments(const DcdsSpec &spec, const DbInstance &db,
                                                       const std::vector<ServiceCall> &calls) const = 0;
};

// Every combination of values from a fixed domain.
class DomainOracle : public ServiceOracle {
public:
    explicit DomainOracle(std::vector<Value> domain) : domain_(std::move(domain)) {}
    std::vector<ServiceAssignment> assignments(const DcdsSpec &spec, const DbInstance &db,
                                               const std::vector<ServiceCall> &calls) const override;

private:
    std::vector<Value> domain_;
};

// One random assignment per application; NewId calls get values outside the
// active domain.
class RandomOracle : public ServiceOracle {
public:
    explicit RandomOracle(std::uint32_t seed, std::vector<Value> domain = {"a", "b", "c"});
    std::vector<ServiceAssignment> assignments(const DcdsSpec &spec, const DbInstance &db,
                                               const std::vector<ServiceCall> &calls) const override;

private:
    mutable std::mt19937 rng_;
    mutable std::size_t counter_ = 0;
    std::vector<Value> domain_;
};

struct ApplyResult {
    std::vector<DbInstance> successors;
    std::vector<std::string> discarded;  // key-violation reports
};

ApplyResult apply_action(const DcdsSpec &spec, const DbInstance &db, const std::string &action,
                         const Binding &binding, const ServiceOracle &oracle);

nlohmann::json spec_to_json(const DcdsSpec &spec);
DcdsSpec spec_from_json(const nlohmann::json &doc);
nlohmann::json db_to_json(const DbInstance &db);

} // namespace gsmv
