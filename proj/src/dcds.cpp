#include "gsmv/dcds.hpp"

#include <algorithm>
#include <sstream>

namespace gsmv {

Query Query::atom(std::string rel, std::vector<QTerm> args) {
    Query q;
    q.kind = Kind::Atom;
    q.relation = std::move(rel);
    q.args = std::move(args);
    return q;
}

namespace {

Query binary(Query::Kind k, QTerm a, QTerm b) {
    Query q;
    q.kind = k;
    q.args = {std::move(a), std::move(b)};
    return q;
}

} // namespace

Query Query::eq(QTerm a, QTerm b) {
    return binary(Kind::Eq, std::move(a), std::move(b));
}
Query Query::neq(QTerm a, QTerm b) {
    return binary(Kind::Neq, std::move(a), std::move(b));
}
Query Query::lt(QTerm a, QTerm b) {
    return binary(Kind::Lt, std::move(a), std::move(b));
}

Query Query::conj(std::vector<Query> ops) {
    std::vector<Query> flat;
    for (auto &op : ops) {
        if (op.kind == Kind::True)
            continue;
        if (op.kind == Kind::False)
            return falsity();
        if (op.kind == Kind::And)
            for (auto &x : op.operands)
                flat.push_back(std::move(x));
        else
            flat.push_back(std::move(op));
    }
    if (flat.empty())
        return truth();
    if (flat.size() == 1)
        return std::move(flat.front());
    Query q;
    q.kind = Kind::And;
    q.operands = std::move(flat);
    return q;
}

Query Query::disj(std::vector<Query> ops) {
    std::vector<Query> flat;
    for (auto &op : ops) {
        if (op.kind == Kind::False)
            continue;
        if (op.kind == Kind::True)
            return truth();
        if (op.kind == Kind::Or)
            for (auto &x : op.operands)
                flat.push_back(std::move(x));
        else
            flat.push_back(std::move(op));
    }
    if (flat.empty())
        return falsity();
    if (flat.size() == 1)
        return std::move(flat.front());
    Query q;
    q.kind = Kind::Or;
    q.operands = std::move(flat);
    return q;
}

Query Query::negate(Query inner) {
    if (inner.kind == Kind::True)
        return falsity();
    if (inner.kind == Kind::False)
        return truth();
    if (inner.kind == Kind::Not)
        return std::move(inner.operands.front());
    Query q;
    q.kind = Kind::Not;
    q.operands.push_back(std::move(inner));
    return q;
}

Query Query::exists(std::vector<std::string> vars, Query body) {
    if (vars.empty())
        return body;
    Query q;
    q.kind = Kind::Exists;
    q.vars = std::move(vars);
    q.operands.push_back(std::move(body));
    return q;
}

std::set<std::string> free_vars(const Query &q) {
    std::set<std::string> out;
    using K = Query::Kind;
    switch (q.kind) {
    case K::True:
    case K::False:
        break;
    case K::Atom:
    case K::Eq:
    case K::Neq:
    case K::Lt:
        for (const auto &t : q.args)
            if (t.kind == QTerm::Kind::Var)
                out.insert(t.text);
        break;
    case K::And:
    case K::Or:
    case K::Not:
        for (const auto &op : q.operands) {
            auto s = free_vars(op);
            out.insert(s.begin(), s.end());
        }
        break;
    case K::Exists:
        out = free_vars(q.operands.front());
        for (const auto &v : q.vars)
            out.erase(v);
        break;
    }
    return out;
}

std::string to_string(const QTerm &t) {
    if (t.kind == QTerm::Kind::Var)
        return t.text;
    std::string out = "'";
    for (char c : t.text) {
        if (c == '\'' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "'";
}

std::string to_string(const Query &q) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::True:
        return "true";
    case K::False:
        return "false";
    case K::Atom: {
        std::string out = q.relation + "(";
        for (std::size_t i = 0; i < q.args.size(); ++i)
            out += (i ? ", " : "") + to_string(q.args[i]);
        return out + ")";
    }
    case K::Eq:
        return to_string(q.args[0]) + " = " + to_string(q.args[1]);
    case K::Neq:
        return to_string(q.args[0]) + " != " + to_string(q.args[1]);
    case K::Lt:
        return to_string(q.args[0]) + " < " + to_string(q.args[1]);
    case K::And:
    case K::Or: {
        std::string out = "(";
        for (std::size_t i = 0; i < q.operands.size(); ++i)
            out += (i ? (q.kind == K::And ? " and " : " or ") : "") + to_string(q.operands[i]);
        return out + ")";
    }
    case K::Not:
        return "not " + to_string(q.operands.front());
    case K::Exists: {
        std::string out = "exists ";
        for (std::size_t i = 0; i < q.vars.size(); ++i)
            out += (i ? "," : "") + q.vars[i];
        return out + ". " + to_string(q.operands.front());
    }
    }
    return "?";
}

const std::set<Tuple> &DbInstance::tuples(const std::string &rel) const {
    static const std::set<Tuple> empty;
    auto it = relations.find(rel);
    return it == relations.end() ? empty : it->second;
}

std::size_t DbInstance::size() const {
    std::size_t n = 0;
    for (const auto &[r, ts] : relations)
        n += ts.size();
    return n;
}

std::set<Value> DbInstance::active_domain() const {
    std::set<Value> out;
    for (const auto &[r, ts] : relations)
        for (const auto &t : ts)
            out.insert(t.begin(), t.end());
    return out;
}

std::string to_string(const DbInstance &db) {
    std::ostringstream os;
    for (const auto &[r, ts] : db.relations)
        for (const auto &t : ts) {
            os << r << "(";
            for (std::size_t i = 0; i < t.size(); ++i)
                os << (i ? ", " : "") << t[i];
            os << ")\n";
        }
    return os.str();
}

const Relation *DcdsSpec::find_relation(const std::string &name) const {
    for (const auto &r : schema)
        if (r.name == name)
            return &r;
    return nullptr;
}

const Service *DcdsSpec::find_service(const std::string &name) const {
    for (const auto &s : services)
        if (s.name == name)
            return &s;
    return nullptr;
}

const Action *DcdsSpec::find_action(const std::string &name) const {
    for (const auto &a : actions)
        if (a.name == name)
            return &a;
    return nullptr;
}

namespace {

void check_query(const DcdsSpec &spec, const Query &q, const std::string &where) {
    if (q.kind == Query::Kind::Atom) {
        const Relation *r = spec.find_relation(q.relation);
        if (!r)
            throw DcdsError(where + ": unknown relation " + q.relation);
        if (r->arity != q.args.size())
            throw DcdsError(where + ": arity mismatch for " + q.relation);
    }
    for (const auto &op : q.operands)
        check_query(spec, op, where);
}

} // namespace

void check_spec(const DcdsSpec &spec) {
    std::set<std::string> names;
    for (const auto &r : spec.schema) {
        if (!names.insert(r.name).second)
            throw DcdsError("duplicate relation " + r.name);
        for (auto k : r.key)
            if (k >= r.arity)
                throw DcdsError("key position out of range in " + r.name);
    }
    for (const auto &a : spec.actions) {
        std::set<std::string> params(a.params.begin(), a.params.end());
        for (std::size_t i = 0; i < a.effects.size(); ++i) {
            const Effect &e = a.effects[i];
            const std::string where = "action " + a.name + " effect " + std::to_string(i + 1);
            check_query(spec, e.query, where);
            std::set<std::string> bound = free_vars(e.query);
            bound.insert(params.begin(), params.end());
            auto check_var = [&](const std::string &v) {
                if (!bound.count(v))
                    throw DcdsError(where + ": unbound variable " + v);
            };
            for (const auto &f : e.facts) {
                const Relation *r = spec.find_relation(f.relation);
                if (!r)
                    throw DcdsError(where + ": head relation " + f.relation + " not in schema");
                if (r->arity != f.args.size())
                    throw DcdsError(where + ": arity mismatch for " + f.relation);
                for (const auto &t : f.args) {
                    if (t.kind == ETerm::Kind::Var)
                        check_var(t.text);
                    if (t.kind == ETerm::Kind::Call) {
                        const Service *s = spec.find_service(t.text);
                        if (!s || s->arity != t.args.size())
                            throw DcdsError(where + ": undeclared service " + t.text);
                        for (const auto &x : t.args)
                            if (x.kind == QTerm::Kind::Var)
                                check_var(x.text);
                    }
                }
            }
        }
    }
    for (const auto &r : spec.rules) {
        const Action *a = spec.find_action(r.action);
        if (!a)
            throw DcdsError("rule " + r.name + " names unknown action " + r.action);
        check_query(spec, r.condition, "rule " + r.name);
        std::set<std::string> params(a->params.begin(), a->params.end());
        if (free_vars(r.condition) != params)
            throw DcdsError("rule " + r.name + ": query variables differ from the parameters of " + a->name);
    }
    for (const auto &[rel, ts] : spec.initial.relations) {
        const Relation *r = spec.find_relation(rel);
        if (!r)
            throw DcdsError("initial database uses unknown relation " + rel);
        for (const auto &t : ts)
            if (t.size() != r->arity)
                throw DcdsError("initial database: arity mismatch for " + rel);
    }
}

std::vector<std::string> key_violations(const DcdsSpec &spec, const DbInstance &db) {
    std::vector<std::string> out;
    for (const auto &r : spec.schema) {
        if (r.key.empty())
            continue;
        std::map<Tuple, const Tuple *> seen;
        for (const auto &t : db.tuples(r.name)) {
            Tuple k;
            for (auto p : r.key)
                k.push_back(t[p]);
            auto [it, fresh] = seen.emplace(k, &t);
            if (!fresh) {
                std::string msg = "key violation in " + r.name + " on (";
                for (std::size_t i = 0; i < k.size(); ++i)
                    msg += (i ? ", " : "") + k[i];
                out.push_back(msg + ")");
            }
        }
    }
    return out;
}

namespace {

const Value *lookup(const Binding &b, const QTerm &t) {
    if (t.kind == QTerm::Kind::Const)
        return &t.text;
    auto it = b.find(t.text);
    return it == b.end() ? nullptr : &it->second;
}

bool all_bound(const Query &q, const Binding &b) {
    for (const auto &v : free_vars(q))
        if (!b.count(v))
            return false;
    return true;
}

// Whether a conjunct can be evaluated now without enumerating the domain.
bool ready(const Query &q, const Binding &b) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Eq:
        return lookup(b, q.args[0]) || lookup(b, q.args[1]);
    case K::Neq:
    case K::Lt:
    case K::Not:
        return all_bound(q, b);
    default:
        return true;
    }
}

void eval(const Query &q, const DbInstance &db, const Binding &b, std::vector<Binding> &out);

void eval_conj(const std::vector<const Query *> &rest, const DbInstance &db, const Binding &b,
               std::vector<Binding> &out) {
    if (rest.empty()) {
        out.push_back(b);
        return;
    }
    // Filters first, then equality bindings, atoms, and other generators.
    auto choose = [&](auto &&pred) {
        for (std::size_t i = 0; i < rest.size(); ++i)
            if (pred(*rest[i]))
                return i;
        return rest.size();
    };
    std::size_t pick = choose([&](const Query &q) { return all_bound(q, b); });
    if (pick == rest.size())
        pick = choose([&](const Query &q) { return q.kind == Query::Kind::Eq && ready(q, b); });
    if (pick == rest.size())
        pick = choose([&](const Query &q) { return q.kind == Query::Kind::Atom; });
    if (pick == rest.size())
        pick = choose([&](const Query &q) { return ready(q, b); });
    if (pick == rest.size())
        throw DcdsError("unsafe query: no evaluable conjunct among " + to_string(*rest.front()));
    std::vector<const Query *> others;
    for (std::size_t i = 0; i < rest.size(); ++i)
        if (i != pick)
            others.push_back(rest[i]);
    std::vector<Binding> partial;
    eval(*rest[pick], db, b, partial);
    for (const auto &p : partial)
        eval_conj(others, db, p, out);
}

void eval(const Query &q, const DbInstance &db, const Binding &b, std::vector<Binding> &out) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::True:
        out.push_back(b);
        return;
    case K::False:
        return;
    case K::Atom:
        for (const auto &t : db.tuples(q.relation)) {
            if (t.size() != q.args.size())
                continue;
            Binding nb = b;
            bool ok = true;
            for (std::size_t i = 0; i < t.size() && ok; ++i) {
                const QTerm &a = q.args[i];
                if (const Value *v = lookup(nb, a))
                    ok = *v == t[i];
                else
                    nb[a.text] = t[i];
            }
            if (ok)
                out.push_back(std::move(nb));
        }
        return;
    case K::Eq: {
        const Value *l = lookup(b, q.args[0]);
        const Value *r = lookup(b, q.args[1]);
        if (l && r) {
            if (*l == *r)
                out.push_back(b);
        } else if (l || r) {
            Binding nb = b;
            nb[(l ? q.args[1] : q.args[0]).text] = l ? *l : *r;
            out.push_back(std::move(nb));
        } else {
            throw DcdsError("unsafe query: " + to_string(q));
        }
        return;
    }
    case K::Neq:
    case K::Lt: {
        const Value *l = lookup(b, q.args[0]);
        const Value *r = lookup(b, q.args[1]);
        if (!l || !r)
            throw DcdsError("unsafe query: " + to_string(q));
        if (q.kind == K::Neq ? *l != *r : *l < *r)
            out.push_back(b);
        return;
    }
    case K::And: {
        std::vector<const Query *> ops;
        for (const auto &op : q.operands)
            ops.push_back(&op);
        eval_conj(ops, db, b, out);
        return;
    }
    case K::Or: {
        std::set<Binding> seen;
        auto fv = free_vars(q);
        for (const auto &op : q.operands) {
            std::vector<Binding> part;
            eval(op, db, b, part);
            for (auto &p : part) {
                for (const auto &v : fv)
                    if (!p.count(v))
                        throw DcdsError("unsafe disjunction: " + to_string(q));
                if (seen.insert(p).second)
                    out.push_back(std::move(p));
            }
        }
        return;
    }
    case K::Not: {
        if (!all_bound(q, b))
            throw DcdsError("unsafe negation: " + to_string(q));
        std::vector<Binding> part;
        eval(q.operands.front(), db, b, part);
        if (part.empty())
            out.push_back(b);
        return;
    }
    case K::Exists: {
        Binding inner = b;
        for (const auto &v : q.vars)
            inner.erase(v);
        std::vector<Binding> part;
        eval(q.operands.front(), db, inner, part);
        std::set<Binding> seen;
        for (auto &p : part) {
            Binding nb = b;
            for (auto &[k, v] : p)
                if (std::find(q.vars.begin(), q.vars.end(), k) == q.vars.end())
                    nb.emplace(k, v);
            if (seen.insert(nb).second)
                out.push_back(std::move(nb));
        }
        return;
    }
    }
}

} // namespace

std::vector<Binding> answers(const Query &q, const DbInstance &db, const Binding &given) {
    std::vector<Binding> raw;
    eval(q, db, given, raw);
    std::set<Binding> uniq(raw.begin(), raw.end());
    return {uniq.begin(), uniq.end()};
}

std::vector<EnabledAction> enabled_actions(const DcdsSpec &spec, const DbInstance &db) {
    std::vector<EnabledAction> out;
    for (std::size_t i = 0; i < spec.rules.size(); ++i)
        for (auto &b : answers(spec.rules[i].condition, db))
            out.push_back({i, spec.rules[i].action, std::move(b)});
    return out;
}

std::string to_string(const ServiceCall &c) {
    std::string out = c.service + "(";
    for (std::size_t i = 0; i < c.args.size(); ++i)
        out += (i ? ", " : "") + c.args[i];
    return out + ")";
}

std::vector<ServiceAssignment> DomainOracle::assignments(const DcdsSpec &, const DbInstance &,
                                                         const std::vector<ServiceCall> &calls) const {
    std::vector<ServiceAssignment> out{{}};
    for (const auto &c : calls) {
        std::vector<ServiceAssignment> next;
        for (const auto &partial : out)
            for (const auto &v : domain_) {
                auto a = partial;
                a[c] = v;
                next.push_back(std::move(a));
            }
        out = std::move(next);
    }
    return out;
}

RandomOracle::RandomOracle(std::uint32_t seed, std::vector<Value> domain) : rng_(seed), domain_(std::move(domain)) {}

std::vector<ServiceAssignment> RandomOracle::assignments(const DcdsSpec &spec, const DbInstance &db,
                                                         const std::vector<ServiceCall> &calls) const {
    ServiceAssignment a;
    auto adom = db.active_domain();
    for (const auto &c : calls) {
        const Service *s = spec.find_service(c.service);
        if (s && s->sort == ServiceSort::NewId) {
            Value v;
            do
                v = "n" + std::to_string(++counter_);
            while (adom.count(v));
            a[c] = v;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, domain_.size() - 1);
            a[c] = domain_[pick(rng_)];
        }
    }
    return {a};
}

ApplyResult apply_action(const DcdsSpec &spec, const DbInstance &db, const std::string &action,
                         const Binding &binding, const ServiceOracle &oracle) {
    const Action *a = spec.find_action(action);
    if (!a)
        throw DcdsError("unknown action " + action);
    for (const auto &p : a->params)
        if (!binding.count(p))
            throw DcdsError("action " + action + ": parameter " + p + " unbound");

    // Ground heads; service calls become indices into `calls`.
    struct Slot {
        Value value;
        int call = -1;
    };
    std::vector<std::pair<std::string, std::vector<Slot>>> heads;
    std::vector<ServiceCall> calls;
    std::map<ServiceCall, int> call_index;
    for (const auto &e : a->effects) {
        for (const auto &ans : answers(e.query, db, binding)) {
            for (const auto &f : e.facts) {
                std::vector<Slot> args;
                for (const auto &t : f.args) {
                    switch (t.kind) {
                    case ETerm::Kind::Var:
                        args.push_back({ans.at(t.text)});
                        break;
                    case ETerm::Kind::Const:
                        args.push_back({t.text});
                        break;
                    case ETerm::Kind::Call: {
                        ServiceCall c{t.text, {}};
                        for (const auto &x : t.args)
                            c.args.push_back(x.kind == QTerm::Kind::Var ? ans.at(x.text) : x.text);
                        auto [it, fresh] = call_index.emplace(c, static_cast<int>(calls.size()));
                        if (fresh)
                            calls.push_back(c);
                        args.push_back({{}, it->second});
                        break;
                    }
                    }
                }
                heads.emplace_back(f.relation, std::move(args));
            }
        }
    }

    std::vector<ServiceAssignment> assigns =
        calls.empty() ? std::vector<ServiceAssignment>{{}} : oracle.assignments(spec, db, calls);
    ApplyResult out;
    std::set<DbInstance> seen;
    for (const auto &asg : assigns) {
        DbInstance next;
        for (const auto &[rel, args] : heads) {
            Tuple t;
            t.reserve(args.size());
            for (const auto &s : args)
                t.push_back(s.call < 0 ? s.value : asg.at(calls[static_cast<std::size_t>(s.call)]));
            next.insert(rel, std::move(t));
        }
        auto bad = key_violations(spec, next);
        if (!bad.empty()) {
            out.discarded.insert(out.discarded.end(), bad.begin(), bad.end());
            continue;
        }
        if (seen.insert(next).second)
            out.successors.push_back(std::move(next));
    }
    return out;
}

} // namespace gsmv
