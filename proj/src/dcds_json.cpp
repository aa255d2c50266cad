#include "gsmv/dcds.hpp"

namespace gsmv {

using nlohmann::json;

namespace {

const char *kind_name(Query::Kind k) {
    switch (k) {
    case Query::Kind::True:
        return "true";
    case Query::Kind::False:
        return "false";
    case Query::Kind::Atom:
        return "atom";
    case Query::Kind::Eq:
        return "eq";
    case Query::Kind::Neq:
        return "neq";
    case Query::Kind::Lt:
        return "lt";
    case Query::Kind::And:
        return "and";
    case Query::Kind::Or:
        return "or";
    case Query::Kind::Not:
        return "not";
    case Query::Kind::Exists:
        return "exists";
    }
    return "?";
}

Query::Kind kind_from(const std::string &s) {
    static const std::map<std::string, Query::Kind> table{
        {"true", Query::Kind::True}, {"false", Query::Kind::False}, {"atom", Query::Kind::Atom},
        {"eq", Query::Kind::Eq},     {"neq", Query::Kind::Neq},     {"lt", Query::Kind::Lt},
        {"and", Query::Kind::And},   {"or", Query::Kind::Or},       {"not", Query::Kind::Not},
        {"exists", Query::Kind::Exists}};
    auto it = table.find(s);
    if (it == table.end())
        throw DcdsError("unknown query kind '" + s + "'");
    return it->second;
}

json term_json(const QTerm &t) {
    return t.kind == QTerm::Kind::Var ? json{{"var", t.text}} : json{{"const", t.text}};
}

QTerm term_from(const json &j) {
    if (j.contains("var"))
        return QTerm::var(j.at("var").get<std::string>());
    return QTerm::constant(j.at("const").get<std::string>());
}

json query_json(const Query &q) {
    json j{{"kind", kind_name(q.kind)}};
    if (q.kind == Query::Kind::Atom)
        j["relation"] = q.relation;
    if (!q.args.empty()) {
        j["args"] = json::array();
        for (const auto &t : q.args)
            j["args"].push_back(term_json(t));
    }
    if (q.kind == Query::Kind::Exists)
        j["vars"] = q.vars;
    if (!q.operands.empty()) {
        j["operands"] = json::array();
        for (const auto &op : q.operands)
            j["operands"].push_back(query_json(op));
    }
    return j;
}

Query query_from(const json &j) {
    Query q;
    q.kind = kind_from(j.at("kind").get<std::string>());
    q.relation = j.value("relation", "");
    if (j.contains("args"))
        for (const auto &t : j.at("args"))
            q.args.push_back(term_from(t));
    if (j.contains("vars"))
        q.vars = j.at("vars").get<std::vector<std::string>>();
    if (j.contains("operands"))
        for (const auto &op : j.at("operands"))
            q.operands.push_back(query_from(op));
    return q;
}

json eterm_json(const ETerm &t) {
    switch (t.kind) {
    case ETerm::Kind::Var:
        return {{"var", t.text}};
    case ETerm::Kind::Const:
        return {{"const", t.text}};
    case ETerm::Kind::Call: {
        json args = json::array();
        for (const auto &a : t.args)
            args.push_back(term_json(a));
        return {{"call", t.text}, {"args", args}};
    }
    }
    return {};
}

ETerm eterm_from(const json &j) {
    if (j.contains("call")) {
        std::vector<QTerm> args;
        for (const auto &a : j.at("args"))
            args.push_back(term_from(a));
        return ETerm::call(j.at("call").get<std::string>(), std::move(args));
    }
    if (j.contains("var"))
        return ETerm::var(j.at("var").get<std::string>());
    return ETerm::constant(j.at("const").get<std::string>());
}

const char *sort_name(ServiceSort s) {
    switch (s) {
    case ServiceSort::Scalar:
        return "scalar";
    case ServiceSort::Ref:
        return "ref";
    case ServiceSort::NewId:
        return "new-id";
    }
    return "?";
}

ServiceSort sort_from(const std::string &s) {
    if (s == "scalar")
        return ServiceSort::Scalar;
    if (s == "ref")
        return ServiceSort::Ref;
    if (s == "new-id")
        return ServiceSort::NewId;
    throw DcdsError("unknown service sort '" + s + "'");
}

} // namespace

json db_to_json(const DbInstance &db) {
    json j = json::object();
    for (const auto &[rel, ts] : db.relations) {
        json rows = json::array();
        for (const auto &t : ts)
            rows.push_back(t);
        j[rel] = rows;
    }
    return j;
}

json spec_to_json(const DcdsSpec &spec) {
    json j;
    j["schema"] = json::array();
    for (const auto &r : spec.schema)
        j["schema"].push_back({{"name", r.name}, {"arity", r.arity}, {"key", r.key}});
    j["services"] = json::array();
    for (const auto &s : spec.services)
        j["services"].push_back({{"name", s.name}, {"arity", s.arity}, {"sort", sort_name(s.sort)}});
    j["actions"] = json::array();
    for (const auto &a : spec.actions) {
        json effects = json::array();
        for (const auto &e : a.effects) {
            json facts = json::array();
            for (const auto &f : e.facts) {
                json args = json::array();
                for (const auto &t : f.args)
                    args.push_back(eterm_json(t));
                facts.push_back({{"relation", f.relation}, {"args", args}});
            }
            effects.push_back({{"query", query_json(e.query)}, {"facts", facts}});
        }
        j["actions"].push_back({{"name", a.name}, {"params", a.params}, {"effects", effects}});
    }
    j["rules"] = json::array();
    for (const auto &r : spec.rules)
        j["rules"].push_back({{"name", r.name}, {"condition", query_json(r.condition)}, {"action", r.action}});
    j["initial"] = db_to_json(spec.initial);
    return j;
}

DcdsSpec spec_from_json(const json &doc) {
    DcdsSpec spec;
    for (const auto &r : doc.at("schema"))
        spec.schema.push_back({r.at("name").get<std::string>(), r.at("arity").get<std::size_t>(),
                               r.value("key", std::vector<std::size_t>{})});
    if (doc.contains("services"))
        for (const auto &s : doc.at("services"))
            spec.services.push_back({s.at("name").get<std::string>(), s.at("arity").get<std::size_t>(),
                                     sort_from(s.value("sort", "scalar"))});
    for (const auto &a : doc.at("actions")) {
        Action act;
        act.name = a.at("name").get<std::string>();
        act.params = a.value("params", std::vector<std::string>{});
        for (const auto &e : a.at("effects")) {
            Effect eff;
            eff.query = query_from(e.at("query"));
            for (const auto &f : e.at("facts")) {
                EffectFact fact;
                fact.relation = f.at("relation").get<std::string>();
                for (const auto &t : f.at("args"))
                    fact.args.push_back(eterm_from(t));
                eff.facts.push_back(std::move(fact));
            }
            act.effects.push_back(std::move(eff));
        }
        spec.actions.push_back(std::move(act));
    }
    for (const auto &r : doc.at("rules"))
        spec.rules.push_back(
            {r.at("name").get<std::string>(), query_from(r.at("condition")), r.at("action").get<std::string>()});
    if (doc.contains("initial"))
        for (const auto &[rel, rows] : doc.at("initial").items())
            for (const auto &row : rows)
                spec.initial.insert(rel, row.get<Tuple>());
    check_spec(spec);
    return spec;
}

} // namespace gsmv
