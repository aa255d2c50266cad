#include "gsmv/translate.hpp"

#include "gsmv/names.hpp"
#include "gsmv/snapshot.hpp"

#include <algorithm>
#include <sstream>

namespace gsmv {

namespace {

const Value kTrue = "true";
const Value kFalse = "false";
const Value kZero = "0";
const Value kOne = "1";

QTerm var(const std::string &v) {
    return QTerm::var(v);
}
QTerm cst(const std::string &c) {
    return QTerm::constant(c);
}
const Value &flag(bool b) {
    return b ? kTrue : kFalse;
}

ETerm head_term(const QTerm &t) {
    return t.kind == QTerm::Kind::Var ? ETerm::var(t.text) : ETerm::constant(t.text);
}

// Variables naming one R_att row: column i (i >= 2) is "<prefix>_<i>".
struct Row {
    const AttLayout *layout = nullptr;
    std::string prefix;
    QTerm id;
    QTerm fr;
    std::map<std::size_t, QTerm> fixed;  // columns pinned to a term

    QTerm col(std::size_t i) const {
        if (i == 0)
            return id;
        if (i == 1)
            return fr;
        auto it = fixed.find(i);
        return it != fixed.end() ? it->second : var(prefix + "_" + std::to_string(i));
    }
    Query atom() const {
        std::vector<QTerm> args;
        for (std::size_t i = 0; i < layout->arity(); ++i)
            args.push_back(col(i));
        return Query::atom(layout->relation, std::move(args));
    }
    // Variables introduced by atom() (for quantification).
    std::vector<std::string> vars() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < layout->arity(); ++i) {
            QTerm t = col(i);
            if (t.kind == QTerm::Kind::Var && std::find(out.begin(), out.end(), t.text) == out.end())
                out.push_back(t.text);
        }
        return out;
    }
    std::vector<ETerm> head(const std::map<std::size_t, ETerm> &over = {}) const {
        std::vector<ETerm> out;
        for (std::size_t i = 0; i < layout->arity(); ++i) {
            auto it = over.find(i);
            out.push_back(it != over.end() ? it->second : head_term(col(i)));
        }
        return out;
    }
};

Query exists_except(const Query &body, const std::set<std::string> &keep) {
    std::vector<std::string> vs;
    for (const auto &v : free_vars(body))
        if (!keep.count(v))
            vs.push_back(v);
    return Query::exists(std::move(vs), body);
}

class Translator {
public:
    Translator(const CompiledModel &cm, const std::optional<ContainerConfig> &containers, ExecGuard guard)
        : cm_(cm) {
        map_.compiled = std::make_shared<CompiledModel>(cm);
        map_.containers = containers;
        map_.exec_guard = guard;
    }

    Translation run() {
        layouts();
        constants();
        for (const auto &a : model().artifact_types)
            for (const auto &e : model().event_types)
                if (e.artifact == a.name)
                    reception(a, e);
        for (std::size_t k = 0; k < cm_.rules.size(); ++k)
            micro_step(k);
        for (const auto &a : model().artifact_types)
            if (a.has_lifecycle())
                finalization(a);
        Snapshot s0 = model().initial_snapshot;
        if (map_.containers)
            s0 = apply_containers(model(), s0, *map_.containers);
        spec_.initial = encode_snapshot(map_, s0);
        check_spec(spec_);
        return {std::move(spec_), std::move(map_)};
    }

private:
    const GsmModel &model() const { return cm_.model; }
    bool bounded() const { return map_.containers.has_value(); }

    void relation(const std::string &name, std::size_t arity, std::vector<std::size_t> key, bool aux) {
        spec_.schema.push_back({name, arity, std::move(key)});
        if (aux)
            map_.auxiliary.insert(name);
    }

    void layouts() {
        for (const auto &a : model().artifact_types) {
            AttLayout l;
            l.relation = "Att_" + a.name;
            for (const auto &at : a.attributes)
                l.attributes.push_back(at.name);
            for (const auto &info : flatten_stages(a))
                l.stages.push_back(info.stage->name);
            for (const auto &m : a.milestones)
                l.milestones.push_back(m.name);
            relation(l.relation, l.arity(), {0}, false);
            map_.att[a.name] = l;
        }
        relation(map_.block, 2, {0}, true);
        relation(map_.exec, map_.exec_arity(), {0}, true);
        for (const auto &a : model().artifact_types) {
            if (!a.has_lifecycle())
                continue;
            auto add_chg = [&](StatusRef s) {
                std::string name = "Chg_" + a.name + "_" + s.name;
                relation(name, 2, {0}, true);
                map_.chg[a.name][s] = name;
            };
            for (const auto &s : map_.att[a.name].stages)
                add_chg({StatusRef::Kind::Stage, s});
            for (const auto &m : map_.att[a.name].milestones)
                add_chg({StatusRef::Kind::Milestone, m});
            map_.msg_in[a.name] = "MsgIn_" + a.name;
            map_.srv_in[a.name] = "SrvIn_" + a.name;
            map_.out[a.name] = "Out_" + a.name;
            relation(map_.msg_in[a.name], 2, {0}, true);
            relation(map_.srv_in[a.name], 2, {0}, true);
            relation(map_.out[a.name], 2, {}, true);
        }
    }

    void constants() {
        map_.constants = model().constants();
        map_.constants.insert({kTrue, kFalse, kZero, kOne, kNull});
        for (const auto &e : model().event_types)
            map_.constants.insert(e.name);
    }

    Row row(const std::string &type, const std::string &prefix, QTerm id, QTerm fr) const {
        return Row{&map_.att.at(type), prefix, std::move(id), std::move(fr), {}};
    }

    // -- conditions -------------------------------------------------------

    struct Ctx {
        const ArtifactType *owner;
        const Row *owner_row;
        const ArtifactType *child = nullptr;
        const Row *child_row = nullptr;
    };

    QTerm term(const Term &t, const Ctx &ctx) {
        switch (t.kind) {
        case Term::Kind::Null:
            return cst(kNull);
        case Term::Kind::Literal:
            return cst(t.name);
        case Term::Kind::Attribute:
            return ctx.owner_row->col(ctx.owner_row->layout->attribute_column(t.name));
        case Term::Kind::Self:
            return ctx.owner_row->id;
        case Term::Kind::Child:
            return ctx.child_row->id;
        case Term::Kind::ChildAttribute:
            return ctx.child_row->col(ctx.child_row->layout->attribute_column(t.name));
        case Term::Kind::NewId:
            break;
        }
        throw DcdsError("'new' is not supported inside translated conditions");
    }

    // Child row linked to the owner, optionally filtered (not quantified).
    Query child_match(const std::string &type, const Row &child, const Condition *filter, const Ctx &ctx) {
        std::vector<Query> parts{child.atom()};
        if (filter) {
            Ctx inner = ctx;
            inner.child = &model().type(type);
            inner.child_row = &child;
            parts.push_back(condition(*filter, inner));
        }
        return Query::conj(std::move(parts));
    }

    Row child_row(const std::string &type, const std::string &prefix, QTerm id, const Ctx &ctx) {
        Row r = row(type, prefix, std::move(id), cst(kFalse));
        r.fixed[r.layout->attribute_column(kParentAttribute)] = ctx.owner_row->id;
        return r;
    }

    Query condition(const Condition &c, const Ctx &ctx) {
        using K = Condition::Kind;
        switch (c.kind) {
        case K::True:
            return Query::truth();
        case K::False:
            return Query::falsity();
        case K::And:
        case K::Or: {
            std::vector<Query> ops;
            for (const auto &op : c.operands)
                ops.push_back(condition(op, ctx));
            return c.kind == K::And ? Query::conj(std::move(ops)) : Query::disj(std::move(ops));
        }
        case K::Not:
            return Query::negate(condition(c.operands.front(), ctx));
        case K::Eq:
            return Query::eq(term(c.lhs, ctx), term(c.rhs, ctx));
        case K::Neq:
            return Query::neq(term(c.lhs, ctx), term(c.rhs, ctx));
        case K::Achieved:
            return Query::eq(ctx.owner_row->col(ctx.owner_row->layout->status_column(
                                 {StatusRef::Kind::Milestone, c.name})),
                             cst(kTrue));
        case K::Open:
            return Query::eq(
                ctx.owner_row->col(ctx.owner_row->layout->status_column({StatusRef::Kind::Stage, c.name})),
                cst(kTrue));
        case K::ExistsChild: {
            std::string prefix = "q" + std::to_string(fresh_++);
            Row r = child_row(c.name, prefix, var(prefix + "_id"), ctx);
            Query body = child_match(c.name, r, c.operands.empty() ? nullptr : &c.operands.front(), ctx);
            return Query::exists(r.vars(), body);
        }
        }
        return Query::falsity();
    }

    // -- copy effects -----------------------------------------------------

    // R(x0..xn) and extra(x0) ~> R(x0..xn)
    Effect copy(const std::string &rel, std::size_t arity, const std::vector<Query> &extra = {}) {
        std::vector<QTerm> args;
        std::vector<ETerm> head;
        for (std::size_t i = 0; i < arity; ++i) {
            args.push_back(var("x" + std::to_string(i)));
            head.push_back(ETerm::var("x" + std::to_string(i)));
        }
        std::vector<Query> parts{Query::atom(rel, args)};
        parts.insert(parts.end(), extra.begin(), extra.end());
        return {Query::conj(std::move(parts)), {{rel, std::move(head)}}};
    }

    std::size_t arity_of(const std::string &rel) const { return spec_.find_relation(rel)->arity; }

    void copy_aux_pools(Action &act, const std::string &except_type = {}) {
        for (const auto &[type, m] : map_.chg)
            for (const auto &[s, rel] : m)
                act.effects.push_back(type == except_type ? copy(rel, 2, {Query::neq(var("x0"), var("id"))})
                                                          : copy(rel, 2));
        for (const auto *pools : {&map_.msg_in, &map_.srv_in, &map_.out})
            for (const auto &[type, rel] : *pools)
                act.effects.push_back(type == except_type ? copy(rel, 2, {Query::neq(var("x0"), var("id"))})
                                                          : copy(rel, 2));
    }

    std::vector<ETerm> exec_row(const ETerm &id, const std::vector<Value> &flags) {
        std::vector<ETerm> out{id};
        for (const auto &f : flags)
            out.push_back(ETerm::constant(f));
        return out;
    }

    // -- reception ---------------------------------------------------------

    void reception(const ArtifactType &a, const EventType &e) {
        const std::string name = "receive:" + a.name + ":" + e.name;
        const Task *task = e.kind == EventKind::ServiceReturn ? a.find_task(e.name) : nullptr;
        const bool create = task && task->kind == TaskKind::Create;
        const bool del = task && task->kind == TaskKind::Delete;
        const std::string ctype = task ? task->target_type : std::string();

        Action act;
        act.name = name;
        act.params = {"id"};
        if (del)
            act.params.push_back("d");

        Row owner = row(a.name, "o", var("id"), cst(kFalse));
        Ctx ctx{&a, &owner};

        // Lookup child (at most one selector per task).
        std::string ltype;
        const Condition *lfilter = nullptr;
        bool lwrites = false;
        if (task)
            for (const auto &as : task->assignments) {
                if (as.source.kind == Source::Kind::ChildLookup) {
                    ltype = as.source.child_type;
                    lfilter = &as.source.filter;
                }
                if (as.target.kind == Target::Kind::ChildAttribute) {
                    ltype = as.target.child_type;
                    lfilter = &as.target.filter;
                    lwrites = true;
                }
            }
        auto lookup_match = [&](const std::string &prefix, QTerm id) {
            Row r = child_row(ltype, prefix, std::move(id), ctx);
            Query q = child_match(ltype, r, lfilter, ctx);
            return std::pair{r, q};
        };

        // Least free container of the created type.
        auto least_free = [&](QTerm x) {
            Row r = row(ctype, "f", x, cst(kTrue));
            Row z = row(ctype, "g", var("z_id"), cst(kTrue));
            Query smaller = Query::exists(z.vars(), Query::conj({z.atom(), Query::lt(var("z_id"), x)}));
            return Query::conj({r.atom(), Query::negate(smaller)});
        };

        // Condition.
        std::vector<Query> cond{owner.atom(),
                                Query::negate(Query::exists({"y"}, Query::atom(map_.block, {var("y"), cst(kTrue)})))};
        if (task) {
            const Stage *st = stage_of_task(a, task->name);
            cond.push_back(
                Query::eq(owner.col(owner.layout->status_column({StatusRef::Kind::Stage, st->name})), cst(kTrue)));
        }
        if (create && bounded()) {
            Row r = row(ctype, "f", var("f_id"), cst(kTrue));
            cond.push_back(Query::exists(r.vars(), r.atom()));
        }
        if (del) {
            Row r = child_row(ctype, "d", var("d"), ctx);
            cond.push_back(r.atom());
        }
        if (!ltype.empty()) {
            auto [r1, q1] = lookup_match("l1", var("l1_id"));
            auto [r2, q2] = lookup_match("l2", var("l2_id"));
            auto vs = r1.vars();
            auto vs2 = r2.vars();
            vs.insert(vs.end(), vs2.begin(), vs2.end());
            cond.push_back(Query::negate(
                Query::exists(vs, Query::conj({q1, q2, Query::neq(var("l1_id"), var("l2_id"))}))));
        }
        std::set<std::string> params(act.params.begin(), act.params.end());
        CaRule rule{name, exists_except(Query::conj(cond), params), name};

        // Service calls for payload slots.
        auto call = [&](const std::string &slot, ServiceSort sort) {
            std::string svc = "in:" + a.name + ":" + e.name + ":" + slot;
            if (!spec_.find_service(svc)) {
                spec_.services.push_back({svc, 1, sort});
                map_.services[svc] = {a.name, e.name, slot};
            }
            return ETerm::call(svc, {var("id")});
        };
        auto attr_sort = [&](const ArtifactType &t, const std::string &attr) {
            return t.find_attribute(attr)->sort == Sort::IdRef ? ServiceSort::Ref : ServiceSort::Scalar;
        };

        // Copy the untouched R_att rows.
        for (const auto &t : model().artifact_types) {
            const AttLayout &l = map_.att.at(t.name);
            std::vector<Query> extra;
            if (t.name == a.name)
                extra.push_back(Query::neq(var("x0"), var("id")));
            if (del && t.name == ctype)
                extra.push_back(Query::neq(var("x0"), var("d")));
            if (lwrites && t.name == ltype) {
                Row r = child_row(ltype, "e", var("x0"), ctx);
                Query m = child_match(ltype, r, lfilter, ctx);
                std::vector<std::string> vs;
                for (const auto &v : r.vars())
                    if (v != "x0")
                        vs.push_back(v);
                // The owner row supplies the filter's owner attributes.
                auto ovs = owner.vars();
                vs.insert(vs.end(), ovs.begin(), ovs.end());
                vs.erase(std::remove(vs.begin(), vs.end(), "id"), vs.end());
                extra.push_back(Query::negate(Query::exists(vs, Query::conj({owner.atom(), m}))));
            }
            if (create && bounded() && t.name == ctype) {
                Query lf = least_free(var("x0"));
                std::vector<std::string> vs;
                for (const auto &v : free_vars(lf))
                    if (v != "x0")
                        vs.push_back(v);
                extra.push_back(Query::negate(Query::exists(vs, lf)));
            }
            act.effects.push_back(copy(l.relation, l.arity(), extra));
        }

        // The owner row, the looked-up child and the created instance.
        auto emit = [&](bool matched) {
            std::vector<Query> q{owner.atom()};
            Row lrow;
            if (!ltype.empty()) {
                auto [r, m] = lookup_match("c", var("c_id"));
                lrow = r;
                q.push_back(matched ? m : Query::negate(Query::exists(r.vars(), m)));
            }
            ETerm new_id;
            if (create) {
                if (bounded()) {
                    q.push_back(least_free(var("n_id")));
                    new_id = ETerm::var("n_id");
                } else {
                    new_id = call(kNewIdSlot, ServiceSort::NewId);
                }
            }
            std::map<std::size_t, ETerm> owner_over;
            std::map<std::size_t, ETerm> child_over;
            std::map<std::size_t, ETerm> new_over;
            if (e.kind == EventKind::OneWay) {
                for (const auto &p : e.payload)
                    owner_over[owner.layout->attribute_column(p)] = call(p, attr_sort(a, p));
            } else {
                for (const auto &as : task->assignments) {
                    const Source &s = as.source;
                    const Target &t = as.target;
                    ETerm v;
                    switch (s.kind) {
                    case Source::Kind::Payload: {
                        ServiceSort sort = ServiceSort::Scalar;
                        if (t.kind == Target::Kind::Attribute)
                            sort = attr_sort(a, t.name);
                        else if (t.kind == Target::Kind::NewAttribute)
                            sort = attr_sort(model().type(ctype), t.name);
                        else
                            sort = attr_sort(model().type(t.child_type), t.name);
                        v = call(s.name, sort);
                        break;
                    }
                    case Source::Kind::Null:
                        v = ETerm::constant(kNull);
                        break;
                    case Source::Kind::Literal:
                        v = ETerm::constant(s.name);
                        break;
                    case Source::Kind::Attribute:
                        v = head_term(owner.col(owner.layout->attribute_column(s.name)));
                        break;
                    case Source::Kind::NewId:
                        v = new_id;
                        break;
                    case Source::Kind::ChildLookup:
                        v = matched ? head_term(lrow.col(lrow.layout->attribute_column(s.name)))
                                    : ETerm::constant(kNull);
                        break;
                    }
                    switch (t.kind) {
                    case Target::Kind::Attribute:
                        owner_over[owner.layout->attribute_column(t.name)] = v;
                        break;
                    case Target::Kind::NewAttribute:
                        new_over[map_.att.at(ctype).attribute_column(t.name)] = v;
                        break;
                    case Target::Kind::ChildAttribute:
                        child_over[lrow.layout->attribute_column(t.name)] = v;
                        break;
                    }
                }
            }
            Effect eff;
            eff.query = Query::conj(q);
            eff.facts.push_back({owner.layout->relation, owner.head(owner_over)});
            if (matched && lwrites)
                eff.facts.push_back({lrow.layout->relation, lrow.head(child_over)});
            if (create) {
                const AttLayout &cl = map_.att.at(ctype);
                std::vector<ETerm> h{new_id, ETerm::constant(kFalse)};
                for (std::size_t i = 2; i < cl.arity(); ++i) {
                    auto it = new_over.find(i);
                    if (it != new_over.end())
                        h.push_back(it->second);
                    else if (i == cl.attribute_column(kParentAttribute))
                        h.push_back(ETerm::var("id"));
                    else if (i < 2 + cl.attributes.size())
                        h.push_back(ETerm::constant(kNull));
                    else
                        h.push_back(ETerm::constant(kFalse));
                }
                eff.facts.push_back({cl.relation, std::move(h)});
                if (!bounded()) {
                    eff.facts.push_back({map_.block, {new_id, ETerm::constant(kFalse)}});
                    eff.facts.push_back(
                        {map_.exec, exec_row(new_id, std::vector<Value>(cm_.rules.size(), kOne))});
                }
            }
            act.effects.push_back(std::move(eff));
        };
        emit(true);
        if (!ltype.empty())
            emit(false);

        if (del && bounded()) {
            const AttLayout &cl = map_.att.at(ctype);
            Row r = row(ctype, "d", var("d"), cst(kFalse));
            std::vector<ETerm> h{ETerm::var("d"), ETerm::constant(kTrue)};
            for (std::size_t i = 2; i < cl.arity(); ++i)
                h.push_back(ETerm::constant(i < 2 + cl.attributes.size() ? kNull : kFalse));
            act.effects.push_back({r.atom(), {{cl.relation, std::move(h)}}});
        }

        // Blocking, eligibility flags, pools.
        std::vector<Query> not_owner{Query::neq(var("x0"), var("id"))};
        if (del && !bounded())
            not_owner.push_back(Query::neq(var("x0"), var("d")));
        act.effects.push_back(copy(map_.block, 2, not_owner));
        act.effects.push_back({Query::truth(), {{map_.block, {ETerm::var("id"), ETerm::constant(kTrue)}}}});
        act.effects.push_back(copy(map_.exec, map_.exec_arity(), not_owner));
        std::vector<bool> cand = candidate_rules(cm_.rules, a.name, e.name);
        std::vector<Value> flags;
        for (bool c : cand)
            flags.push_back(c ? kZero : kOne);
        act.effects.push_back({Query::truth(), {{map_.exec, exec_row(ETerm::var("id"), flags)}}});
        copy_aux_pools(act);
        if (a.has_lifecycle()) {
            const std::string &pool = task ? map_.srv_in.at(a.name) : map_.msg_in.at(a.name);
            act.effects.push_back({Query::truth(), {{pool, {ETerm::var("id"), ETerm::constant(e.name)}}}});
        }

        spec_.actions.push_back(std::move(act));
        spec_.rules.push_back(std::move(rule));
        map_.reception[name] = {a.name, e.name};
    }

    // -- micro-steps ------------------------------------------------------

    Query changed(const std::string &type, const StatusRef &s, const QTerm &id) {
        return Query::exists({"chg_b"}, Query::atom(map_.chg.at(type).at(s), {id, var("chg_b")}));
    }

    Query antecedent(const PacRule &r, const Row &owner, const Ctx &ctx) {
        std::vector<Query> parts;
        auto status_is = [&](const StatusLiteral &lit) {
            return Query::eq(owner.col(owner.layout->status_column(lit.status)), cst(flag(lit.value)));
        };
        for (const auto &lit : r.initial_status)
            parts.push_back(Query::disj(
                {Query::conj({status_is(lit), Query::negate(changed(r.owner, lit.status, owner.id))}),
                 Query::atom(map_.chg.at(r.owner).at(lit.status), {owner.id, cst(flag(!lit.value))})}));
        if (r.sets)
            parts.push_back(Query::negate(changed(r.owner, r.sets->status, owner.id)));
        for (const auto &lit : r.requires_status)
            parts.push_back(status_is(lit));
        if (r.requires_event)
            parts.push_back(Query::atom(map_.chg.at(r.owner).at(r.requires_event->status),
                                        {owner.id, cst(flag(r.requires_event->value))}));
        parts.push_back(condition(r.condition, ctx));
        return Query::conj(std::move(parts));
    }

    std::vector<QTerm> exec_pattern(const std::map<std::size_t, Value> &fixed) {
        std::vector<QTerm> args{var("id")};
        for (std::size_t i = 0; i < cm_.rules.size(); ++i) {
            auto it = fixed.find(i);
            args.push_back(it != fixed.end() ? cst(it->second) : var("e" + std::to_string(i)));
        }
        return args;
    }

    void micro_step(std::size_t k) {
        const PacRule &r = cm_.rules[k];
        const ArtifactType &a = model().type(r.owner);
        const std::string name = "step:" + r.id;
        Row owner = row(a.name, "o", var("id"), cst(kFalse));
        Ctx ctx{&a, &owner};

        std::map<std::size_t, Value> fixed{{k, kZero}};
        if (map_.exec_guard == ExecGuard::Dependencies) {
            for (std::size_t p : cm_.order.predecessors[k])
                fixed[p] = kOne;
        } else {
            for (std::size_t p : cm_.order.order) {
                if (p == k)
                    break;
                fixed[p] = kOne;
            }
        }
        Query cond = Query::conj({owner.atom(), Query::atom(map_.block, {var("id"), cst(kTrue)}),
                                  Query::atom(map_.exec, exec_pattern(fixed))});
        CaRule rule{name, exists_except(cond, {"id"}), name};

        Action act;
        act.name = name;
        act.params = {"id"};
        // x_k := 1
        {
            auto pat = exec_pattern({});
            std::vector<ETerm> h;
            for (std::size_t i = 0; i < pat.size(); ++i)
                h.push_back(i == k + 1 ? ETerm::constant(kOne) : head_term(pat[i]));
            act.effects.push_back({Query::atom(map_.exec, pat), {{map_.exec, std::move(h)}}});
        }
        act.effects.push_back(copy(map_.exec, map_.exec_arity(), {Query::neq(var("x0"), var("id"))}));
        act.effects.push_back(copy(map_.block, 2));
        for (const auto &t : model().artifact_types) {
            const AttLayout &l = map_.att.at(t.name);
            act.effects.push_back(t.name == a.name ? copy(l.relation, l.arity(), {Query::neq(var("x0"), var("id"))})
                                                   : copy(l.relation, l.arity()));
        }
        Query ant = antecedent(r, owner, ctx);
        Effect fire;
        fire.query = Query::conj({owner.atom(), ant});
        if (r.sets) {
            std::size_t col = owner.layout->status_column(r.sets->status);
            fire.facts.push_back({owner.layout->relation, owner.head({{col, ETerm::constant(flag(r.sets->value))}})});
            fire.facts.push_back({map_.chg.at(a.name).at(r.sets->status),
                                  {ETerm::var("id"), ETerm::constant(flag(r.sets->value))}});
        } else {
            fire.facts.push_back({owner.layout->relation, owner.head()});
        }
        if (r.dispatch)
            fire.facts.push_back({map_.out.at(a.name), {ETerm::var("id"), ETerm::constant(*r.dispatch)}});
        act.effects.push_back(std::move(fire));
        act.effects.push_back(
            {Query::conj({owner.atom(), Query::negate(ant)}), {{owner.layout->relation, owner.head()}}});
        copy_aux_pools(act);

        spec_.actions.push_back(std::move(act));
        spec_.rules.push_back(std::move(rule));
        map_.rule_to_ca[r.id] = name;
    }

    // -- finalization -----------------------------------------------------

    void finalization(const ArtifactType &a) {
        const std::string name = "finalize:" + a.name;
        Row owner = row(a.name, "o", var("id"), cst(kFalse));
        std::map<std::size_t, Value> all;
        for (std::size_t i = 0; i < cm_.rules.size(); ++i)
            all[i] = kOne;
        Query cond = Query::conj({owner.atom(), Query::atom(map_.block, {var("id"), cst(kTrue)}),
                                  Query::atom(map_.exec, exec_pattern(all))});
        CaRule rule{name, exists_except(cond, {"id"}), name};
        Action act;
        act.name = name;
        act.params = {"id"};
        act.effects.push_back(copy(map_.block, 2, {Query::neq(var("x0"), var("id"))}));
        act.effects.push_back({Query::truth(), {{map_.block, {ETerm::var("id"), ETerm::constant(kFalse)}}}});
        act.effects.push_back(copy(map_.exec, map_.exec_arity()));
        for (const auto &t : model().artifact_types) {
            const AttLayout &l = map_.att.at(t.name);
            act.effects.push_back(copy(l.relation, l.arity()));
        }
        copy_aux_pools(act, a.name);
        spec_.actions.push_back(std::move(act));
        spec_.rules.push_back(std::move(rule));
        map_.finalization[name] = a.name;
    }

    const CompiledModel &cm_;
    TranslationMap map_;
    DcdsSpec spec_;
    int fresh_ = 0;
};

} // namespace

std::size_t ContainerConfig::n_max() const {
    std::size_t n = 0;
    for (const auto &[t, b] : bounds)
        n += b;
    return n;
}

ContainerConfig parse_container_config(const std::string &text) {
    ContainerConfig c;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("container bound '" + item + "' is not TYPE=N");
        std::string type = item.substr(0, eq);
        std::size_t pos = 0;
        long n = -1;
        try {
            n = std::stol(item.substr(eq + 1), &pos);
        } catch (const std::exception &) {
        }
        if (n < 1 || pos != item.size() - eq - 1)
            throw std::invalid_argument("container bound for " + type + " must be an integer >= 1");
        c.bounds[type] = static_cast<std::size_t>(n);
    }
    return c;
}

Snapshot apply_containers(const GsmModel &model, const Snapshot &snap, const ContainerConfig &config) {
    for (const auto &[t, b] : config.bounds) {
        if (!model.find_type(t))
            throw std::invalid_argument("container bound for unknown type " + t);
        if (b < 1)
            throw std::invalid_argument("container bound for " + t + " must be >= 1");
    }
    Snapshot out = snap;
    out.instance_bounded = true;
    std::set<Value> used = active_domain(snap);
    std::size_t counter = 0;
    for (const auto &a : model.artifact_types) {
        auto it = config.bounds.find(a.name);
        if (it == config.bounds.end())
            throw std::invalid_argument("no container bound for type " + a.name);
        std::size_t occupied = 0;
        for (const auto &[id, inst] : snap.instances)
            occupied += inst.type == a.name;
        std::size_t have = occupied;
        if (auto f = snap.free_containers.find(a.name); f != snap.free_containers.end())
            have += f->second.size();
        if (have > it->second)
            throw std::invalid_argument("initial snapshot holds more than " + std::to_string(it->second) + " " +
                                        a.name + " instances");
        for (std::size_t i = have; i < it->second; ++i) {
            Value id;
            do
                id = "c" + std::to_string(++counter);
            while (used.count(id) || model.constants().count(id));
            used.insert(id);
            out.free_containers[a.name].insert(id);
        }
    }
    return out;
}

std::size_t AttLayout::attribute_column(const std::string &a) const {
    auto it = std::find(attributes.begin(), attributes.end(), a);
    if (it == attributes.end())
        throw std::out_of_range("no attribute " + a + " in " + relation);
    return 2 + static_cast<std::size_t>(it - attributes.begin());
}

std::size_t AttLayout::status_column(const StatusRef &s) const {
    const auto &names = s.kind == StatusRef::Kind::Stage ? stages : milestones;
    auto it = std::find(names.begin(), names.end(), s.name);
    if (it == names.end())
        throw std::out_of_range("no status " + s.name + " in " + relation);
    std::size_t base = 2 + attributes.size() + (s.kind == StatusRef::Kind::Stage ? 0 : stages.size());
    return base + static_cast<std::size_t>(it - names.begin());
}

std::size_t TranslationMap::exec_arity() const {
    return compiled->rules.size() + 1;
}

Translation translate(const CompiledModel &cm, const std::optional<ContainerConfig> &containers, ExecGuard guard) {
    return Translator(cm, containers, guard).run();
}

Translation apply_container_semantics(const DcdsSpec &, const TranslationMap &map, const ContainerConfig &containers) {
    return translate(*map.compiled, containers, map.exec_guard);
}

bool is_unblocked(const TranslationMap &map, const DbInstance &db) {
    for (const auto &t : db.tuples(map.block))
        if (t[1] == kTrue)
            return false;
    return true;
}

Snapshot filter_state(const TranslationMap &map, const DbInstance &db) {
    if (!is_unblocked(map, db))
        throw FilterError("filter_state is defined on unblocked states only");
    Snapshot s;
    s.instance_bounded = map.containers.has_value();
    for (const auto &[type, l] : map.att) {
        for (const auto &t : db.tuples(l.relation)) {
            if (t[1] == kTrue) {
                s.free_containers[type].insert(t[0]);
                continue;
            }
            InstanceState inst;
            inst.type = type;
            std::size_t c = 2;
            for (const auto &a : l.attributes)
                inst.attrs[a] = t[c++];
            for (const auto &st : l.stages)
                inst.stages[st] = t[c++] == kTrue;
            for (const auto &m : l.milestones)
                inst.milestones[m] = t[c++] == kTrue;
            s.instances[t[0]] = std::move(inst);
        }
    }
    return s;
}

DbInstance encode_snapshot(const TranslationMap &map, const Snapshot &snap) {
    DbInstance db;
    const std::size_t c = map.compiled->rules.size();
    auto aux = [&](const Value &id) {
        db.insert(map.block, {id, kFalse});
        Tuple e{id};
        e.resize(c + 1, kOne);
        db.insert(map.exec, std::move(e));
    };
    for (const auto &[id, inst] : snap.instances) {
        const AttLayout &l = map.att.at(inst.type);
        Tuple t{id, kFalse};
        for (const auto &a : l.attributes)
            t.push_back(inst.attrs.at(a));
        for (const auto &st : l.stages)
            t.push_back(flag(inst.stages.at(st)));
        for (const auto &m : l.milestones)
            t.push_back(flag(inst.milestones.at(m)));
        db.insert(l.relation, std::move(t));
        aux(id);
    }
    for (const auto &[type, ids] : snap.free_containers) {
        const AttLayout &l = map.att.at(type);
        for (const auto &id : ids) {
            Tuple t{id, kTrue};
            t.resize(2 + l.attributes.size(), kNull);
            t.resize(l.arity(), kFalse);
            db.insert(l.relation, std::move(t));
            aux(id);
        }
    }
    return db;
}

std::vector<std::string> auxiliary_bound_violations(const TranslationMap &map, const DbInstance &db) {
    std::vector<std::string> out;
    std::size_t instances = 0;
    std::map<Value, std::string> type_of;
    for (const auto &[type, l] : map.att)
        for (const auto &t : db.tuples(l.relation)) {
            ++instances;
            type_of[t[0]] = type;
        }
    if (db.tuples(map.block).size() != instances)
        out.push_back("|R_block| = " + std::to_string(db.tuples(map.block).size()) + " but " +
                      std::to_string(instances) + " instances");
    if (db.tuples(map.exec).size() != instances)
        out.push_back("|R_exec| = " + std::to_string(db.tuples(map.exec).size()) + " but " +
                      std::to_string(instances) + " instances");
    auto per_instance = [&](const std::string &rel) {
        std::map<Value, std::size_t> n;
        for (const auto &t : db.tuples(rel))
            ++n[t[0]];
        return n;
    };
    for (const auto *pools : {&map.msg_in, &map.srv_in})
        for (const auto &[type, rel] : *pools)
            for (const auto &[id, n] : per_instance(rel))
                if (n > 1)
                    out.push_back(rel + " holds " + std::to_string(n) + " tuples for " + id);
    for (const auto &[type, rel] : map.out) {
        std::size_t atomic = 0;
        for (const auto &info : flatten_stages(map.compiled->model.type(type)))
            atomic += info.stage->atomic();
        for (const auto &[id, n] : per_instance(rel))
            if (n > atomic)
                out.push_back(rel + " holds " + std::to_string(n) + " tuples for " + id + " (> " +
                              std::to_string(atomic) + " atomic stages)");
    }
    if (is_unblocked(map, db))
        for (const auto &rel : map.auxiliary)
            if (rel != map.block && rel != map.exec && !db.tuples(rel).empty())
                out.push_back(rel + " is not empty in an unblocked state");
    return out;
}

std::string mapping_report(const Translation &t) {
    std::ostringstream os;
    const auto &cm = *t.map.compiled;
    os << "relations: " << t.spec.schema.size() << " (auxiliary " << t.map.auxiliary.size() << ")\n";
    os << "R_exec arity: " << t.map.exec_arity() << "\n";
    if (t.map.containers)
        os << "containers: N_max = " << t.map.containers->n_max() << "\n";
    os << "\nPAC rule -> CA rule\n";
    for (const auto &r : cm.rules)
        os << "  " << r.id << " (" << template_name(r.kind) << " " << quote_name(r.construct) << ") -> "
           << t.map.rule_to_ca.at(r.id) << "\n";
    os << "\nreception rules\n";
    for (const auto &[ca, ev] : t.map.reception)
        os << "  " << ca << "\n";
    os << "\nfinalization rules\n";
    for (const auto &[ca, a] : t.map.finalization)
        os << "  " << ca << "\n";
    os << "\nCA rules\n";
    for (const auto &r : t.spec.rules) {
        os << "  " << r.name << ": " << to_string(r.condition) << "\n";
        const Action *a = t.spec.find_action(r.action);
        for (const auto &e : a->effects) {
            os << "    " << to_string(e.query) << " ~> ";
            for (std::size_t i = 0; i < e.facts.size(); ++i) {
                os << (i ? ", " : "") << e.facts[i].relation << "(";
                for (std::size_t j = 0; j < e.facts[i].args.size(); ++j) {
                    const ETerm &x = e.facts[i].args[j];
                    os << (j ? ", " : "");
                    if (x.kind == ETerm::Kind::Var)
                        os << x.text;
                    else if (x.kind == ETerm::Kind::Const)
                        os << "'" << x.text << "'";
                    else
                        os << x.text << "(...)";
                }
                os << ")";
            }
            os << "\n";
        }
    }
    return os.str();
}

} // namespace gsmv
