#include "gsmv/snapshot.hpp"

#include <sstream>

namespace gsmv {

namespace {

std::string status_bits(const GsmModel &model, const InstanceState &inst) {
    std::string bits;
    const ArtifactType &a = model.type(inst.type);
    for (const auto &info : flatten_stages(a))
        bits += inst.stages.at(info.stage->name) ? '1' : '0';
    bits += '/';
    for (const auto &m : a.milestones)
        bits += inst.milestones.at(m.name) ? '1' : '0';
    return bits;
}

} // namespace

std::vector<Fact> snapshot_facts(const GsmModel &model, const Snapshot &snap) {
    std::vector<Fact> facts;
    for (const auto &[id, inst] : snap.instances) {
        const ArtifactType &a = model.type(inst.type);
        Fact f{inst.type + "|" + status_bits(model, inst), {id}};
        for (const auto &at : a.attributes)
            f.args.push_back(inst.attrs.at(at.name));
        facts.push_back(std::move(f));
    }
    for (const auto &[type, ids] : snap.free_containers)
        for (const auto &id : ids)
            facts.push_back({"free|" + type, {id}});
    return facts;
}

Snapshot rename(const Snapshot &snap, const std::map<Value, Value> &renaming) {
    auto map = [&](const Value &v) {
        auto it = renaming.find(v);
        return it == renaming.end() ? v : it->second;
    };
    Snapshot out;
    out.instance_bounded = snap.instance_bounded;
    for (const auto &[id, inst] : snap.instances) {
        InstanceState copy = inst;
        for (auto &[k, v] : copy.attrs)
            v = map(v);
        out.instances.emplace(map(id), std::move(copy));
    }
    for (const auto &[type, ids] : snap.free_containers)
        for (const auto &id : ids)
            out.free_containers[type].insert(map(id));
    return out;
}

CanonicalSnapshot canonicalize_snapshot(const GsmModel &model, const Snapshot &snap) {
    auto constants = model.constants();
    auto facts = snapshot_facts(model, snap);
    CanonicalForm form = canonicalize(facts, [&](const Value &v) { return constants.count(v) > 0; });
    CanonicalSnapshot out;
    out.snapshot = rename(snap, form.renaming);
    for (const auto &f : form.facts) {
        out.key += to_string(f);
        out.key += ';';
    }
    out.renaming = std::move(form.renaming);
    return out;
}

std::size_t snapshot_size(const GsmModel &model, const Snapshot &snap) {
    auto width = [&](const std::string &type) {
        const ArtifactType &a = model.type(type);
        return 1 + a.attributes.size() + flatten_stages(a).size() + a.milestones.size();
    };
    std::size_t size = 0;
    for (const auto &[id, inst] : snap.instances)
        size += width(inst.type);
    for (const auto &[type, ids] : snap.free_containers)
        size += ids.size() * width(type);
    return size;
}

std::uint64_t snapshot_hash(const GsmModel &model, const Snapshot &snap) {
    // FNV-1a over the canonical key.
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : canonicalize_snapshot(model, snap).key) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::set<Value> active_domain(const Snapshot &snap) {
    std::set<Value> out;
    for (const auto &[id, inst] : snap.instances) {
        out.insert(id);
        for (const auto &[k, v] : inst.attrs)
            if (v != kNull)
                out.insert(v);
    }
    for (const auto &[type, ids] : snap.free_containers)
        out.insert(ids.begin(), ids.end());
    return out;
}

std::set<Value> scalar_domain(const GsmModel &model, const Snapshot &snap) {
    std::set<Value> out;
    for (const auto &[id, inst] : snap.instances) {
        const ArtifactType &a = model.type(inst.type);
        for (const auto &at : a.attributes) {
            if (at.sort != Sort::Scalar)
                continue;
            const Value &v = inst.attrs.at(at.name);
            if (v != kNull)
                out.insert(v);
        }
    }
    return out;
}

std::vector<Value> children_of(const Snapshot &snap, const Value &parent, const std::string &type) {
    std::vector<Value> out;
    for (const auto &[id, inst] : snap.instances) {
        if (inst.type != type)
            continue;
        auto it = inst.attrs.find(kParentAttribute);
        if (it != inst.attrs.end() && it->second == parent)
            out.push_back(id);
    }
    return out;
}

std::string describe(const Snapshot &snap) {
    std::ostringstream os;
    for (const auto &[id, inst] : snap.instances) {
        os << id << ":" << inst.type << " {";
        bool first = true;
        for (const auto &[k, v] : inst.attrs) {
            os << (first ? "" : ", ") << k << "=" << v;
            first = false;
        }
        os << "}";
        for (const auto &[k, v] : inst.stages)
            if (v)
                os << " [open " << k << "]";
        for (const auto &[k, v] : inst.milestones)
            if (v)
                os << " [achieved " << k << "]";
        os << "\n";
    }
    for (const auto &[type, ids] : snap.free_containers)
        for (const auto &id : ids)
            os << id << ":" << type << " (free)\n";
    return os.str();
}

Value evaluate(const Term &term, const ConditionScope &scope) {
    switch (term.kind) {
    case Term::Kind::Null:
        return kNull;
    case Term::Kind::Literal:
        return term.name;
    case Term::Kind::Attribute:
        return scope.snap.instances.at(scope.self).attrs.at(term.name);
    case Term::Kind::Self:
        return scope.self;
    case Term::Kind::Child:
        return scope.child ? *scope.child : kNull;
    case Term::Kind::ChildAttribute:
        return scope.child ? scope.snap.instances.at(*scope.child).attrs.at(term.name) : kNull;
    case Term::Kind::NewId:
        return scope.new_id ? *scope.new_id : kNull;
    }
    return kNull;
}

bool evaluate(const Condition &cond, const ConditionScope &scope) {
    using K = Condition::Kind;
    switch (cond.kind) {
    case K::True:
        return true;
    case K::False:
        return false;
    case K::And:
        for (const auto &op : cond.operands)
            if (!evaluate(op, scope))
                return false;
        return true;
    case K::Or:
        for (const auto &op : cond.operands)
            if (evaluate(op, scope))
                return true;
        return false;
    case K::Not:
        return !evaluate(cond.operands.front(), scope);
    case K::Eq:
        return evaluate(cond.lhs, scope) == evaluate(cond.rhs, scope);
    case K::Neq:
        return evaluate(cond.lhs, scope) != evaluate(cond.rhs, scope);
    case K::Achieved:
        return scope.snap.instances.at(scope.self).milestones.at(cond.name);
    case K::Open:
        return scope.snap.instances.at(scope.self).stages.at(cond.name);
    case K::ExistsChild:
        for (const auto &c : children_of(scope.snap, scope.self, cond.name)) {
            ConditionScope inner{scope.model, scope.snap, scope.self, &c, scope.new_id};
            if (cond.operands.empty() || evaluate(cond.operands.front(), inner))
                return true;
        }
        return false;
    }
    return false;
}

} // namespace gsmv
