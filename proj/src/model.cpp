#include "gsmv/model.hpp"

#include "gsmv/names.hpp"

#include <algorithm>
#include <functional>

namespace gsmv {

bool is_internal(TriggerKind kind) {
    return kind != TriggerKind::External && kind != TriggerKind::TaskReturn;
}

std::vector<std::string> Task::payload_slots() const {
    std::vector<std::string> slots;
    for (const auto &a : assignments)
        if (a.source.kind == Source::Kind::Payload)
            slots.push_back(a.source.name);
    return slots;
}

const Attribute *ArtifactType::find_attribute(const std::string &attr) const {
    for (const auto &a : attributes)
        if (a.name == attr)
            return &a;
    return nullptr;
}

const Milestone *ArtifactType::find_milestone(const std::string &m) const {
    for (const auto &x : milestones)
        if (x.name == m)
            return &x;
    return nullptr;
}

const Task *ArtifactType::find_task(const std::string &t) const {
    for (const auto &x : tasks)
        if (x.name == t)
            return &x;
    return nullptr;
}

const Stage *ArtifactType::find_stage(const std::string &s) const {
    for (const auto &info : flatten_stages(*this))
        if (info.stage->name == s)
            return info.stage;
    return nullptr;
}

const ArtifactType *GsmModel::find_type(const std::string &t) const {
    for (const auto &a : artifact_types)
        if (a.name == t)
            return &a;
    return nullptr;
}

const ArtifactType &GsmModel::type(const std::string &t) const {
    if (const auto *a = find_type(t))
        return *a;
    throw std::out_of_range("unknown artifact type '" + t + "'");
}

const EventType *GsmModel::find_event(const std::string &artifact, const std::string &event) const {
    for (const auto &e : event_types)
        if (e.artifact == artifact && e.name == event)
            return &e;
    return nullptr;
}

std::vector<const ArtifactType *> GsmModel::children_of(const std::string &t) const {
    std::vector<const ArtifactType *> out;
    for (const auto &a : artifact_types)
        if (a.parent && *a.parent == t)
            out.push_back(&a);
    return out;
}

namespace {

void collect_source_literals(const Source &s, std::set<Value> &out) {
    if (s.kind == Source::Kind::Literal)
        out.insert(s.name);
    ConditionRefs refs;
    collect_refs(s.filter, refs);
    out.insert(refs.literals.begin(), refs.literals.end());
}

void collect_sentry_literals(const Sentry &s, std::set<Value> &out) {
    if (!s.condition)
        return;
    ConditionRefs refs;
    collect_refs(*s.condition, refs);
    out.insert(refs.literals.begin(), refs.literals.end());
}

} // namespace

std::set<Value> GsmModel::constants() const {
    std::set<Value> out{kNull};
    for (const auto &a : artifact_types) {
        for (const auto &info : flatten_stages(a))
            for (const auto &g : info.stage->guards)
                collect_sentry_literals(g, out);
        for (const auto &m : a.milestones) {
            collect_sentry_literals(m.achieving, out);
            for (const auto &s : m.invalidating)
                collect_sentry_literals(s, out);
        }
        for (const auto &t : a.tasks)
            for (const auto &as : t.assignments) {
                collect_source_literals(as.source, out);
                ConditionRefs refs;
                collect_refs(as.target.filter, refs);
                out.insert(refs.literals.begin(), refs.literals.end());
            }
    }
    return out;
}

std::vector<StageInfo> flatten_stages(const ArtifactType &type) {
    std::vector<StageInfo> out;
    std::function<void(const Stage &, const Stage *, int)> walk = [&](const Stage &s, const Stage *parent,
                                                                      int depth) {
        out.push_back({&s, parent, depth});
        for (const auto &sub : s.substages)
            walk(sub, &s, depth + 1);
    };
    for (const auto &s : type.stages)
        walk(s, nullptr, 0);
    return out;
}

const Stage *stage_of_milestone(const ArtifactType &type, const std::string &milestone) {
    for (const auto &info : flatten_stages(type))
        for (const auto &m : info.stage->milestones)
            if (m == milestone)
                return info.stage;
    return nullptr;
}

const Stage *stage_of_task(const ArtifactType &type, const std::string &task) {
    for (const auto &info : flatten_stages(type))
        if (info.stage->task && *info.stage->task == task)
            return info.stage;
    return nullptr;
}

std::string to_string(const EventInstance &e) {
    std::string out = quote_name(e.type) + " target=" + e.target;
    if (!e.payload.empty()) {
        out += " {";
        bool first = true;
        for (const auto &[k, v] : e.payload) {
            if (!first)
                out += ",";
            first = false;
            out += k + "=" + v;
        }
        out += "}";
    }
    return out;
}

InstanceState blank_instance(const ArtifactType &type) {
    InstanceState s;
    s.type = type.name;
    for (const auto &a : type.attributes)
        s.attrs[a.name] = kNull;
    for (const auto &info : flatten_stages(type))
        s.stages[info.stage->name] = false;
    for (const auto &m : type.milestones)
        s.milestones[m.name] = false;
    return s;
}

bool has_creation_tasks(const GsmModel &model) {
    for (const auto &a : model.artifact_types)
        for (const auto &t : a.tasks)
            if (t.kind == TaskKind::Create)
                return true;
    return false;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
public:
    explicit Validator(const GsmModel &m) : model_(m) {}

    void run() {
        check_types();
        for (const auto &a : model_.artifact_types)
            check_artifact(a);
        check_events();
        check_snapshot();
    }

private:
    [[noreturn]] void fail(const std::string &artifact, const std::string &element,
                           const std::string &msg) const {
        throw ValidationError(artifact, element, msg);
    }

    void check_types() {
        std::set<std::string> seen;
        for (const auto &a : model_.artifact_types) {
            if (!seen.insert(a.name).second)
                fail(a.name, a.name, "duplicate artifact type '" + a.name + "'");
        }
        for (const auto &a : model_.artifact_types) {
            if (!a.parent)
                continue;
            if (!model_.find_type(*a.parent))
                fail(a.name, a.name, "unknown parent artifact type '" + *a.parent + "'");
            if (a.has_lifecycle())
                fail(a.name, a.name,
                     "child artifact type '" + a.name + "' must have an empty lifecycle");
            const Attribute *p = a.find_attribute(kParentAttribute);
            if (!p || p->sort != Sort::IdRef)
                fail(a.name, a.name, "child artifact type '" + a.name + "' lacks id-ref attribute 'parent'");
            // Parent chain must be acyclic.
            std::set<std::string> chain{a.name};
            const ArtifactType *cur = &a;
            while (cur->parent) {
                if (!chain.insert(*cur->parent).second)
                    fail(a.name, a.name, "cyclic artifact hierarchy through '" + a.name + "'");
                cur = model_.find_type(*cur->parent);
                if (!cur)
                    break;
            }
        }
    }

    void check_artifact(const ArtifactType &a) {
        std::set<std::string> attrs;
        for (const auto &at : a.attributes)
            if (!attrs.insert(at.name).second)
                fail(a.name, at.name, "duplicate attribute '" + at.name + "' in '" + a.name + "'");

        // Stages, milestones, tasks and events share one namespace per artifact.
        std::set<std::string> names;
        auto claim = [&](const std::string &n, const char *what) {
            if (!names.insert(n).second)
                fail(a.name, n, std::string("duplicate name '") + n + "' (" + what + ") in '" + a.name + "'");
        };
        auto stages = flatten_stages(a);
        for (const auto &info : stages)
            claim(info.stage->name, "stage");
        for (const auto &m : a.milestones)
            claim(m.name, "milestone");
        for (const auto &t : a.tasks)
            claim(t.name, "task");
        for (const auto &e : a.events)
            claim(e, "event");

        std::map<std::string, int> milestone_owner;
        std::map<std::string, int> task_owner;
        for (const auto &info : stages) {
            const Stage &s = *info.stage;
            if (s.guards.empty())
                fail(a.name, s.name, "stage '" + s.name + "' has no guard");
            for (const auto &g : s.guards)
                check_sentry(a, s.name, g);
            for (const auto &m : s.milestones) {
                if (!a.find_milestone(m))
                    fail(a.name, s.name, "stage '" + s.name + "' lists unknown milestone '" + m + "'");
                ++milestone_owner[m];
            }
            if (s.task) {
                if (!s.atomic())
                    fail(a.name, s.name, "composite stage '" + s.name + "' carries a task");
                if (!a.find_task(*s.task))
                    fail(a.name, s.name, "stage '" + s.name + "' references unknown task '" + *s.task + "'");
                ++task_owner[*s.task];
            }
        }
        for (const auto &m : a.milestones) {
            if (milestone_owner[m.name] != 1)
                fail(a.name, m.name, "milestone '" + m.name + "' must belong to exactly one stage");
            check_sentry(a, m.name, m.achieving);
            for (const auto &s : m.invalidating)
                check_sentry(a, m.name, s);
        }
        for (const auto &t : a.tasks) {
            if (task_owner[t.name] != 1)
                fail(a.name, t.name, "task '" + t.name + "' must belong to exactly one atomic stage");
            check_task(a, t);
        }
    }

    void check_sentry(const ArtifactType &a, const std::string &element, const Sentry &s) {
        if (!s.on && !s.condition)
            fail(a.name, element, "empty sentry in '" + element + "'");
        if (s.on) {
            const auto &n = s.on->name;
            bool ok = false;
            switch (s.on->kind) {
            case TriggerKind::External:
                ok = std::find(a.events.begin(), a.events.end(), n) != a.events.end();
                break;
            case TriggerKind::TaskReturn:
                ok = a.find_task(n) != nullptr;
                break;
            case TriggerKind::StageOpened:
            case TriggerKind::StageClosed:
                ok = a.find_stage(n) != nullptr;
                break;
            case TriggerKind::MilestoneAchieved:
            case TriggerKind::MilestoneInvalidated:
                ok = a.find_milestone(n) != nullptr;
                break;
            }
            if (!ok)
                fail(a.name, element, "sentry in '" + element + "' references unknown event '" + n + "'");
        }
        if (s.condition)
            check_condition(a, element, *s.condition, nullptr, false);
    }

    void check_term(const ArtifactType &a, const std::string &element, const Term &t,
                    const ArtifactType *child, bool allow_new) {
        switch (t.kind) {
        case Term::Kind::Attribute:
            if (!a.find_attribute(t.name))
                fail(a.name, element, "unknown attribute '" + t.name + "' in '" + element + "'");
            break;
        case Term::Kind::Child:
            if (!child)
                fail(a.name, element, "'it' used outside a child scope in '" + element + "'");
            break;
        case Term::Kind::ChildAttribute:
            if (!child)
                fail(a.name, element, "'it." + t.name + "' used outside a child scope in '" + element + "'");
            if (!child->find_attribute(t.name))
                fail(a.name, element,
                     "unknown attribute '" + t.name + "' of '" + child->name + "' in '" + element + "'");
            break;
        case Term::Kind::NewId:
            if (!allow_new)
                fail(a.name, element, "'new' used outside a create task in '" + element + "'");
            break;
        default:
            break;
        }
    }

    const ArtifactType &child_type(const ArtifactType &a, const std::string &element, const std::string &t) {
        const ArtifactType *c = model_.find_type(t);
        if (!c || !c->parent || *c->parent != a.name)
            fail(a.name, element, "'" + t + "' is not a child artifact type of '" + a.name + "'");
        return *c;
    }

    void check_condition(const ArtifactType &a, const std::string &element, const Condition &c,
                         const ArtifactType *child, bool allow_new) {
        using K = Condition::Kind;
        switch (c.kind) {
        case K::Eq:
        case K::Neq:
            check_term(a, element, c.lhs, child, allow_new);
            check_term(a, element, c.rhs, child, allow_new);
            return;
        case K::Achieved:
            if (!a.find_milestone(c.name))
                fail(a.name, element, "unknown milestone '" + c.name + "' in '" + element + "'");
            return;
        case K::Open:
            if (!a.find_stage(c.name))
                fail(a.name, element, "unknown stage '" + c.name + "' in '" + element + "'");
            return;
        case K::ExistsChild: {
            if (child)
                fail(a.name, element, "nested child quantification in '" + element + "'");
            const ArtifactType &ct = child_type(a, element, c.name);
            for (const auto &op : c.operands)
                check_condition(a, element, op, &ct, allow_new);
            return;
        }
        default:
            for (const auto &op : c.operands)
                check_condition(a, element, op, child, allow_new);
        }
    }

    void check_task(const ArtifactType &a, const Task &t) {
        const ArtifactType *target = nullptr;
        if (t.kind != TaskKind::Update)
            target = &child_type(a, t.name, t.target_type);
        if (t.kind == TaskKind::Delete && !t.assignments.empty())
            fail(a.name, t.name, "delete task '" + t.name + "' cannot assign attributes");
        if (t.kind == TaskKind::Delete && !model_.children_of(t.target_type).empty())
            fail(a.name, t.name, "delete task '" + t.name + "' targets a type with nested types");
        std::set<std::string> slots;
        std::set<std::string> lookups;
        bool create = t.kind == TaskKind::Create;
        for (const auto &as : t.assignments) {
            const auto &tg = as.target;
            switch (tg.kind) {
            case Target::Kind::Attribute:
                if (!a.find_attribute(tg.name))
                    fail(a.name, t.name, "task '" + t.name + "' assigns unknown attribute '" + tg.name + "'");
                break;
            case Target::Kind::NewAttribute:
                if (!create)
                    fail(a.name, t.name, "'new." + tg.name + "' used outside a create task");
                if (!target->find_attribute(tg.name) || tg.name == kParentAttribute)
                    fail(a.name, t.name, "task '" + t.name + "' assigns unknown attribute 'new." + tg.name + "'");
                break;
            case Target::Kind::ChildAttribute: {
                const ArtifactType &ct = child_type(a, t.name, tg.child_type);
                if (!ct.find_attribute(tg.name) || tg.name == kParentAttribute)
                    fail(a.name, t.name, "task '" + t.name + "' assigns unknown attribute '" + tg.name + "'");
                check_condition(a, t.name, tg.filter, &ct, false);
                lookups.insert(tg.child_type + "[" + to_string(tg.filter) + "]");
                break;
            }
            }
            const auto &src = as.source;
            switch (src.kind) {
            case Source::Kind::Payload:
                if (!slots.insert(src.name).second || src.name == kNewIdSlot)
                    fail(a.name, t.name, "duplicate payload slot '" + src.name + "' in task '" + t.name + "'");
                break;
            case Source::Kind::Attribute:
                if (!a.find_attribute(src.name))
                    fail(a.name, t.name, "task '" + t.name + "' reads unknown attribute '" + src.name + "'");
                break;
            case Source::Kind::NewId:
                if (!create)
                    fail(a.name, t.name, "'new' used outside a create task");
                break;
            case Source::Kind::ChildLookup: {
                const ArtifactType &ct = child_type(a, t.name, src.child_type);
                if (!ct.find_attribute(src.name))
                    fail(a.name, t.name, "task '" + t.name + "' reads unknown attribute '" + src.name + "'");
                check_condition(a, t.name, src.filter, &ct, false);
                lookups.insert(src.child_type + "[" + to_string(src.filter) + "]");
                break;
            }
            default:
                break;
            }
        }
        if (lookups.size() > 1)
            fail(a.name, t.name, "task '" + t.name + "' uses more than one child lookup");
    }

    void check_events() {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto &e : model_.event_types) {
            const ArtifactType *a = model_.find_type(e.artifact);
            if (!a)
                fail(e.artifact, e.name, "event '" + e.name + "' addressed to unknown type");
            if (!seen.insert({e.artifact, e.name}).second)
                fail(e.artifact, e.name, "duplicate event type '" + e.name + "'");
            if (e.kind == EventKind::OneWay) {
                if (std::find(a->events.begin(), a->events.end(), e.name) == a->events.end())
                    fail(a->name, e.name, "event '" + e.name + "' not declared in '" + a->name + "'");
                for (const auto &p : e.payload)
                    if (!a->find_attribute(p))
                        fail(a->name, e.name, "event '" + e.name + "' carries unknown attribute '" + p + "'");
            } else if (!a->find_task(e.name)) {
                fail(a->name, e.name, "service return '" + e.name + "' has no task");
            }
        }
        for (const auto &a : model_.artifact_types)
            for (const auto &e : a.events)
                if (!model_.find_event(a.name, e))
                    fail(a.name, e, "event '" + e + "' lacks an event type");
    }

    void check_snapshot() {
        const Snapshot &s = model_.initial_snapshot;
        for (const auto &[id, inst] : s.instances) {
            const ArtifactType *a = model_.find_type(inst.type);
            if (!a)
                fail(inst.type, id, "instance '" + id + "' has unknown type '" + inst.type + "'");
            InstanceState blank = blank_instance(*a);
            auto same_keys = [](const auto &x, const auto &y) {
                if (x.size() != y.size())
                    return false;
                for (const auto &[k, v] : x)
                    if (!y.count(k))
                        return false;
                return true;
            };
            if (!same_keys(inst.attrs, blank.attrs) || !same_keys(inst.stages, blank.stages) ||
                !same_keys(inst.milestones, blank.milestones))
                fail(a->name, id, "instance '" + id + "' does not match the signature of '" + a->name + "'");
            if (a->parent) {
                auto it = s.instances.find(inst.attrs.at(kParentAttribute));
                if (it == s.instances.end() || it->second.type != *a->parent)
                    fail(a->name, id, "instance '" + id + "' has no valid parent");
            }
        }
        for (const auto &[type, ids] : s.free_containers) {
            if (!model_.find_type(type))
                fail(type, type, "containers for unknown type '" + type + "'");
            for (const auto &id : ids)
                if (s.instances.count(id))
                    fail(type, id, "container '" + id + "' is both free and occupied");
        }
    }

    const GsmModel &model_;
};

} // namespace

void validate(const GsmModel &model) {
    Validator(model).run();
}

} // namespace gsmv
