#include "gsmv/engine.hpp"

#include "gsmv/names.hpp"
#include "gsmv/snapshot.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace gsmv {

CompiledModel compile(GsmModel model) {
    CompiledModel cm;
    cm.rules = derive_pac_rules(model);
    cm.order = stratify(cm.rules);
    cm.model = std::move(model);
    return cm;
}

std::vector<std::string> payload_slots(const GsmModel &model, const EventType &type, const Snapshot &snap) {
    std::vector<std::string> slots = type.payload;
    if (type.kind == EventKind::ServiceReturn) {
        const Task *t = model.type(type.artifact).find_task(type.name);
        if (t->kind == TaskKind::Delete || (t->kind == TaskKind::Create && !snap.instance_bounded))
            slots.push_back(kNewIdSlot);
    }
    return slots;
}

namespace {

struct Lookup {
    const std::string *type = nullptr;
    const Condition *filter = nullptr;
};

Lookup find_lookup(const Task &t) {
    for (const auto &as : t.assignments) {
        if (as.source.kind == Source::Kind::ChildLookup)
            return {&as.source.child_type, &as.source.filter};
        if (as.target.kind == Target::Kind::ChildAttribute)
            return {&as.target.child_type, &as.target.filter};
    }
    return {};
}

// Everything a task return needs, resolved against the pre-snapshot.
struct Resolved {
    std::optional<Value> new_id;
    std::optional<Value> child;  // matched lookup child, if any
    std::optional<std::string> error;
};

Resolved resolve(const GsmModel &model, const Snapshot &snap, const Value &self, const Task &task,
                 const EventInstance &e) {
    Resolved r;
    if (task.kind == TaskKind::Create) {
        if (snap.instance_bounded) {
            auto it = snap.free_containers.find(task.target_type);
            if (it == snap.free_containers.end() || it->second.empty()) {
                r.error = "no free " + task.target_type + " container";
                return r;
            }
            r.new_id = *it->second.begin();
        } else {
            const Value &id = e.payload.at(kNewIdSlot);
            if (id == kNull || active_domain(snap).count(id) || model.constants().count(id)) {
                r.error = "new instance id '" + id + "' is not fresh";
                return r;
            }
            r.new_id = id;
        }
    }
    if (task.kind == TaskKind::Delete) {
        const Value &id = e.payload.at(kNewIdSlot);
        auto kids = children_of(snap, self, task.target_type);
        if (std::find(kids.begin(), kids.end(), id) == kids.end()) {
            r.error = "'" + id + "' is not a " + task.target_type + " child of '" + self + "'";
            return r;
        }
    }
    Lookup lk = find_lookup(task);
    if (lk.type) {
        const Value *nid = r.new_id ? &*r.new_id : nullptr;
        std::vector<Value> matches;
        for (const auto &c : children_of(snap, self, *lk.type)) {
            ConditionScope scope{model, snap, self, &c, nid};
            if (evaluate(*lk.filter, scope))
                matches.push_back(c);
        }
        if (matches.size() > 1) {
            r.error = "child selector " + *lk.type + "[" + to_string(*lk.filter) + "] is ambiguous";
            return r;
        }
        if (!matches.empty())
            r.child = matches.front();
    }
    return r;
}

void remove_instance(const GsmModel &model, Snapshot &snap, const Value &id) {
    auto it = snap.instances.find(id);
    if (it == snap.instances.end())
        return;
    const std::string type = it->second.type;
    for (const auto *child : model.children_of(type))
        for (const auto &c : children_of(snap, id, child->name))
            remove_instance(model, snap, c);
    snap.instances.erase(id);
    if (snap.instance_bounded)
        snap.free_containers[type].insert(id);
}

Snapshot incorporate(const GsmModel &model, const Snapshot &snap, const EventInstance &e, const EventType &et,
                     const Resolved &res) {
    Snapshot out = snap;
    InstanceState &self = out.instances.at(e.target);
    if (et.kind == EventKind::OneWay) {
        for (const auto &attr : et.payload)
            self.attrs[attr] = e.payload.at(attr);
        return out;
    }
    const ArtifactType &owner = model.type(et.artifact);
    const Task &task = *owner.find_task(et.name);
    const Value *nid = res.new_id ? &*res.new_id : nullptr;
    const Value *child = res.child ? &*res.child : nullptr;
    // Sources first, all against the pre-snapshot.
    std::vector<Value> values;
    for (const auto &as : task.assignments) {
        const Source &s = as.source;
        switch (s.kind) {
        case Source::Kind::Payload:
            values.push_back(e.payload.at(s.name));
            break;
        case Source::Kind::Null:
            values.push_back(kNull);
            break;
        case Source::Kind::Literal:
            values.push_back(s.name);
            break;
        case Source::Kind::Attribute:
            values.push_back(snap.instances.at(e.target).attrs.at(s.name));
            break;
        case Source::Kind::NewId:
            values.push_back(nid ? *nid : kNull);
            break;
        case Source::Kind::ChildLookup:
            values.push_back(child ? snap.instances.at(*child).attrs.at(s.name) : kNull);
            break;
        }
    }

    if (task.kind == TaskKind::Create) {
        InstanceState inst = blank_instance(model.type(task.target_type));
        inst.attrs[kParentAttribute] = e.target;
        out.instances[*nid] = std::move(inst);
        if (out.instance_bounded)
            out.free_containers[task.target_type].erase(*nid);
    }
    for (std::size_t i = 0; i < task.assignments.size(); ++i) {
        const Target &t = task.assignments[i].target;
        switch (t.kind) {
        case Target::Kind::Attribute:
            out.instances.at(e.target).attrs[t.name] = values[i];
            break;
        case Target::Kind::NewAttribute:
            out.instances.at(*nid).attrs[t.name] = values[i];
            break;
        case Target::Kind::ChildAttribute:
            if (child)
                out.instances.at(*child).attrs[t.name] = values[i];
            break;
        }
    }
    if (task.kind == TaskKind::Delete)
        remove_instance(model, out, e.payload.at(kNewIdSlot));
    if (out.instance_bounded)
        for (auto it = out.free_containers.begin(); it != out.free_containers.end();)
            it = it->second.empty() ? out.free_containers.erase(it) : std::next(it);
    return out;
}

const EventType *event_type_of(const CompiledModel &cm, const Snapshot &snap, const EventInstance &e,
                               std::string &why) {
    auto it = snap.instances.find(e.target);
    if (it == snap.instances.end()) {
        why = "unknown instance '" + e.target + "'";
        return nullptr;
    }
    const EventType *et = cm.model.find_event(it->second.type, e.type);
    if (!et) {
        why = "event type '" + e.type + "' is not defined for artifact type " + it->second.type;
        return nullptr;
    }
    return et;
}

std::optional<std::string> check_payload(const CompiledModel &cm, const Snapshot &snap, const EventInstance &e,
                                         const EventType &et) {
    auto slots = payload_slots(cm.model, et, snap);
    std::set<std::string> want(slots.begin(), slots.end());
    std::set<std::string> got;
    for (const auto &[k, v] : e.payload)
        got.insert(k);
    if (want != got) {
        std::string msg = "payload of " + e.type + " must carry {";
        bool first = true;
        for (const auto &s : want) {
            msg += (first ? "" : ",") + s;
            first = false;
        }
        return msg + "}";
    }
    return std::nullopt;
}

bool antecedent_holds(const CompiledModel &cm, const PacRule &r, const Snapshot &snap, const Value &self,
                      const std::map<StatusRef, bool> &changed) {
    const InstanceState &inst = snap.instances.at(self);
    auto status = [&](const StatusRef &s) {
        return s.kind == StatusRef::Kind::Stage ? inst.stages.at(s.name) : inst.milestones.at(s.name);
    };
    for (const auto &lit : r.requires_status)
        if (status(lit.status) != lit.value)
            return false;
    if (r.requires_event) {
        auto it = changed.find(r.requires_event->status);
        if (it == changed.end() || it->second != r.requires_event->value)
            return false;
    }
    ConditionScope scope{cm.model, snap, self};
    return evaluate(r.condition, scope);
}

} // namespace

std::optional<std::string> rejection_reason(const CompiledModel &cm, const Snapshot &snap, const EventInstance &e) {
    std::string why;
    const EventType *et = event_type_of(cm, snap, e, why);
    if (!et)
        return why;
    if (auto bad = check_payload(cm, snap, e, *et))
        return bad;
    if (et->kind == EventKind::ServiceReturn) {
        const ArtifactType &a = cm.model.type(et->artifact);
        const Stage *s = stage_of_task(a, et->name);
        if (!snap.instances.at(e.target).stages.at(s->name))
            return "no pending service call " + quote_name(et->name) + " (stage " + quote_name(s->name) +
                   " is closed)";
        Resolved r = resolve(cm.model, snap, e.target, *a.find_task(et->name), e);
        if (r.error)
            return r.error;
    }
    return std::nullopt;
}

std::pair<Snapshot, BStepTrace> b_step(const CompiledModel &cm, const Snapshot &snap, const EventInstance &e,
                                       const BStepOptions &options) {
    if (auto why = rejection_reason(cm, snap, e))
        throw EngineError(*why);
    const EventType &et = *cm.model.find_event(snap.instances.at(e.target).type, e.type);
    Resolved res;
    if (et.kind == EventKind::ServiceReturn)
        res = resolve(cm.model, snap, e.target, *cm.model.type(et.artifact).find_task(et.name), e);

    BStepTrace trace;
    trace.event = e;
    auto hash = [&](const Snapshot &s) { return options.hashes ? snapshot_hash(cm.model, s) : 0; };

    Snapshot cur = incorporate(cm.model, snap, e, et, res);
    trace.steps.push_back({"incorporate", hash(snap), hash(cur), std::nullopt, std::nullopt});

    const std::vector<std::size_t> &order = options.order ? *options.order : cm.order.order;
    const std::string &type = snap.instances.at(e.target).type;
    const std::vector<bool> possible = candidate_rules(cm.rules, type, e.type);
    std::vector<std::size_t> candidates;
    for (std::size_t k : order)
        if (possible[k])
            candidates.push_back(k);
    const InstanceState &initial = snap.instances.at(e.target);
    auto initially = [&](const StatusLiteral &lit) {
        return (lit.status.kind == StatusRef::Kind::Stage ? initial.stages : initial.milestones).at(lit.status.name) ==
               lit.value;
    };
    std::erase_if(candidates, [&](std::size_t k) {
        return !std::all_of(cm.rules[k].initial_status.begin(), cm.rules[k].initial_status.end(), initially);
    });
    std::map<StatusRef, bool> changed;
    std::vector<bool> fired(candidates.size(), false);
    for (;;) {
        bool progress = false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (fired[i])
                continue;
            const PacRule &r = cm.rules[candidates[i]];
            if (r.sets && changed.count(r.sets->status))
                continue;  // toggle-once
            if (!antecedent_holds(cm, r, cur, e.target, changed))
                continue;
            fired[i] = true;
            MicroStep step{r.id, hash(cur), 0, std::nullopt, std::nullopt};
            if (r.sets) {
                InstanceState &inst = cur.instances.at(e.target);
                (r.sets->status.kind == StatusRef::Kind::Stage ? inst.stages : inst.milestones)[r.sets->status.name] =
                    r.sets->value;
                changed[r.sets->status] = r.sets->value;
                step.toggled = r.sets;
            }
            if (r.dispatch) {
                trace.outgoing.push_back({*r.dispatch, e.target});
                step.dispatched = r.dispatch;
            }
            step.post_hash = hash(cur);
            trace.steps.push_back(std::move(step));
            progress = true;
            break;
        }
        if (!progress)
            break;
    }
    return {std::move(cur), std::move(trace)};
}

std::vector<std::pair<Snapshot, BStepTrace>> run_script(const CompiledModel &cm, const Snapshot &s0,
                                                        const std::vector<EventInstance> &events) {
    std::vector<std::pair<Snapshot, BStepTrace>> out;
    Snapshot cur = s0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        try {
            auto step = b_step(cm, cur, events[i]);
            cur = step.first;
            out.push_back(std::move(step));
        } catch (const EngineError &err) {
            throw ScriptError(i, err.what());
        }
    }
    return out;
}

namespace {

std::string hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

} // namespace

std::string trace_to_text(const BStepTrace &trace) {
    std::ostringstream os;
    os << "event " << to_string(trace.event) << "\n";
    for (const auto &s : trace.steps) {
        os << "  " << s.rule << " " << hex(s.pre_hash) << " -> " << hex(s.post_hash);
        if (s.toggled)
            os << "  " << to_string(*s.toggled);
        if (s.dispatched)
            os << "  call " << quote_name(*s.dispatched);
        os << "\n";
    }
    for (const auto &o : trace.outgoing)
        os << "  out " << quote_name(o.task) << " target=" << o.target << "\n";
    return os.str();
}

nlohmann::json trace_to_json(const BStepTrace &trace) {
    nlohmann::json j;
    j["event"] = {{"type", trace.event.type}, {"target", trace.event.target}, {"payload", trace.event.payload}};
    j["steps"] = nlohmann::json::array();
    for (const auto &s : trace.steps) {
        nlohmann::json step{{"rule", s.rule}, {"pre", hex(s.pre_hash)}, {"post", hex(s.post_hash)}};
        if (s.toggled)
            step["toggled"] = to_string(*s.toggled);
        if (s.dispatched)
            step["dispatched"] = *s.dispatched;
        j["steps"].push_back(std::move(step));
    }
    j["outgoing"] = nlohmann::json::array();
    for (const auto &o : trace.outgoing)
        j["outgoing"].push_back({{"task", o.task}, {"target", o.target}});
    return j;
}

} // namespace gsmv
