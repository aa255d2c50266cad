#include "gsmv/statespace.hpp"

#include "gsmv/canonical.hpp"
#include "gsmv/snapshot.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace gsmv {

namespace {

Value fresh_value(std::size_t i) {
    return "~f" + std::to_string(i);
}

std::set<std::string> milestone_labels(const Snapshot &snap) {
    std::set<std::string> out;
    for (const auto &[id, inst] : snap.instances)
        for (const auto &[m, on] : inst.milestones)
            if (on)
                out.insert(m);
    return out;
}

// Renaming along an edge: value in the source state -> value in the target.
std::map<Value, Value> compose_edge(const std::set<Value> &source_values, const std::map<Value, Value> &step) {
    std::map<Value, Value> out;
    for (const auto &v : source_values)
        if (auto it = step.find(v); it != step.end())
            out[v] = it->second;
    return out;
}

std::string slot_error(const EventType &type, const std::string &slot) {
    return "event " + type.name + " has no payload slot " + slot;
}

} // namespace

std::vector<std::vector<std::size_t>> TransitionSystem::out_edges() const {
    std::vector<std::vector<std::size_t>> out(states.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
        out[edges[i].from].push_back(i);
    return out;
}

std::vector<std::size_t> TransitionSystem::path_to(std::size_t state) const {
    auto out = out_edges();
    std::vector<std::optional<std::size_t>> via(states.size());
    std::vector<bool> seen(states.size(), false);
    std::deque<std::size_t> queue{initial};
    seen[initial] = true;
    while (!queue.empty() && !seen[state]) {
        std::size_t s = queue.front();
        queue.pop_front();
        for (std::size_t e : out[s]) {
            std::size_t t = edges[e].to;
            if (!seen[t]) {
                seen[t] = true;
                via[t] = e;
                queue.push_back(t);
            }
        }
    }
    if (!seen[state])
        throw TsError("state " + std::to_string(state) + " is unreachable");
    std::vector<std::size_t> path;
    for (std::size_t s = state; via[s]; s = edges[*via[s]].from)
        path.push_back(*via[s]);
    std::reverse(path.begin(), path.end());
    return path;
}

// -- payload candidates ------------------------------------------------------

std::size_t max_payload_slots(const GsmModel &model) {
    std::size_t k = 0;
    Snapshot unbounded;
    for (const auto &e : model.event_types)
        k = std::max(k, payload_slots(model, e, unbounded).size());
    return k;
}

SlotKind slot_kind(const GsmModel &model, const EventType &type, const std::string &slot) {
    const ArtifactType &a = model.type(type.artifact);
    auto sort_kind = [](const Attribute *at) { return at && at->sort == Sort::IdRef ? SlotKind::Ref : SlotKind::Scalar; };
    if (type.kind == EventKind::OneWay)
        return sort_kind(a.find_attribute(slot));
    const Task *t = a.find_task(type.name);
    if (slot == kNewIdSlot && t->kind == TaskKind::Create)
        return SlotKind::NewId;
    if (slot == kNewIdSlot && t->kind == TaskKind::Delete)
        return SlotKind::Existing;
    for (const auto &as : t->assignments) {
        if (as.source.kind != Source::Kind::Payload || as.source.name != slot)
            continue;
        switch (as.target.kind) {
        case Target::Kind::Attribute:
            return sort_kind(a.find_attribute(as.target.name));
        case Target::Kind::NewAttribute:
            return sort_kind(model.type(t->target_type).find_attribute(as.target.name));
        case Target::Kind::ChildAttribute:
            return sort_kind(model.type(as.target.child_type).find_attribute(as.target.name));
        }
    }
    return SlotKind::Scalar;
}

std::vector<std::map<std::string, Value>> payload_candidates(const GsmModel &model, const Snapshot &snap,
                                                             const EventType &type, const Value &target,
                                                             std::size_t fresh) {
    std::vector<Value> fresh_values;
    for (std::size_t i = 0; i < fresh; ++i)
        fresh_values.push_back(fresh_value(i));
    std::set<Value> scalars = scalar_domain(model, snap);
    for (const auto &c : model.constants())
        if (c != kNull)
            scalars.insert(c);
    std::vector<std::pair<std::string, std::vector<Value>>> slots;
    for (const auto &slot : payload_slots(model, type, snap)) {
        std::vector<Value> dom;
        switch (slot_kind(model, type, slot)) {
        case SlotKind::Scalar:
            dom.assign(scalars.begin(), scalars.end());
            dom.insert(dom.end(), fresh_values.begin(), fresh_values.end());
            break;
        case SlotKind::Ref:
            for (const auto &[id, inst] : snap.instances)
                dom.push_back(id);
            dom.insert(dom.end(), fresh_values.begin(), fresh_values.end());
            break;
        case SlotKind::NewId:
            dom = fresh_values;
            break;
        case SlotKind::Existing: {
            const Task *t = model.type(type.artifact).find_task(type.name);
            dom = children_of(snap, target, t->target_type);
            break;
        }
        }
        slots.emplace_back(slot, std::move(dom));
    }
    std::vector<std::map<std::string, Value>> out{{}};
    for (const auto &[slot, dom] : slots) {
        std::vector<std::map<std::string, Value>> next;
        for (const auto &partial : out)
            for (const auto &v : dom) {
                auto p = partial;
                p[slot] = v;
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

std::vector<EventInstance> candidate_events(const CompiledModel &cm, const Snapshot &snap, std::size_t fresh) {
    std::vector<EventInstance> out;
    for (const auto &[id, inst] : snap.instances)
        for (const auto &et : cm.model.event_types) {
            if (et.artifact != inst.type)
                continue;
            for (auto &payload : payload_candidates(cm.model, snap, et, id, fresh)) {
                EventInstance e{et.name, id, std::move(payload)};
                if (!rejection_reason(cm, snap, e))
                    out.push_back(std::move(e));
            }
        }
    return out;
}

std::vector<ServiceAssignment> ExplorationOracle::assignments(const DcdsSpec &, const DbInstance &db,
                                                              const std::vector<ServiceCall> &calls) const {
    if (calls.empty())
        return {ServiceAssignment{}};
    const GsmModel &model = map_.compiled->model;
    const PayloadService &first = map_.services.at(calls.front().service);
    const Value &target = calls.front().args.at(0);
    for (const auto &c : calls) {
        const PayloadService &p = map_.services.at(c.service);
        if (p.artifact != first.artifact || p.event != first.event || c.args.at(0) != target)
            throw TsError("service calls of one action must belong to one reception");
    }
    const EventType *et = model.find_event(first.artifact, first.event);
    Snapshot snap = filter_state(map_, db);
    std::set<ServiceAssignment> out;
    for (const auto &cand : payload_candidates(model, snap, *et, target, fresh_)) {
        ServiceAssignment a;
        for (const auto &c : calls) {
            const std::string &slot = map_.services.at(c.service).slot;
            auto it = cand.find(slot);
            if (it == cand.end())
                throw TsError(slot_error(*et, slot));
            a[c] = it->second;
        }
        out.insert(std::move(a));
    }
    return {out.begin(), out.end()};
}

// -- engine side -------------------------------------------------------------

namespace {

// BFS bookkeeping shared by both constructions.
class Explorer {
public:
    Explorer(TransitionSystem &ts, const Budget &budget) : ts_(ts), budget_(budget) {
        ts_.depth_bound = budget.max_depth;
    }

    // Index of the state with `key`, adding it if there is room.
    std::optional<std::size_t> intern(TsState state) {
        if (auto it = index_.find(state.key); it != index_.end())
            return it->second;
        if (ts_.states.size() >= budget_.max_states) {
            ts_.truncated = true;
            ts_.truncation = "state budget of " + std::to_string(budget_.max_states) + " exhausted";
            return std::nullopt;
        }
        std::size_t i = ts_.states.size();
        index_.emplace(state.key, i);
        ts_.states.push_back(std::move(state));
        queue_.push_back(i);
        return i;
    }

    // Next state to expand, or nullopt when done. States at the depth bound
    // are marked frontier and skipped.
    std::optional<std::size_t> next() {
        while (!queue_.empty()) {
            std::size_t s = queue_.front();
            queue_.pop_front();
            if (budget_.max_depth && ts_.states[s].depth >= *budget_.max_depth) {
                ts_.states[s].frontier = true;
                if (!ts_.truncated) {
                    ts_.truncated = true;
                    ts_.truncation = "depth bound " + std::to_string(*budget_.max_depth) + " reached";
                }
                continue;
            }
            return s;
        }
        return std::nullopt;
    }

    void edge(std::size_t from, std::optional<std::size_t> to, std::string label, std::map<Value, Value> renaming) {
        if (!to) {
            ts_.states[from].frontier = true;
            return;
        }
        TsEdge e{from, *to, std::move(label), std::move(renaming)};
        auto sig = std::make_tuple(e.from, e.to, e.label, e.renaming);
        if (edge_seen_.insert(sig).second)
            ts_.edges.push_back(std::move(e));
    }

private:
    TransitionSystem &ts_;
    Budget budget_;
    std::unordered_map<std::string, std::size_t> index_;
    std::deque<std::size_t> queue_;
    std::set<std::tuple<std::size_t, std::size_t, std::string, std::map<Value, Value>>> edge_seen_;
};

TsState gsm_state(const GsmModel &model, CanonicalSnapshot c, std::size_t depth) {
    TsState s;
    s.size = snapshot_size(model, c.snapshot);
    s.labels = milestone_labels(c.snapshot);
    s.snapshot = std::move(c.snapshot);
    s.key = std::move(c.key);
    s.depth = depth;
    return s;
}

} // namespace

TransitionSystem build_gsm_ts(const CompiledModel &cm, const Snapshot &s0, const AbstractionPolicy &policy,
                              const Budget &budget) {
    const GsmModel &model = cm.model;
    const std::size_t fresh = policy.fresh.value_or(max_payload_slots(model));
    TransitionSystem ts;
    ts.kind = "gsm";
    ts.constants = model.constants();
    Explorer ex(ts, budget);
    ex.intern(gsm_state(model, canonicalize_snapshot(model, s0), 0));
    BStepOptions opts;
    opts.hashes = false;
    while (auto s = ex.next()) {
        const Snapshot snap = ts.states[*s].snapshot;
        const std::size_t depth = ts.states[*s].depth;
        const std::set<Value> values = active_domain(snap);
        for (const auto &e : candidate_events(cm, snap, fresh)) {
            Snapshot succ = b_step(cm, snap, e, opts).first;
            CanonicalSnapshot c = canonicalize_snapshot(model, succ);
            auto renaming = compose_edge(values, c.renaming);
            auto to = ex.intern(gsm_state(model, std::move(c), depth + 1));
            ex.edge(*s, to, e.type, std::move(renaming));
        }
    }
    return ts;
}

// -- DCDS side ---------------------------------------------------------------

CanonicalDb canonicalize_db(const DbInstance &db, const std::set<Value> &constants) {
    std::vector<Fact> facts;
    for (const auto &[rel, tuples] : db.relations)
        for (const auto &t : tuples)
            facts.push_back({rel, t});
    CanonicalForm form = canonicalize(facts, [&](const Value &v) { return constants.count(v) > 0; });
    CanonicalDb out;
    for (const auto &f : form.facts) {
        out.db.insert(f.relation, f.args);
        out.key += to_string(f);
        out.key += ';';
    }
    out.renaming = std::move(form.renaming);
    return out;
}

namespace {

class DcdsBuilder {
public:
    DcdsBuilder(const Translation &tr, std::size_t fresh, const Budget &budget, DcdsExploration &out)
        : tr_(tr), oracle_(tr.map, fresh), out_(out), ex_(out.unblocked, budget) {}

    void run() {
        TransitionSystem &ts = out_.unblocked;
        ts.kind = "dcds";
        ts.constants = tr_.map.constants;
        ex_.intern(db_state(canonicalize_db(tr_.spec.initial, tr_.map.constants), 0));
        while (auto s = ex_.next()) {
            const DbInstance db = *ts.states[*s].db;
            const std::size_t depth = ts.states[*s].depth;
            check_aux_bounds(db);
            const std::set<Value> values = db.active_domain();
            for (const auto &en : enabled_actions(tr_.spec, db)) {
                auto rec = tr_.map.reception.find(en.action);
                if (rec == tr_.map.reception.end())
                    throw TsError("CA rule " + en.action + " enabled in an unblocked state");
                ApplyResult r = apply_action(tr_.spec, db, en.action, en.binding, oracle_);
                for (const auto &blocked : r.successors) {
                    const Segment &seg = settle(blocked);
                    CanonicalDb c = canonicalize_db(seg.final_db, tr_.map.constants);
                    auto renaming = compose_edge(values, c.renaming);
                    auto to = ex_.intern(db_state(std::move(c), depth + 1));
                    ex_.edge(*s, to, rec->second.second, std::move(renaming));
                }
            }
        }
        filter();
    }

private:
    struct Segment {
        DbInstance final_db;
        std::size_t steps = 0;  // micro-step CA rules on the longest path
    };

    TsState db_state(CanonicalDb c, std::size_t depth) {
        TsState s;
        s.snapshot = filter_state(tr_.map, c.db);
        s.labels = milestone_labels(s.snapshot);
        s.size = c.db.size();
        s.key = std::move(c.key);
        s.db = std::move(c.db);
        s.depth = depth;
        return s;
    }

    void check_aux_bounds(const DbInstance &db) {
        for (const auto &v : auxiliary_bound_violations(tr_.map, db))
            if (out_.aux_bounds.size() < 100)
                out_.aux_bounds.push_back(v);
    }

    // Runs every interleaving of the blocked segment starting at `db` and
    // returns its unique unblocked end state.
    const Segment &settle(const DbInstance &db) {
        if (auto it = memo_.find(db); it != memo_.end())
            return it->second;
        if (!active_.insert(db).second)
            throw TsError("blocked segment revisits a state: internal cycle");
        ++out_.intermediate_states;
        check_aux_bounds(db);
        if (is_unblocked(tr_.map, db)) {
            active_.erase(db);
            return memo_.emplace(db, Segment{db, 0}).first->second;
        }
        auto enabled = enabled_actions(tr_.spec, db);
        if (enabled.empty())
            throw TsError("blocked state with no enabled CA rule:\n" + to_string(db));
        std::optional<Segment> result;
        for (const auto &en : enabled) {
            ApplyResult r = apply_action(tr_.spec, db, en.action, en.binding, oracle_);
            if (!r.discarded.empty())
                throw TsError("micro-step " + en.action + " violates a key: " + r.discarded.front());
            if (r.successors.size() != 1)
                throw TsError("micro-step " + en.action + " is not deterministic");
            const Segment &next = settle(r.successors.front());
            std::size_t steps = next.steps + (tr_.map.finalization.count(en.action) ? 0 : 1);
            if (!result) {
                result = Segment{next.final_db, steps};
            } else {
                if (result->final_db != next.final_db)
                    throw TsError("two interleavings of one B-step reach different unblocked states");
                result->steps = std::max(result->steps, steps);
            }
        }
        active_.erase(db);
        out_.max_segment = std::max(out_.max_segment, result->steps);
        return memo_.emplace(db, std::move(*result)).first->second;
    }

    // filtered view: same graph, states replaced by their filtered snapshots.
    void filter() {
        const GsmModel &model = tr_.map.compiled->model;
        const TransitionSystem &u = out_.unblocked;
        TransitionSystem &f = out_.filtered;
        f.kind = "dcds-filtered";
        f.initial = u.initial;
        f.constants = model.constants();
        f.truncated = u.truncated;
        f.truncation = u.truncation;
        f.depth_bound = u.depth_bound;
        std::vector<std::map<Value, Value>> sigma;
        for (const auto &s : u.states) {
            CanonicalSnapshot c = canonicalize_snapshot(model, s.snapshot);
            TsState t = gsm_state(model, c, s.depth);
            t.frontier = s.frontier;
            f.states.push_back(std::move(t));
            sigma.push_back(std::move(c.renaming));
        }
        for (const auto &e : u.edges) {
            std::map<Value, Value> r;
            for (const auto &[from_v, to_v] : e.renaming) {
                auto a = sigma[e.from].find(from_v);
                auto b = sigma[e.to].find(to_v);
                if (a != sigma[e.from].end() && b != sigma[e.to].end())
                    r[a->second] = b->second;
            }
            f.edges.push_back({e.from, e.to, e.label, std::move(r)});
        }
    }

    const Translation &tr_;
    ExplorationOracle oracle_;
    DcdsExploration &out_;
    Explorer ex_;
    std::map<DbInstance, Segment> memo_;
    std::set<DbInstance> active_;
};

} // namespace

DcdsExploration build_dcds_ts(const Translation &tr, const AbstractionPolicy &policy, const Budget &budget) {
    DcdsExploration out;
    const std::size_t fresh = policy.fresh.value_or(max_payload_slots(tr.map.compiled->model));
    DcdsBuilder(tr, fresh, budget, out).run();
    return out;
}

// -- boundedness and export -------------------------------------------------

BoundednessResult monitor_boundedness(const TransitionSystem &ts, std::size_t bound) {
    BoundednessResult r;
    std::optional<std::size_t> worst;
    for (std::size_t i = 0; i < ts.states.size(); ++i) {
        r.max_size = std::max(r.max_size, ts.states[i].size);
        if (ts.states[i].size > bound && (!worst || ts.states[i].depth < ts.states[*worst].depth))
            worst = i;
    }
    if (worst) {
        r.bounded = false;
        r.path = ts.path_to(*worst);
    }
    return r;
}

void write_adjacency(std::ostream &os, const TransitionSystem &ts) {
    os << "# transition system\n";
    os << "kind " << ts.kind << "\n";
    os << "states " << ts.states.size() << "\n";
    os << "edges " << ts.edges.size() << "\n";
    os << "initial " << ts.initial << "\n";
    os << "truncated " << (ts.truncated ? "yes " + ts.truncation : std::string("no")) << "\n";
    auto out = ts.out_edges();
    for (std::size_t i = 0; i < ts.states.size(); ++i) {
        const TsState &s = ts.states[i];
        os << "state " << i << " depth=" << s.depth << " size=" << s.size;
        if (s.frontier)
            os << " frontier";
        os << " labels={";
        bool first = true;
        for (const auto &l : s.labels) {
            os << (first ? "" : ",") << l;
            first = false;
        }
        os << "}\n";
        for (std::size_t e : out[i])
            os << "  -> " << ts.edges[e].to << " " << ts.edges[e].label << "\n";
    }
}

void write_dot(std::ostream &os, const TransitionSystem &ts) {
    auto esc = [](const std::string &s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\')
                out += '\\';
            out += c;
        }
        return out;
    };
    os << "digraph ts {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n";
    for (std::size_t i = 0; i < ts.states.size(); ++i) {
        const TsState &s = ts.states[i];
        std::string label = "s" + std::to_string(i) + " (" + std::to_string(s.size) + ")";
        for (const auto &l : s.labels)
            label += "\\n" + esc(l);
        os << "  s" << i << " [label=\"" << label << "\"";
        if (i == ts.initial)
            os << ", penwidth=2";
        if (s.frontier)
            os << ", style=dashed";
        os << "];\n";
    }
    for (const auto &e : ts.edges)
        os << "  s" << e.from << " -> s" << e.to << " [label=\"" << esc(e.label) << "\"];\n";
    os << "}\n";
}

std::string ts_summary(const TransitionSystem &ts) {
    std::ostringstream os;
    std::size_t max_size = 0, max_depth = 0;
    for (const auto &s : ts.states) {
        max_size = std::max(max_size, s.size);
        max_depth = std::max(max_depth, s.depth);
    }
    os << ts.kind << ": " << ts.states.size() << " states, " << ts.edges.size() << " edges, depth " << max_depth
       << ", max size " << max_size;
    if (ts.truncated)
        os << " (truncated: " << ts.truncation << ")";
    return os.str();
}

} // namespace gsmv
