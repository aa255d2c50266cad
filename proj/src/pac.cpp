#include "gsmv/pac.hpp"

#include "gsmv/names.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace gsmv {

std::string to_string(const StatusRef &s) {
    return quote_name(s.name);
}

std::string to_string(const StatusLiteral &s) {
    if (s.status.kind == StatusRef::Kind::Stage)
        return (s.value ? "open " : "closed ") + quote_name(s.status.name);
    return (s.value ? "achieved " : "invalidated ") + quote_name(s.status.name);
}

std::string event_string(const StatusLiteral &s) {
    return (s.value ? "+" : "-") + quote_name(s.status.name);
}

const char *template_name(RuleTemplate t) {
    switch (t) {
    case RuleTemplate::OpenStage:
        return "open-stage";
    case RuleTemplate::AchieveMilestone:
        return "achieve-milestone";
    case RuleTemplate::CloseOnMilestone:
        return "close-on-milestone";
    case RuleTemplate::InvalidateOnOpen:
        return "invalidate-on-open";
    case RuleTemplate::InvalidateOnSentry:
        return "invalidate-on-sentry";
    case RuleTemplate::DispatchTask:
        return "dispatch-task";
    case RuleTemplate::CloseWithParent:
        return "close-with-parent";
    }
    return "?";
}

std::vector<StatusRef> rule_reads(const PacRule &rule) {
    std::set<StatusRef> out;
    for (const auto &s : rule.requires_status)
        out.insert(s.status);
    if (rule.requires_event)
        out.insert(rule.requires_event->status);
    ConditionRefs refs;
    collect_refs(rule.condition, refs);
    for (const auto &m : refs.milestones)
        out.insert({StatusRef::Kind::Milestone, m});
    for (const auto &s : refs.stages)
        out.insert({StatusRef::Kind::Stage, s});
    return {out.begin(), out.end()};
}

namespace {

StatusRef stage_ref(const std::string &n) {
    return {StatusRef::Kind::Stage, n};
}
StatusRef milestone_ref(const std::string &n) {
    return {StatusRef::Kind::Milestone, n};
}

// Splits a sentry into the prerequisite trigger / internal event / condition.
void apply_sentry(const Sentry &s, PacRule &r) {
    if (s.on) {
        switch (s.on->kind) {
        case TriggerKind::External:
        case TriggerKind::TaskReturn:
            r.trigger = s.on->name;
            break;
        case TriggerKind::StageOpened:
            r.requires_event = StatusLiteral{stage_ref(s.on->name), true};
            break;
        case TriggerKind::StageClosed:
            r.requires_event = StatusLiteral{stage_ref(s.on->name), false};
            break;
        case TriggerKind::MilestoneAchieved:
            r.requires_event = StatusLiteral{milestone_ref(s.on->name), true};
            break;
        case TriggerKind::MilestoneInvalidated:
            r.requires_event = StatusLiteral{milestone_ref(s.on->name), false};
            break;
        }
        r.event_from_sentry = r.requires_event.has_value();
    }
    if (s.condition)
        r.condition = *s.condition;
}

} // namespace

std::vector<PacRule> derive_pac_rules(const GsmModel &model) {
    std::vector<PacRule> rules;
    for (const auto &a : model.artifact_types) {
        std::size_t counter = 0;
        auto make = [&](RuleTemplate kind, const std::string &construct, int depth) {
            PacRule r;
            char buf[16];
            std::snprintf(buf, sizeof buf, ".r%02zu", counter++);
            r.id = a.name + buf;
            r.owner = a.name;
            r.kind = kind;
            r.construct = construct;
            r.depth = depth;
            return r;
        };
        for (const auto &info : flatten_stages(a)) {
            const Stage &s = *info.stage;
            for (const auto &g : s.guards) {
                PacRule r = make(RuleTemplate::OpenStage, s.name, info.depth);
                r.requires_status.push_back({stage_ref(s.name), false});
                if (info.parent)
                    r.requires_status.push_back({stage_ref(info.parent->name), true});
                apply_sentry(g, r);
                r.sets = StatusLiteral{stage_ref(s.name), true};
                rules.push_back(std::move(r));
            }
            if (s.task) {
                PacRule r = make(RuleTemplate::DispatchTask, s.name, info.depth);
                r.requires_event = StatusLiteral{stage_ref(s.name), true};
                r.dispatch = *s.task;
                rules.push_back(std::move(r));
            }
            if (info.parent) {
                PacRule r = make(RuleTemplate::CloseWithParent, s.name, info.depth);
                r.requires_status.push_back({stage_ref(s.name), true});
                r.requires_event = StatusLiteral{stage_ref(info.parent->name), false};
                r.sets = StatusLiteral{stage_ref(s.name), false};
                rules.push_back(std::move(r));
            }
            for (const auto &mname : s.milestones) {
                const Milestone &m = *a.find_milestone(mname);
                {
                    PacRule r = make(RuleTemplate::AchieveMilestone, m.name, info.depth);
                    r.initial_status.push_back({stage_ref(s.name), true});
                    r.requires_status.push_back({milestone_ref(m.name), false});
                    apply_sentry(m.achieving, r);
                    r.sets = StatusLiteral{milestone_ref(m.name), true};
                    rules.push_back(std::move(r));
                }
                {
                    PacRule r = make(RuleTemplate::CloseOnMilestone, m.name, info.depth);
                    r.requires_status.push_back({stage_ref(s.name), true});
                    r.requires_event = StatusLiteral{milestone_ref(m.name), true};
                    r.sets = StatusLiteral{stage_ref(s.name), false};
                    rules.push_back(std::move(r));
                }
                {
                    PacRule r = make(RuleTemplate::InvalidateOnOpen, m.name, info.depth);
                    r.requires_status.push_back({milestone_ref(m.name), true});
                    r.requires_event = StatusLiteral{stage_ref(s.name), true};
                    r.sets = StatusLiteral{milestone_ref(m.name), false};
                    rules.push_back(std::move(r));
                }
                for (const auto &inv : m.invalidating) {
                    PacRule r = make(RuleTemplate::InvalidateOnSentry, m.name, info.depth);
                    r.requires_status.push_back({milestone_ref(m.name), true});
                    apply_sentry(inv, r);
                    r.sets = StatusLiteral{milestone_ref(m.name), false};
                    rules.push_back(std::move(r));
                }
            }
        }
    }
    return rules;
}

std::vector<bool> candidate_rules(const std::vector<PacRule> &rules, const std::string &owner,
                                  const std::string &event) {
    std::vector<bool> out(rules.size(), false);
    for (bool grew = true; grew;) {
        grew = false;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const PacRule &r = rules[i];
            if (out[i] || r.owner != owner || (r.trigger && *r.trigger != event))
                continue;
            bool ok = !r.requires_event;
            for (std::size_t j = 0; !ok && j < rules.size(); ++j)
                ok = out[j] && j != i && rules[j].sets && *rules[j].sets == *r.requires_event;
            if (ok)
                out[i] = grew = true;
        }
    }
    return out;
}

CycleError::CycleError(std::vector<std::string> cycle_)
    : std::runtime_error([&] {
          std::string msg = "rule dependencies are cyclic:";
          for (std::size_t i = 0; i < cycle_.size(); ++i)
              msg += (i ? " -> " : " ") + cycle_[i];
          return msg;
      }()),
      cycle(std::move(cycle_)) {}

namespace {

// Can `b` still fire after `a` fired in the same B-step?
bool may_follow(const PacRule &a, const PacRule &b) {
    if (!a.sets)
        return true;
    if (!b.sets) {
        const StatusLiteral &w = *a.sets;
        return !(b.requires_event && b.requires_event->status == w.status && b.requires_event->value != w.value);
    }
    const StatusRef &x = b.sets->status;
    if (a.sets->status == x)
        return false;  // a toggled x, b would toggle it again
    if (a.requires_event && !a.event_from_sentry && a.requires_event->status == x)
        return false;  // x already changed when a fired
    for (const auto &lit : a.requires_status)
        if (lit.status == x && lit.value == b.sets->value)
            return false;  // x already at b's post-value; two toggles needed
    const StatusLiteral &w = *a.sets;
    if (b.requires_event && b.requires_event->status == w.status && b.requires_event->value != w.value)
        return false;
    return true;
}

struct RuleKey {
    const PacRule *rule;
    bool operator<(const RuleKey &o) const {
        return std::tie(rule->owner, rule->depth, rule->id) < std::tie(o.rule->owner, o.rule->depth, o.rule->id);
    }
};

} // namespace

RuleOrder stratify(const std::vector<PacRule> &rules) {
    const std::size_t n = rules.size();
    RuleOrder out;
    out.predecessors.assign(n, {});
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t a = 0; a < n; ++a) {
        if (!rules[a].sets)
            continue;
        const StatusRef &w = rules[a].sets->status;
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b || rules[a].owner != rules[b].owner)
                continue;
            if (rules[b].sets && rules[b].sets->status == w)
                continue;  // own target
            auto reads = rule_reads(rules[b]);
            if (std::find(reads.begin(), reads.end(), w) == reads.end())
                continue;
            if (!may_follow(rules[a], rules[b]))
                continue;
            out.edges.push_back({a, b, w});
            succ[a].push_back(b);
            out.predecessors[b].push_back(a);
        }
    }

    // Kahn with a deterministic ready set.
    std::vector<std::size_t> indeg(n);
    for (std::size_t b = 0; b < n; ++b)
        indeg[b] = out.predecessors[b].size();
    std::set<std::pair<RuleKey, std::size_t>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0)
            ready.insert({RuleKey{&rules[i]}, i});
    while (!ready.empty()) {
        auto [key, i] = *ready.begin();
        ready.erase(ready.begin());
        out.order.push_back(i);
        for (std::size_t j : succ[i])
            if (--indeg[j] == 0)
                ready.insert({RuleKey{&rules[j]}, j});
    }
    if (out.order.size() == n)
        return out;

    // Extract one cycle among the remaining rules.
    std::size_t start = 0;
    while (indeg[start] == 0)
        ++start;
    std::vector<int> seen(n, -1);
    std::vector<std::size_t> path;
    std::size_t cur = start;
    while (seen[cur] < 0) {
        seen[cur] = static_cast<int>(path.size());
        path.push_back(cur);
        for (std::size_t p : out.predecessors[cur])
            if (indeg[p] > 0) {
                cur = p;
                break;
            }
    }
    std::vector<std::string> cycle;
    for (std::size_t k = path.size(); k-- > static_cast<std::size_t>(seen[cur]);)
        cycle.push_back(rules[path[k]].id);
    cycle.push_back(cycle.front());
    throw CycleError(std::move(cycle));
}

bool is_linear_extension(const RuleOrder &dag, const std::vector<std::size_t> &order) {
    const std::size_t n = dag.predecessors.size();
    if (order.size() != n)
        return false;
    std::vector<std::size_t> pos(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (order[i] >= n || pos[order[i]] != n)
            return false;
        pos[order[i]] = i;
    }
    for (const auto &e : dag.edges)
        if (pos[e.from] > pos[e.to])
            return false;
    return true;
}

std::vector<std::vector<std::size_t>> linear_extensions(const RuleOrder &dag, std::size_t limit) {
    const std::size_t n = dag.predecessors.size();
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> indeg(n);
    std::vector<std::vector<std::size_t>> succ(n);
    for (const auto &e : dag.edges) {
        ++indeg[e.to];
        succ[e.from].push_back(e.to);
    }
    std::vector<bool> used(n, false);
    std::vector<std::size_t> cur;
    auto rec = [&](auto &&self) -> void {
        if (out.size() >= limit)
            return;
        if (cur.size() == n) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = 0; i < n && out.size() < limit; ++i) {
            if (used[i] || indeg[i] != 0)
                continue;
            used[i] = true;
            cur.push_back(i);
            for (std::size_t j : succ[i])
                --indeg[j];
            self(self);
            for (std::size_t j : succ[i])
                ++indeg[j];
            cur.pop_back();
            used[i] = false;
        }
    };
    rec(rec);
    return out;
}

std::vector<std::size_t> random_linear_extension(const RuleOrder &dag, std::mt19937 &rng) {
    const std::size_t n = dag.predecessors.size();
    std::vector<std::size_t> indeg(n);
    std::vector<std::vector<std::size_t>> succ(n);
    for (const auto &e : dag.edges) {
        ++indeg[e.to];
        succ[e.from].push_back(e.to);
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0)
            ready.push_back(i);
    std::vector<std::size_t> out;
    while (!ready.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
        std::size_t k = pick(rng);
        std::size_t i = ready[k];
        ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(k));
        out.push_back(i);
        for (std::size_t j : succ[i])
            if (--indeg[j] == 0)
                ready.push_back(j);
    }
    return out;
}

std::string explain(const std::vector<PacRule> &rules, const RuleOrder &order) {
    std::ostringstream os;
    for (const auto &r : rules) {
        os << "[" << r.id << "] " << template_name(r.kind) << " " << quote_name(r.construct) << "\n";
        os << "  P: " << (r.trigger ? "on " + quote_name(*r.trigger) : std::string("true"));
        for (const auto &lit : r.initial_status)
            os << " ; " << to_string(lit);
        if (r.sets)
            os << " ; unchanged " << to_string(r.sets->status);
        os << "\n  A: ";
        std::vector<std::string> parts;
        for (const auto &s : r.requires_status)
            parts.push_back(to_string(s));
        if (r.requires_event)
            parts.push_back("on " + event_string(*r.requires_event));
        if (r.condition.kind != Condition::Kind::True)
            parts.push_back(to_string(r.condition));
        if (parts.empty())
            parts.push_back("true");
        for (std::size_t i = 0; i < parts.size(); ++i)
            os << (i ? " and " : "") << parts[i];
        os << "\n  C: ";
        if (r.sets)
            os << (r.sets->status.kind == StatusRef::Kind::Stage ? (r.sets->value ? "open " : "close ")
                                                                 : (r.sets->value ? "achieve " : "invalidate "))
               << quote_name(r.sets->status.name) << ", emit " << event_string(*r.sets);
        if (r.dispatch)
            os << "send service call " << quote_name(*r.dispatch);
        os << "\n";
    }
    os << "\norder:\n";
    for (std::size_t i = 0; i < order.order.size(); ++i)
        os << "  " << i + 1 << ". " << rules[order.order[i]].id << "\n";
    os << "\ndependencies:\n";
    for (const auto &e : order.edges)
        os << "  " << rules[e.from].id << " -> " << rules[e.to].id << "  (on " << quote_name(e.via.name) << ")\n";
    return os.str();
}

} // namespace gsmv
