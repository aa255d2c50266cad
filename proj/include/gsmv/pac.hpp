#pragma once

#include "gsmv/model.hpp"

#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsmv {

struct StatusRef {
    enum class Kind { Stage, Milestone };
    Kind kind = Kind::Stage;
    std::string name;
    auto operator<=>(const StatusRef &) const = default;
};

// status = value (open / achieved when true)
struct StatusLiteral {
    StatusRef status;
    bool value = true;
    bool operator==(const StatusLiteral &) const = default;
};

std::string to_string(const StatusRef &s);
std::string to_string(const StatusLiteral &s);        // "open S", "achieved m", ...
std::string event_string(const StatusLiteral &s);     // "+S", "-m", ...

enum class RuleTemplate {
    OpenStage,              // guard satisfied
    AchieveMilestone,       // achieving sentry while the stage is open
    CloseOnMilestone,       // +m of an owned milestone
    InvalidateOnOpen,       // +S invalidates the milestones of S
    InvalidateOnSentry,     // invalidating sentry
    DispatchTask,           // +S of an atomic stage sends the task's service call
    CloseWithParent,        // -P closes the open substages of P
};

const char *template_name(RuleTemplate t);

struct PacRule {
    std::string id;         // "<artifact>.r<nn>", unique
    std::string owner;      // artifact type
    RuleTemplate kind = RuleTemplate::OpenStage;
    std::string construct;  // stage or milestone the rule was generated from
    int depth = 0;          // stage depth of the construct

    // Prerequisite, evaluated on the B-step-initial snapshot: the incoming
    // event must be `trigger` (one-way or task return). None means true.
    // The toggle-once test "target not yet changed in this B-step" is
    // attached to every rule with a status target.
    std::optional<std::string> trigger;
    std::vector<StatusLiteral> initial_status;    // status tests on the initial snapshot

    // Antecedent, evaluated on the current pre-snapshot.
    std::vector<StatusLiteral> requires_status;   // structural status tests
    std::optional<StatusLiteral> requires_event;  // internal event (status changed to value)
    bool event_from_sentry = false;               // requires_event written by the modeler
    Condition condition;                          // sentry condition

    // Consequent: toggles one status attribute, or dispatches a task.
    std::optional<StatusLiteral> sets;
    std::optional<std::string> dispatch;

    bool operator==(const PacRule &) const = default;
};

// Status attributes read by the antecedent (statuses, internal events and
// status atoms of the condition), without duplicates.
std::vector<StatusRef> rule_reads(const PacRule &rule);

std::vector<PacRule> derive_pac_rules(const GsmModel &model);

// Rules that can fire in a B-step of an `owner` instance triggered by `event`:
// the trigger matches (or there is none) and the required internal event, if
// any, is emitted by another candidate. Non-candidates are never applicable in
// that B-step and are skipped up front.
std::vector<bool> candidate_rules(const std::vector<PacRule> &rules, const std::string &owner,
                                  const std::string &event);

struct DependencyEdge {
    std::size_t from;
    std::size_t to;
    StatusRef via;
};

struct RuleOrder {
    std::vector<std::size_t> order;            // indices into the rule list
    std::vector<DependencyEdge> edges;         // the dependency DAG
    std::vector<std::vector<std::size_t>> predecessors;  // direct, per rule
};

struct CycleError : std::runtime_error {
    explicit CycleError(std::vector<std::string> cycle_);
    std::vector<std::string> cycle;  // rule ids, first repeated at the end
};

// Dependency DAG plus its deterministic topological order. Edge r1 -> r2 when
// r2 reads a status attribute (or its internal event) that r1 toggles. Edges
// that can never matter under toggle-once are omitted: r1 toggles r2's own
// target; r1's structural antecedent already pins r2's target (at r2's
// post-value, or as changed); or r2 waits for the opposite change of the
// status r1 toggles. Sentry-derived reads never drop edges on their own, so
// mutually triggering guards are reported as a cycle.
RuleOrder stratify(const std::vector<PacRule> &rules);

bool is_linear_extension(const RuleOrder &dag, const std::vector<std::size_t> &order);

// Up to `limit` distinct linear extensions, in lexicographic order.
std::vector<std::vector<std::size_t>> linear_extensions(const RuleOrder &dag, std::size_t limit);

// A uniformly-seeded random linear extension (random choice among ready rules).
std::vector<std::size_t> random_linear_extension(const RuleOrder &dag, std::mt19937 &rng);

// Text report: one block per rule (P/A/C) followed by the order and the edges.
std::string explain(const std::vector<PacRule> &rules, const RuleOrder &order);

} // namespace gsmv
