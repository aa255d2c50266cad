#pragma once

#include "gsmv/dcds.hpp"
#include "gsmv/engine.hpp"
#include "gsmv/translate.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsmv {

struct TsState {
    Snapshot snapshot;              // canonical (for DCDS systems: the filtered view)
    std::optional<DbInstance> db;   // canonical database, DCDS systems only
    std::string key;                // canonical content; equal iff isomorphic
    std::set<std::string> labels;   // atomic propositions (achieved milestones, or free-form)
    std::size_t size = 0;           // information-model cells, or #facts for databases
    std::size_t depth = 0;          // BFS distance from the initial state
    bool frontier = false;          // not expanded (budget or depth bound)
};

struct TsEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    std::string label;                // event type, or CA rule
    std::map<Value, Value> renaming;  // value of `from` -> value of `to` (survivors only)
};

struct TransitionSystem {
    std::string kind;  // "gsm", "dcds", "dcds-filtered" or user supplied
    std::vector<TsState> states;
    std::vector<TsEdge> edges;
    std::size_t initial = 0;
    std::set<Value> constants;  // values that keep their identity everywhere
    bool truncated = false;
    std::string truncation;     // why, when truncated
    std::optional<std::size_t> depth_bound;

    std::vector<std::vector<std::size_t>> out_edges() const;  // edge indices per state
    std::vector<std::size_t> path_to(std::size_t state) const;  // edge indices, BFS shortest
};

// Payload values offered to each incoming event: the relevant active domain of
// the current state plus `fresh` distinguished values outside it.
struct AbstractionPolicy {
    std::optional<std::size_t> fresh;  // defaults to k = max_payload_slots
};

struct Budget {
    std::size_t max_states = 20000;
    std::optional<std::size_t> max_depth;
};

// k: the largest number of payload slots any single event consumes.
std::size_t max_payload_slots(const GsmModel &model);

enum class SlotKind { Scalar, Ref, NewId, Existing };
SlotKind slot_kind(const GsmModel &model, const EventType &type, const std::string &slot);

// Payload assignments offered for one event instance (before rejection checks).
std::vector<std::map<std::string, Value>> payload_candidates(const GsmModel &model, const Snapshot &snap,
                                                             const EventType &type, const Value &target,
                                                             std::size_t fresh);

// Every acceptable event instance in `snap` under the policy.
std::vector<EventInstance> candidate_events(const CompiledModel &cm, const Snapshot &snap, std::size_t fresh);

// Service oracle for DCDS exploration: reception calls receive exactly the
// payload candidates the engine side would get in the filtered state.
class ExplorationOracle : public ServiceOracle {
public:
    ExplorationOracle(const TranslationMap &map, std::size_t fresh) : map_(map), fresh_(fresh) {}
    std::vector<ServiceAssignment> assignments(const DcdsSpec &spec, const DbInstance &db,
                                               const std::vector<ServiceCall> &calls) const override;

private:
    const TranslationMap &map_;
    std::size_t fresh_;
};

struct TsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TransitionSystem build_gsm_ts(const CompiledModel &cm, const Snapshot &s0, const AbstractionPolicy &policy = {},
                              const Budget &budget = {});

struct DcdsExploration {
    TransitionSystem unblocked;  // DCDS side: canonical unblocked databases
    TransitionSystem filtered;   // DCDS side filtered: same graph, auxiliary relations projected away
    std::size_t intermediate_states = 0;
    std::size_t max_segment = 0;  // micro-step CA rules in the longest blocked segment
    std::vector<std::string> aux_bounds;  // violations, "state: message"
};

// Explores all CA-rule firings from the translation's initial database and
// collapses blocked segments into one edge per reception. Throws TsError when
// a segment has an internal cycle, gets stuck, or interleavings disagree.
DcdsExploration build_dcds_ts(const Translation &tr, const AbstractionPolicy &policy = {},
                              const Budget &budget = {});

struct CanonicalDb {
    DbInstance db;
    std::string key;
    std::map<Value, Value> renaming;
};
CanonicalDb canonicalize_db(const DbInstance &db, const std::set<Value> &constants);

struct BoundednessResult {
    bool bounded = true;
    std::size_t max_size = 0;
    std::vector<std::size_t> path;  // edge indices from the initial state to the first violation
};
BoundednessResult monitor_boundedness(const TransitionSystem &ts, std::size_t bound);

struct BisimulationResult {
    bool equivalent = false;
    std::size_t left = 0;   // distinguishing pair (left state, right state)
    std::size_t right = 0;
    std::vector<std::string> path;  // labels followed from the initial pair
    std::string reason;
};
// Partition refinement over the disjoint union; states are labeled by their
// key (plus the frontier flag for depth-bounded systems), edges by label.
BisimulationResult check_bisimulation(const TransitionSystem &a, const TransitionSystem &b);

// Same canonical state keys and the same (key, label, key) edges. States are
// canonical, so this is isomorphism of the two systems.
bool isomorphic(const TransitionSystem &a, const TransitionSystem &b);

void write_adjacency(std::ostream &os, const TransitionSystem &ts);
void write_dot(std::ostream &os, const TransitionSystem &ts);
std::string ts_summary(const TransitionSystem &ts);

} // namespace gsmv
