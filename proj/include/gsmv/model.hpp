#pragma once

#include "gsmv/condition.hpp"
#include "gsmv/value.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsmv {

enum class Sort { Scalar, IdRef };

struct Attribute {
    std::string name;
    Sort sort = Sort::Scalar;
    bool operator==(const Attribute &) const = default;
};

enum class TriggerKind {
    External,              // one-way event from the environment
    TaskReturn,            // service-call return of a task
    StageOpened,           // +S
    StageClosed,           // -S
    MilestoneAchieved,     // +m
    MilestoneInvalidated,  // -m
};

struct EventRef {
    TriggerKind kind = TriggerKind::External;
    std::string name;
    bool operator==(const EventRef &) const = default;
};

bool is_internal(TriggerKind kind);

// "on e if cond"; at least one part present.
struct Sentry {
    std::optional<EventRef> on;
    std::optional<Condition> condition;
    bool operator==(const Sentry &) const = default;
};

struct Milestone {
    std::string name;
    Sentry achieving;
    std::vector<Sentry> invalidating;
    bool operator==(const Milestone &) const = default;
};

enum class TaskKind { Update, Create, Delete };

// Right-hand side of a task assignment. Sources are evaluated simultaneously
// against the snapshot the return event is incorporated into.
struct Source {
    enum class Kind { Payload, Null, Literal, Attribute, NewId, ChildLookup };
    Kind kind = Kind::Null;
    std::string name;        // literal text / attribute name / payload slot
    std::string child_type;  // ChildLookup
    Condition filter;        // ChildLookup
    bool operator==(const Source &) const = default;
};

struct Target {
    enum class Kind { Attribute, NewAttribute, ChildAttribute };
    Kind kind = Kind::Attribute;
    std::string name;
    std::string child_type;  // ChildAttribute
    Condition filter;        // ChildAttribute
    bool operator==(const Target &) const = default;
};

struct Assignment {
    Target target;
    Source source;
    bool operator==(const Assignment &) const = default;
};

struct Task {
    std::string name;
    TaskKind kind = TaskKind::Update;
    std::string target_type;  // create/delete
    std::vector<Assignment> assignments;
    bool operator==(const Task &) const = default;

    // Payload slot names carried by the service-call return, in order.
    // Creation outside container mode additionally takes the new id from the
    // slot "id" (see kNewIdSlot).
    std::vector<std::string> payload_slots() const;
};

struct Stage {
    std::string name;
    std::vector<Sentry> guards;
    std::vector<std::string> milestones;
    std::vector<Stage> substages;
    std::optional<std::string> task;
    bool operator==(const Stage &) const = default;

    bool atomic() const { return substages.empty(); }
};

struct ArtifactType {
    std::string name;
    std::optional<std::string> parent;  // child types carry an implicit "parent" id-ref
    std::vector<Attribute> attributes;
    std::vector<Stage> stages;
    std::vector<Milestone> milestones;
    std::vector<Task> tasks;
    std::vector<std::string> events;  // one-way events addressed to this type
    bool operator==(const ArtifactType &) const = default;

    bool has_lifecycle() const { return !stages.empty(); }
    const Attribute *find_attribute(const std::string &attr) const;
    const Milestone *find_milestone(const std::string &m) const;
    const Task *find_task(const std::string &t) const;
    const Stage *find_stage(const std::string &s) const;
};

enum class EventKind { OneWay, ServiceReturn };

struct EventType {
    std::string name;
    std::string artifact;
    std::vector<std::string> payload;  // attribute names (one-way) or slot names (returns)
    EventKind kind = EventKind::OneWay;
    bool operator==(const EventType &) const = default;
};

// Per-instance state: attribute valuation and status attributes.
struct InstanceState {
    std::string type;
    std::map<std::string, Value> attrs;
    std::map<std::string, bool> stages;      // open?
    std::map<std::string, bool> milestones;  // achieved?
    bool operator==(const InstanceState &) const = default;
};

// A system snapshot. Blank artifact containers (instance-bounded execution)
// are tracked by id per artifact type and hold no data.
struct Snapshot {
    std::map<Value, InstanceState> instances;
    std::map<std::string, std::set<Value>> free_containers;
    bool instance_bounded = false;
    bool operator==(const Snapshot &) const = default;
};

struct GsmModel {
    std::string name;
    std::vector<ArtifactType> artifact_types;
    std::vector<EventType> event_types;
    Snapshot initial_snapshot;
    bool operator==(const GsmModel &) const = default;

    const ArtifactType *find_type(const std::string &type) const;
    const ArtifactType &type(const std::string &type) const;
    const EventType *find_event(const std::string &artifact, const std::string &event) const;
    std::vector<const ArtifactType *> children_of(const std::string &type) const;

    // Literals appearing anywhere in the model; these are never renamed.
    std::set<Value> constants() const;
};

// A stage together with its position in the hierarchy.
struct StageInfo {
    const Stage *stage;
    const Stage *parent;  // nullptr for top-level
    int depth;
};
std::vector<StageInfo> flatten_stages(const ArtifactType &type);
const Stage *stage_of_milestone(const ArtifactType &type, const std::string &milestone);
const Stage *stage_of_task(const ArtifactType &type, const std::string &task);

struct EventInstance {
    std::string type;
    Value target;
    std::map<std::string, Value> payload;
    bool operator==(const EventInstance &) const = default;
};
std::string to_string(const EventInstance &e);

struct ValidationError : std::runtime_error {
    ValidationError(std::string artifact_, std::string element_, const std::string &msg)
        : std::runtime_error(msg), artifact(std::move(artifact_)), element(std::move(element_)) {}
    std::string artifact;
    std::string element;
};

// Enforces every structural invariant; throws ValidationError.
void validate(const GsmModel &model);

// Builds a fresh instance of `type` with null attributes, closed stages and
// invalidated milestones.
InstanceState blank_instance(const ArtifactType &type);

bool has_creation_tasks(const GsmModel &model);

} // namespace gsmv
