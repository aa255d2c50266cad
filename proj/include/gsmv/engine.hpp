#pragma once

#include "gsmv/model.hpp"
#include "gsmv/pac.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gsmv {

// A model together with its PAC rules and their stratification.
struct CompiledModel {
    GsmModel model;
    std::vector<PacRule> rules;
    RuleOrder order;
};

// Throws CycleError for non-stratifiable models.
CompiledModel compile(GsmModel model);

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MicroStep {
    std::string rule;  // rule id, or "incorporate" for the payload step
    std::uint64_t pre_hash = 0;
    std::uint64_t post_hash = 0;
    std::optional<StatusLiteral> toggled;
    std::optional<std::string> dispatched;  // task whose service call was sent
};

struct OutgoingEvent {
    std::string task;
    Value target;
    bool operator==(const OutgoingEvent &) const = default;
};

struct BStepTrace {
    EventInstance event;
    std::vector<MicroStep> steps;
    std::vector<OutgoingEvent> outgoing;
};

struct BStepOptions {
    // Rule evaluation order (indices into rules); defaults to the stratified one.
    const std::vector<std::size_t> *order = nullptr;
    // Snapshot hashes in the trace cost a canonicalization each.
    bool hashes = true;
};

// Payload slots an incoming event of `type` must carry in `snap`: the event
// type's declared payload plus "id" for deletions, and for creations unless
// the snapshot is instance-bounded.
std::vector<std::string> payload_slots(const GsmModel &model, const EventType &type, const Snapshot &snap);

// Why `e` cannot be incorporated into `snap`, or nullopt if it can.
std::optional<std::string> rejection_reason(const CompiledModel &cm, const Snapshot &snap, const EventInstance &e);

// One B-step. Throws EngineError when the event is rejected.
std::pair<Snapshot, BStepTrace> b_step(const CompiledModel &cm, const Snapshot &snap, const EventInstance &e,
                                       const BStepOptions &options = {});

struct ScriptError : EngineError {
    ScriptError(std::size_t index_, const std::string &msg)
        : EngineError("event " + std::to_string(index_ + 1) + ": " + msg), index(index_) {}
    std::size_t index;
};

std::vector<std::pair<Snapshot, BStepTrace>> run_script(const CompiledModel &cm, const Snapshot &s0,
                                                        const std::vector<EventInstance> &events);

std::string trace_to_text(const BStepTrace &trace);
nlohmann::json trace_to_json(const BStepTrace &trace);

} // namespace gsmv
