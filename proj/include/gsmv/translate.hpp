#pragma once

#include "gsmv/dcds.hpp"
#include "gsmv/engine.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gsmv {

// Instance bounds per artifact type (instance-bounded execution).
struct ContainerConfig {
    std::map<std::string, std::size_t> bounds;
    std::size_t n_max() const;
};

// "Order=1,Item=2"
ContainerConfig parse_container_config(const std::string &text);

// Checks that every type is bounded (bounds >= 1) and the initial instances
// fit; returns the snapshot with the remaining containers blank.
Snapshot apply_containers(const GsmModel &model, const Snapshot &snap, const ContainerConfig &config);

// Column layout of the R_att relation of one artifact type:
// (id, fr, attributes..., stage flags..., milestone flags...).
struct AttLayout {
    std::string relation;
    std::vector<std::string> attributes;
    std::vector<std::string> stages;      // flatten_stages order
    std::vector<std::string> milestones;
    std::size_t arity() const { return 2 + attributes.size() + stages.size() + milestones.size(); }
    std::size_t attribute_column(const std::string &a) const;
    std::size_t status_column(const StatusRef &s) const;
};

// Where a reception service call feeds its result.
struct PayloadService {
    std::string artifact;
    std::string event;
    std::string slot;
};

// Which earlier micro-steps a PAC rule's CA rule waits for: every rule before
// it in the stratified order (one interleaving per B-step), or only its direct
// predecessors in the dependency DAG (all linear extensions).
enum class ExecGuard { TotalOrder, Dependencies };

struct TranslationMap {
    std::shared_ptr<const CompiledModel> compiled;
    std::optional<ContainerConfig> containers;
    ExecGuard exec_guard = ExecGuard::TotalOrder;

    std::map<std::string, AttLayout> att;  // per artifact type
    std::string block = "Block";
    std::string exec = "Exec";
    std::map<std::string, std::map<StatusRef, std::string>> chg;  // type -> status -> relation
    std::map<std::string, std::string> msg_in;   // per lifecycle type
    std::map<std::string, std::string> srv_in;
    std::map<std::string, std::string> out;

    std::map<std::string, std::string> rule_to_ca;  // PAC rule id -> CA rule
    std::map<std::string, std::pair<std::string, std::string>> reception;  // CA rule -> (artifact, event)
    std::map<std::string, std::string> finalization;                        // CA rule -> artifact
    std::map<std::string, PayloadService> services;
    std::set<std::string> auxiliary;  // relations dropped by filter_state
    std::set<Value> constants;        // never renamed

    std::size_t exec_arity() const;
};

struct Translation {
    DcdsSpec spec;
    TranslationMap map;
};

// One reception CA rule per event type, one micro-step CA rule per PAC rule
// and one finalization rule per artifact type with a lifecycle. Every action
// copies the relations it does not change explicitly.
Translation translate(const CompiledModel &cm, const std::optional<ContainerConfig> &containers = std::nullopt,
                      ExecGuard guard = ExecGuard::TotalOrder);

// Re-targets a translation to instance-bounded execution: blank containers in
// the initial database, creations take the least free container (disabled
// when none is free), deletions blank the container.
Translation apply_container_semantics(const DcdsSpec &spec, const TranslationMap &map,
                                      const ContainerConfig &containers);

bool is_unblocked(const TranslationMap &map, const DbInstance &db);

struct FilterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Projects away the auxiliary relations; defined on unblocked states only.
Snapshot filter_state(const TranslationMap &map, const DbInstance &db);

// The unblocked database encoding a stable snapshot (inverse of filter_state).
DbInstance encode_snapshot(const TranslationMap &map, const Snapshot &snap);

// Cardinality bounds on the auxiliary relations, one message per violation.
std::vector<std::string> auxiliary_bound_violations(const TranslationMap &map, const DbInstance &db);

// Human-readable PAC rule -> CA rule mapping with the CA rule text.
std::string mapping_report(const Translation &t);

} // namespace gsmv
