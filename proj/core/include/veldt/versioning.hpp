#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/core_model.hpp"
#include "veldt/crypto.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"

namespace veldt::versioning {

struct VersionNotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DeclaredHashUnknown : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedSignature : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Append-only definition history. Two timestamp axes: occurred_at is the
// caller's clock (when the change happened), created_at is the storage
// clock (when it was ingested); their delta exposes pipeline lag.
struct VersionSnapshot {
    std::string tenant_id;
    std::string agent_key;
    std::int64_t version_no = 0;  // starts at 1
    model::AgentDefinition definition;
    std::string definition_hash;  // lowercase hex
    Timestamp occurred_at;
    Timestamp created_at;
    std::optional<std::string> parent_agent_key;
    std::string note;
};

nlohmann::json to_json(const VersionSnapshot& snapshot);
VersionSnapshot snapshot_from_json(const nlohmann::json& row);

VersionSnapshot snapshot(storage::Storage& store, std::string_view tenant,
                         const model::AgentDefinition& def, Timestamp occurred_at,
                         std::optional<std::string> parent_agent_key = std::nullopt,
                         std::string_view note = "", Timestamp created_at = now_utc());

std::optional<VersionSnapshot> find_version(const storage::Storage& store, std::string_view tenant,
                                            std::string_view agent_key, std::int64_t version_no);
std::optional<VersionSnapshot> latest_version(const storage::Storage& store,
                                              std::string_view tenant,
                                              std::string_view agent_key);
// Latest snapshot whose definition hash matches (identical definitions may
// share a hash across versions).
std::optional<VersionSnapshot> find_by_hash(const storage::Storage& store, std::string_view tenant,
                                            std::string_view hash_hex);
std::vector<VersionSnapshot> history(const storage::Storage& store, std::string_view tenant,
                                     std::string_view agent_key);

struct FieldChange {
    std::string field;
    nlohmann::json old_value;
    nlohmann::json new_value;
};

struct DriftDiff {
    std::vector<FieldChange> changes;
    std::vector<std::string> changed_fields() const;
};

nlohmann::json to_json(const DriftDiff& diff);

// Hash-compare first; on mismatch, diff the identity projections of the
// declared snapshot and the live definition. Operational fields never
// appear in the diff. A detected drift is recorded on the tenant's
// drift-audit evidence chain.
std::optional<DriftDiff> detect_drift(storage::Storage& store, std::string_view tenant,
                                      std::string_view declared_hash_hex,
                                      const model::AgentDefinition& current_def,
                                      Timestamp now = now_utc());

// Append-only rollback: a new version carrying the old definition.
VersionSnapshot rollback_to(storage::Storage& store, std::string_view tenant,
                            std::string_view agent_key, std::int64_t old_version,
                            Timestamp occurred_at = now_utc());

// Risk inheritance down the extends lineage: direct children +8,
// grandchildren +4, great-grandchildren +2, anything deeper +1. Bounded by
// the same traversal budget as the delegation graph.
std::vector<std::pair<std::string, int>> propagate_lineage_elevation(
    const std::map<std::string, std::vector<std::string>>& children_of,
    const std::string& parent_agent_key);

// parent -> children adjacency out of the extends fields.
std::map<std::string, std::vector<std::string>> lineage_adjacency(
    const std::vector<model::AgentDefinition>& defs);

// Invocation ledger: one row per run, carrying configured-vs-exercised
// governance mode. Doubles as the observation count consumed by the
// delegation-trust premium's cold-start gate.
struct InvocationRecord {
    std::string tenant_id;
    std::string agent_key;
    std::int64_t invocation_no = 0;
    model::HumanLoopMode configured_mode = model::HumanLoopMode::none;
    model::HumanLoopMode exercised_mode = model::HumanLoopMode::none;
    Timestamp at;
};

InvocationRecord record_invocation(storage::Storage& store, std::string_view tenant,
                                   std::string_view agent_key,
                                   model::HumanLoopMode configured_mode,
                                   model::HumanLoopMode exercised_mode,
                                   Timestamp at = now_utc());

std::int64_t count_invocations(const storage::Storage& store, std::string_view tenant,
                               std::string_view agent_key);

struct ModeDistribution {
    std::map<model::HumanLoopMode, std::int64_t> exercised_counts;
    std::int64_t total = 0;
    double configured_share = 0;
    bool gap_flag = false;  // configured mode exercised below threshold
};

ModeDistribution mode_distribution(const storage::Storage& store, std::string_view tenant,
                                   std::string_view agent_key,
                                   model::HumanLoopMode configured_mode,
                                   double threshold = 0.5, std::int64_t min_invocations = 20);

// Ed25519 over the definition's identity hash bytes. A successful
// verification is evidence-chained.
bool verify_definition_signature(storage::Storage& store, std::string_view tenant,
                                 const model::AgentDefinition& def, const crypto::Bytes& signature,
                                 const crypto::Bytes& operator_public_key,
                                 Timestamp now = now_utc());

}  // namespace veldt::versioning
