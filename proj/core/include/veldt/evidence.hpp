#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/canonical.hpp"
#include "veldt/compliance.hpp"
#include "veldt/core_model.hpp"
#include "veldt/crypto.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"

namespace veldt::evidence {

// Domain-separation tag mixed with tenant and invocation ids into the seed
// hash, so every (tenant, invocation) chain starts from a distinct head
// while the deployment operates a single signing key.
inline constexpr std::string_view kSeedTag = "KYA-v1-evidence";

// Three-tier resolution: an executable named by KYA_EVIDENCE_KEY_PROVIDER
// whose stdout is the base64 key; else KYA_EVIDENCE_SIGNING_KEY (base64);
// else process-random with a one-time warning to stderr (chains from such a
// key verify only within the emitting process's lifetime).
struct SigningKey {
    crypto::Bytes key;
    bool ephemeral = false;
};

SigningKey resolve_signing_key();
const SigningKey& process_signing_key();

struct EvidenceEvent {
    std::string tenant_id;
    std::string invocation_id;
    std::int64_t seq = 0;
    model::EvidenceKind kind = model::EvidenceKind::system_message;
    canonical::Value payload;
    Timestamp occurred_at;
    std::set<model::DataClass> sensitivity_tags;
    std::optional<std::string> actor_agent_key;
    crypto::Hash256 prev_hash{};
    crypto::Hash256 signed_hash{};
};

crypto::Hash256 chain_seed(const SigningKey& key, std::string_view tenant, std::string_view invocation);

// The signed portion of the event (everything except the two hash fields),
// as the canonical value whose bytes feed the HMAC.
canonical::Value event_signing_view(const EvidenceEvent& event);
crypto::Hash256 event_hash(const SigningKey& key, const crypto::Hash256& prev,
                           const EvidenceEvent& event);

nlohmann::json to_json(const EvidenceEvent& event);
EvidenceEvent event_from_json(const nlohmann::json& row);

// Appends under the chain's exclusive lock; seq is assigned contiguously.
EvidenceEvent append_event(storage::Storage& store, std::string_view tenant,
                           std::string_view invocation, model::EvidenceKind kind,
                           canonical::Value payload, Timestamp occurred_at,
                           std::set<model::DataClass> sensitivity_tags = {},
                           std::optional<std::string> actor_agent_key = std::nullopt,
                           const SigningKey* key = nullptr);

enum class ChainStatus { valid, payload_tamper, chain_break, clean_cut };
std::string_view to_string(ChainStatus);

struct VerificationReport {
    ChainStatus status = ChainStatus::valid;
    std::optional<std::int64_t> failed_seq;  // first offending seq for tamper statuses
    std::optional<std::int64_t> cut_seq;     // set when a ledger-matched cut was honored
    std::int64_t events_checked = 0;
    std::string detail;
};

// Two passes: linkage (each event's prev_hash against its predecessor's
// stored hash; the first survivor against the seed or the cut ledger), then
// payload (recomputed HMAC against the stored hash). A ledger-matched
// pruned prefix downgrades valid to clean_cut rather than failing.
VerificationReport verify_chain(const storage::Storage& store, std::string_view tenant,
                                std::string_view invocation, const SigningKey* key = nullptr);

std::vector<EvidenceEvent> load_chain(const storage::Storage& store, std::string_view tenant,
                                      std::string_view invocation);

struct ChainCut {
    std::int64_t cut_seq = 0;           // first surviving seq
    crypto::Hash256 surviving_head{};   // that event's prev_hash at prune time
    Timestamp pruned_at;
};

struct PruneReport {
    std::int64_t events_pruned = 0;
    std::vector<std::pair<std::string, std::int64_t>> cuts;  // (invocation, cut_seq)
};

// Prefix-only pruning: a chain's prefix is removed while every event in it
// is older than the maximum retention floor across the tenant's regimes and
// the regimes implied by the event's sensitivity tags. The first retained
// event stops the scan, so a long-retention entry keeps the rest of its
// chain reachable. Each cut is recorded in the cut ledger.
PruneReport prune_expired_evidence(storage::Storage& store, const compliance::RegimeRegistry& registry,
                                   std::string_view tenant, const std::set<std::string>& tenant_regimes,
                                   Timestamp now);

}  // namespace veldt::evidence
