#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/crypto.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"
#include "veldt/weights.hpp"

namespace veldt::inbound {

struct MalformedAnchor : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedEnvelope : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownKeyId : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SignatureInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InboundDisabled : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotPending : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// key id -> 32-byte Ed25519 public key. Empty set disables ingestion.
using TrustAnchorSet = std::map<std::string, crypto::Bytes>;

inline constexpr std::string_view kAnchorEnvVar = "KYA_INBOUND_PUBLIC_KEY";

// Parses a comma-separated "<keyid>:<base64-pubkey>" list. Entries that are
// empty after trimming are skipped (tolerates trailing commas); anything
// else malformed throws MalformedAnchor naming the entry.
TrustAnchorSet parse_trust_anchors(std::string_view env_value);
TrustAnchorSet anchors_from_env();

struct RecommendationEnvelope {
    std::string recommendation_id;
    std::string key_id;
    crypto::Bytes signature;  // Ed25519 over signing_bytes()
    Timestamp expires_at;
    weights::Scope scope = weights::Scope::factor_weight;
    std::string key;
    double value = 0;
    std::optional<std::string> tenant_id;  // absent = platform-level proposal
    std::string rationale;
};

nlohmann::json envelope_to_json(const RecommendationEnvelope&);
RecommendationEnvelope envelope_from_json(const nlohmann::json& doc);  // throws MalformedEnvelope

// Canonical wire bytes with the signature field stripped: sorted keys, no
// whitespace, non-ASCII escaped. These are the exact bytes signed.
std::string signing_bytes(const RecommendationEnvelope&);
void sign_envelope(RecommendationEnvelope&, std::span<const std::uint8_t> private_key);

// Resolves key_id against the anchor set and verifies the signature over
// signing_bytes(). Throws UnknownKeyId or SignatureInvalid; there is no
// fallback path that proceeds on failure.
void verify_envelope(const RecommendationEnvelope&, const TrustAnchorSet& anchors);

enum class RecStatus { pending, applied, auto_applied, rejected };
std::string_view to_string(RecStatus);
std::optional<RecStatus> parse_rec_status(std::string_view);

struct PendingRecommendation {
    RecommendationEnvelope envelope;
    RecStatus status = RecStatus::pending;
    std::optional<int> gate_rejected;  // 1..4; set when status == rejected
    std::string reason;
    std::optional<std::string> reviewed_by;
    Timestamp received_at;
    std::optional<Timestamp> reviewed_at;
};

nlohmann::json to_json(const PendingRecommendation&);
PendingRecommendation recommendation_from_json(const nlohmann::json& doc);

using AutoApplyAllowlist = std::set<std::pair<weights::Scope, std::string>>;

// Runs the gates strictly in order and persists every outcome:
//   1. signature verification against the pinned anchors;
//   2. expiry, evaluated against the persist-time clock `now`, not any
//      timestamp the envelope carries;
//   3. only-tighten dominance against the committed platform default
//      (platform-routed envelopes are rejected here: no apply channel can
//      take them without bypassing the dominance gate);
//   4. status stays pending unless (scope, key) is allowlisted, in which
//      case it is applied through the recommendation weight channel and
//      marked auto_applied.
// Gate failures return a persisted rejection record naming the earliest
// failing gate; they never throw. The auto-apply transition only fires from
// pending status, so re-ingesting an id an operator already resolved never
// rolls it back. Throws InboundDisabled when the anchor set is empty.
PendingRecommendation ingest_recommendation(storage::Storage& store, const RecommendationEnvelope& env,
                                            const TrustAnchorSet& anchors, Timestamp now = now_utc(),
                                            const AutoApplyAllowlist& allowlist = {});

// Applies a pending recommendation through the recommendation weight channel
// under the operator's identity, re-checking dominance at apply time. If the
// platform default moved past the proposal since ingestion the record is
// marked rejected (gate 3) and OverrideLoosensError is rethrown to the
// caller.
PendingRecommendation approve_recommendation(storage::Storage& store, std::string_view tenant,
                                             std::string_view recommendation_id,
                                             std::string_view operator_id, Timestamp now = now_utc());

std::optional<PendingRecommendation> find_recommendation(const storage::Storage& store,
                                                         std::string_view tenant,
                                                         std::string_view recommendation_id);
std::vector<PendingRecommendation> list_recommendations(const storage::Storage& store,
                                                        std::string_view tenant,
                                                        std::optional<RecStatus> status = std::nullopt);

}  // namespace veldt::inbound
