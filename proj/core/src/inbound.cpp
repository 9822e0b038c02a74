#include "veldt/inbound.hpp"

#include <algorithm>
#include <cstdlib>

#include "veldt/canonical.hpp"
#include "veldt/evidence.hpp"

namespace veldt::inbound {
namespace {

constexpr std::string_view kStore = "pending_recommendations";
constexpr std::string_view kAuditInvocation = "inbound-audit";
constexpr std::string_view kLockSpace = "inbound";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) s.remove_suffix(1);
    return s;
}

std::string record_key(std::string_view tenant, std::string_view id) {
    return storage::make_key({tenant, id});
}

std::string routing_tenant(const RecommendationEnvelope& env) {
    return env.tenant_id.value_or("");
}

void audit_outcome(storage::Storage& store, const PendingRecommendation& rec,
                   std::string_view actor, Timestamp now) {
    canonical::ValueMap payload;
    payload.emplace("recommendation_id", rec.envelope.recommendation_id);
    payload.emplace("key_id", rec.envelope.key_id);
    payload.emplace("scope", std::string(weights::to_string(rec.envelope.scope)));
    payload.emplace("key", rec.envelope.key);
    payload.emplace("value", rec.envelope.value);
    payload.emplace("outcome", std::string(to_string(rec.status)));
    if (rec.gate_rejected) payload.emplace("gate", static_cast<std::int64_t>(*rec.gate_rejected));
    if (!rec.reason.empty()) payload.emplace("reason", rec.reason);
    evidence::append_event(store, routing_tenant(rec.envelope), kAuditInvocation,
                           model::EvidenceKind::system_message, canonical::Value(std::move(payload)),
                           now, {}, std::string(actor));
}

PendingRecommendation persist(storage::Storage& store, PendingRecommendation rec,
                              std::string_view actor, Timestamp now) {
    store.put(kStore, record_key(routing_tenant(rec.envelope), rec.envelope.recommendation_id),
              to_json(rec));
    audit_outcome(store, rec, actor, now);
    return rec;
}

}  // namespace

TrustAnchorSet parse_trust_anchors(std::string_view env_value) {
    TrustAnchorSet anchors;
    std::string_view rest = env_value;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string_view entry = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (entry.empty()) continue;

        const auto colon = entry.find(':');
        if (colon == std::string_view::npos || colon == 0)
            throw MalformedAnchor("trust anchor entry is not <keyid>:<base64-pubkey>: " +
                                  std::string(entry));
        const auto decoded = crypto::base64_decode(entry.substr(colon + 1));
        if (!decoded || decoded->size() != 32)
            throw MalformedAnchor("trust anchor public key is not 32 base64 bytes: " +
                                  std::string(entry.substr(0, colon)));
        anchors[std::string(entry.substr(0, colon))] = *decoded;
    }
    return anchors;
}

TrustAnchorSet anchors_from_env() {
    const char* raw = std::getenv(std::string(kAnchorEnvVar).c_str());
    if (raw == nullptr) return {};
    return parse_trust_anchors(raw);
}

nlohmann::json envelope_to_json(const RecommendationEnvelope& env) {
    nlohmann::json doc{{"recommendation_id", env.recommendation_id},
                       {"key_id", env.key_id},
                       {"signature", crypto::base64_encode(env.signature)},
                       {"expires_at", format_iso8601(env.expires_at)},
                       {"target",
                        {{"scope", weights::to_string(env.scope)},
                         {"key", env.key},
                         {"value", env.value}}},
                       {"rationale", env.rationale}};
    if (env.tenant_id) doc["tenant_id"] = *env.tenant_id;
    return doc;
}

RecommendationEnvelope envelope_from_json(const nlohmann::json& doc) {
    try {
        RecommendationEnvelope env;
        env.recommendation_id = doc.at("recommendation_id").get<std::string>();
        env.key_id = doc.at("key_id").get<std::string>();
        if (doc.contains("signature")) {
            const auto sig = crypto::base64_decode(doc.at("signature").get<std::string>());
            if (!sig) throw MalformedEnvelope("signature is not valid base64");
            env.signature = *sig;
        }
        const auto expires = parse_iso8601(doc.at("expires_at").get<std::string>());
        if (!expires) throw MalformedEnvelope("expires_at is not an ISO-8601 timestamp");
        env.expires_at = *expires;
        const auto& target = doc.at("target");
        const auto scope = weights::parse_scope(target.at("scope").get<std::string>());
        if (!scope) throw MalformedEnvelope("unknown weight scope: " +
                                            target.at("scope").get<std::string>());
        env.scope = *scope;
        env.key = target.at("key").get<std::string>();
        env.value = target.at("value").get<double>();
        if (doc.contains("tenant_id") && !doc.at("tenant_id").is_null())
            env.tenant_id = doc.at("tenant_id").get<std::string>();
        env.rationale = doc.value("rationale", std::string{});
        if (env.recommendation_id.empty()) throw MalformedEnvelope("recommendation_id is empty");
        return env;
    } catch (const MalformedEnvelope&) {
        throw;
    } catch (const std::exception& e) {
        throw MalformedEnvelope(std::string("envelope does not match the wire format: ") + e.what());
    }
}

std::string signing_bytes(const RecommendationEnvelope& env) {
    nlohmann::json doc = envelope_to_json(env);
    doc.erase("signature");
    return canonical::canonical_bytes(doc);
}

void sign_envelope(RecommendationEnvelope& env, std::span<const std::uint8_t> private_key) {
    const std::string msg = signing_bytes(env);
    env.signature = crypto::ed25519_sign(private_key, crypto::as_bytes(msg));
}

void verify_envelope(const RecommendationEnvelope& env, const TrustAnchorSet& anchors) {
    const auto anchor = anchors.find(env.key_id);
    if (anchor == anchors.end())
        throw UnknownKeyId("recommendation key id is not pinned: " + env.key_id);
    const std::string msg = signing_bytes(env);
    if (!crypto::ed25519_verify(anchor->second, crypto::as_bytes(msg), env.signature))
        throw SignatureInvalid("recommendation signature does not verify under key id " + env.key_id);
}

std::string_view to_string(RecStatus s) {
    switch (s) {
        case RecStatus::pending: return "pending";
        case RecStatus::applied: return "applied";
        case RecStatus::auto_applied: return "auto_applied";
        case RecStatus::rejected: return "rejected";
    }
    return "pending";
}

std::optional<RecStatus> parse_rec_status(std::string_view s) {
    if (s == "pending") return RecStatus::pending;
    if (s == "applied") return RecStatus::applied;
    if (s == "auto_applied") return RecStatus::auto_applied;
    if (s == "rejected") return RecStatus::rejected;
    return std::nullopt;
}

nlohmann::json to_json(const PendingRecommendation& rec) {
    nlohmann::json doc{{"envelope", envelope_to_json(rec.envelope)},
                       {"status", to_string(rec.status)},
                       {"reason", rec.reason},
                       {"received_at", format_iso8601(rec.received_at)}};
    if (rec.gate_rejected) doc["gate_rejected"] = *rec.gate_rejected;
    if (rec.reviewed_by) doc["reviewed_by"] = *rec.reviewed_by;
    if (rec.reviewed_at) doc["reviewed_at"] = format_iso8601(*rec.reviewed_at);
    return doc;
}

PendingRecommendation recommendation_from_json(const nlohmann::json& doc) {
    PendingRecommendation rec;
    rec.envelope = envelope_from_json(doc.at("envelope"));
    rec.status = parse_rec_status(doc.at("status").get<std::string>()).value();
    rec.reason = doc.value("reason", std::string{});
    rec.received_at = parse_iso8601(doc.at("received_at").get<std::string>()).value();
    if (doc.contains("gate_rejected")) rec.gate_rejected = doc.at("gate_rejected").get<int>();
    if (doc.contains("reviewed_by")) rec.reviewed_by = doc.at("reviewed_by").get<std::string>();
    if (doc.contains("reviewed_at"))
        rec.reviewed_at = parse_iso8601(doc.at("reviewed_at").get<std::string>()).value();
    return rec;
}

PendingRecommendation ingest_recommendation(storage::Storage& store, const RecommendationEnvelope& env,
                                            const TrustAnchorSet& anchors, Timestamp now,
                                            const AutoApplyAllowlist& allowlist) {
    if (anchors.empty())
        throw InboundDisabled("no trust anchors pinned; set " + std::string(kAnchorEnvVar));

    const std::string tenant = routing_tenant(env);
    return store.with_chain_lock(kLockSpace, env.recommendation_id, [&] {
        // An id an operator already resolved is never rolled back or
        // re-opened by a replayed envelope.
        if (auto existing = find_recommendation(store, tenant, env.recommendation_id);
            existing && existing->status != RecStatus::pending) {
            return *existing;
        }

        PendingRecommendation rec;
        rec.envelope = env;
        rec.received_at = now;

        const auto reject = [&](int gate, std::string reason) {
            rec.status = RecStatus::rejected;
            rec.gate_rejected = gate;
            rec.reason = std::move(reason);
            return persist(store, std::move(rec), "inbound-pipeline", now);
        };

        // Gate 1: signature.
        try {
            verify_envelope(env, anchors);
        } catch (const std::exception& e) {
            return reject(1, e.what());
        }

        // Gate 2: expiry at persist time.
        if (!(env.expires_at.micros > now.micros))
            return reject(2, "envelope expired at " + format_iso8601(env.expires_at));

        // Gate 3: only-tighten dominance over the committed platform value.
        if (!env.tenant_id)
            return reject(3, "platform-routed recommendation has no apply channel that "
                             "preserves only-tighten");
        const double platform = weights::platform_default(store, env.scope, env.key);
        if (!weights::dominates(env.scope, env.value, platform))
            return reject(3, "proposed value " + std::to_string(env.value) +
                                 " loosens platform default " + std::to_string(platform));

        // Gate 4: pending unless allowlisted.
        if (allowlist.count({env.scope, env.key}) == 0) {
            rec.status = RecStatus::pending;
            return persist(store, std::move(rec), "inbound-pipeline", now);
        }
        try {
            weights::set_override(store, tenant, env.scope, env.key, env.value,
                                  weights::Channel::recommendation, "auto-apply:" + env.key_id, now);
        } catch (const std::exception& e) {
            return reject(3, e.what());  // dominance re-check raced a platform write
        }
        rec.status = RecStatus::auto_applied;
        return persist(store, std::move(rec), "inbound-pipeline", now);
    });
}

PendingRecommendation approve_recommendation(storage::Storage& store, std::string_view tenant,
                                             std::string_view recommendation_id,
                                             std::string_view operator_id, Timestamp now) {
    return store.with_chain_lock(kLockSpace, recommendation_id, [&] {
        auto found = find_recommendation(store, tenant, recommendation_id);
        if (!found)
            throw std::out_of_range("unknown recommendation id: " + std::string(recommendation_id));
        if (found->status != RecStatus::pending)
            throw NotPending("recommendation " + std::string(recommendation_id) + " is " +
                             std::string(to_string(found->status)));

        PendingRecommendation rec = *found;
        rec.reviewed_by = std::string(operator_id);
        rec.reviewed_at = now;
        try {
            weights::set_override(store, tenant, rec.envelope.scope, rec.envelope.key,
                                  rec.envelope.value, weights::Channel::recommendation, operator_id,
                                  now);
        } catch (const weights::OverrideLoosensError&) {
            rec.status = RecStatus::rejected;
            rec.gate_rejected = 3;
            rec.reason = "platform default moved past the proposal before apply";
            persist(store, rec, operator_id, now);
            throw;
        }
        rec.status = RecStatus::applied;
        return persist(store, std::move(rec), operator_id, now);
    });
}

std::optional<PendingRecommendation> find_recommendation(const storage::Storage& store,
                                                         std::string_view tenant,
                                                         std::string_view recommendation_id) {
    const auto row = store.get(kStore, record_key(tenant, recommendation_id));
    if (!row) return std::nullopt;
    return recommendation_from_json(*row);
}

std::vector<PendingRecommendation> list_recommendations(const storage::Storage& store,
                                                        std::string_view tenant,
                                                        std::optional<RecStatus> status) {
    std::vector<PendingRecommendation> out;
    std::string prefix(tenant);
    prefix.push_back('\x1f');
    for (const auto& [key, doc] : store.scan_prefix(kStore, prefix)) {
        auto rec = recommendation_from_json(doc);
        if (status && rec.status != *status) continue;
        out.push_back(std::move(rec));
    }
    std::sort(out.begin(), out.end(), [](const PendingRecommendation& a, const PendingRecommendation& b) {
        return a.envelope.recommendation_id < b.envelope.recommendation_id;
    });
    return out;
}

}  // namespace veldt::inbound
