#include "veldt/evidence.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace veldt::evidence {
namespace {

constexpr std::string_view kStore = "evidence";
constexpr std::string_view kCutStore = "cut_ledger";

std::string seq_key_part(std::int64_t seq) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%012lld", static_cast<long long>(seq));
    return buf;
}

std::optional<crypto::Bytes> run_key_provider(const char* command) {
    FILE* pipe = ::popen(command, "r");
    if (!pipe) return std::nullopt;
    std::string output;
    char buf[256];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    const int rc = ::pclose(pipe);
    if (rc != 0) return std::nullopt;
    while (!output.empty() && (output.back() == '\n' || output.back() == '\r')) output.pop_back();
    return crypto::base64_decode(output);
}

crypto::Hash256 hash_from_hex_or_throw(const std::string& hex, const char* what) {
    const auto bytes = crypto::from_hex(hex);
    if (!bytes || bytes->size() != 32)
        throw canonical::CanonicalizationError(std::string("bad hash field: ") + what);
    crypto::Hash256 out{};
    std::copy(bytes->begin(), bytes->end(), out.begin());
    return out;
}

std::optional<ChainCut> latest_cut(const storage::Storage& store, std::string_view tenant,
                                   std::string_view invocation) {
    const auto row = store.get(kCutStore, storage::make_key({tenant, invocation}));
    if (!row) return std::nullopt;
    const auto& cuts = row->at("cuts");
    if (!cuts.is_array() || cuts.empty()) return std::nullopt;
    const auto& last = cuts.back();
    ChainCut cut;
    cut.cut_seq = last.at("cut_seq").get<std::int64_t>();
    cut.surviving_head = hash_from_hex_or_throw(last.at("surviving_head").get<std::string>(), "cut");
    cut.pruned_at = parse_iso8601(last.at("pruned_at").get<std::string>()).value_or(Timestamp{});
    return cut;
}

}  // namespace

std::string_view to_string(ChainStatus s) {
    switch (s) {
        case ChainStatus::valid: return "valid";
        case ChainStatus::payload_tamper: return "payload_tamper";
        case ChainStatus::chain_break: return "chain_break";
        case ChainStatus::clean_cut: return "clean_cut";
    }
    return "?";
}

SigningKey resolve_signing_key() {
    if (const char* provider = std::getenv("KYA_EVIDENCE_KEY_PROVIDER")) {
        if (auto key = run_key_provider(provider); key && !key->empty())
            return {std::move(*key), false};
        std::fprintf(stderr, "veldt: evidence key provider failed, falling back\n");
    }
    if (const char* b64 = std::getenv("KYA_EVIDENCE_SIGNING_KEY")) {
        if (auto key = crypto::base64_decode(b64); key && !key->empty()) return {std::move(*key), false};
        std::fprintf(stderr, "veldt: KYA_EVIDENCE_SIGNING_KEY is not valid base64, falling back\n");
    }
    return {crypto::random_bytes(32), true};
}

const SigningKey& process_signing_key() {
    static SigningKey key = [] {
        auto k = resolve_signing_key();
        if (k.ephemeral)
            std::fprintf(stderr,
                         "veldt: no evidence signing key configured; using a process-random key. "
                         "Chains signed this way cannot be verified by other processes.\n");
        return k;
    }();
    return key;
}

crypto::Hash256 chain_seed(const SigningKey& key, std::string_view tenant, std::string_view invocation) {
    std::string input;
    input.reserve(kSeedTag.size() + tenant.size() + invocation.size() + 2);
    input += kSeedTag;
    input.push_back('\x1f');
    input += tenant;
    input.push_back('\x1f');
    input += invocation;
    return crypto::hmac_sha256(key.key, crypto::as_bytes(input));
}

canonical::Value event_signing_view(const EvidenceEvent& event) {
    canonical::ValueMap m;
    m.emplace("tenant_id", event.tenant_id);
    m.emplace("invocation_id", event.invocation_id);
    m.emplace("seq", event.seq);
    m.emplace("kind", std::string(model::to_string(event.kind)));
    m.emplace("payload", event.payload);
    m.emplace("occurred_at", event.occurred_at);
    std::vector<std::string> tags;
    for (const auto t : event.sensitivity_tags) tags.emplace_back(model::to_string(t));
    m.emplace("sensitivity_tags", canonical::string_set(tags));
    m.emplace("actor_agent_key",
              event.actor_agent_key ? canonical::Value(*event.actor_agent_key) : canonical::Value(nullptr));
    return canonical::Value(std::move(m));
}

crypto::Hash256 event_hash(const SigningKey& key, const crypto::Hash256& prev,
                           const EvidenceEvent& event) {
    std::string data(reinterpret_cast<const char*>(prev.data()), prev.size());
    data += canonical::canonical_bytes(event_signing_view(event));
    return crypto::hmac_sha256(key.key, crypto::as_bytes(data));
}

nlohmann::json to_json(const EvidenceEvent& event) {
    nlohmann::json tags = nlohmann::json::array();
    for (const auto t : event.sensitivity_tags) tags.push_back(std::string(model::to_string(t)));
    return {
        {"tenant_id", event.tenant_id},
        {"invocation_id", event.invocation_id},
        {"seq", event.seq},
        {"kind", std::string(model::to_string(event.kind))},
        {"payload", canonical::to_json(event.payload)},
        {"occurred_at", format_iso8601(event.occurred_at)},
        {"sensitivity_tags", tags},
        {"actor_agent_key",
         event.actor_agent_key ? nlohmann::json(*event.actor_agent_key) : nlohmann::json(nullptr)},
        {"prev_hash", crypto::to_hex(event.prev_hash)},
        {"signed_hash", crypto::to_hex(event.signed_hash)},
    };
}

EvidenceEvent event_from_json(const nlohmann::json& row) {
    EvidenceEvent e;
    e.tenant_id = row.at("tenant_id").get<std::string>();
    e.invocation_id = row.at("invocation_id").get<std::string>();
    e.seq = row.at("seq").get<std::int64_t>();
    const auto kind = model::parse_evidence_kind(row.at("kind").get<std::string>());
    if (!kind) throw canonical::CanonicalizationError("unknown evidence kind in stored event");
    e.kind = *kind;
    e.payload = canonical::from_json(row.at("payload"));
    const auto at = parse_iso8601(row.at("occurred_at").get<std::string>());
    if (!at) throw canonical::CanonicalizationError("bad occurred_at in stored event");
    e.occurred_at = *at;
    for (const auto& t : row.at("sensitivity_tags")) {
        const auto dc = model::parse_data_class(t.get<std::string>());
        if (dc) e.sensitivity_tags.insert(*dc);
    }
    if (row.contains("actor_agent_key") && !row["actor_agent_key"].is_null())
        e.actor_agent_key = row["actor_agent_key"].get<std::string>();
    e.prev_hash = hash_from_hex_or_throw(row.at("prev_hash").get<std::string>(), "prev_hash");
    e.signed_hash = hash_from_hex_or_throw(row.at("signed_hash").get<std::string>(), "signed_hash");
    return e;
}

EvidenceEvent append_event(storage::Storage& store, std::string_view tenant,
                           std::string_view invocation, model::EvidenceKind kind,
                           canonical::Value payload, Timestamp occurred_at,
                           std::set<model::DataClass> sensitivity_tags,
                           std::optional<std::string> actor_agent_key, const SigningKey* key) {
    const SigningKey& k = key ? *key : process_signing_key();
    return store.with_chain_lock(tenant, invocation, [&] {
        EvidenceEvent event;
        event.tenant_id = std::string(tenant);
        event.invocation_id = std::string(invocation);
        event.kind = kind;
        event.payload = std::move(payload);
        event.occurred_at = occurred_at;
        event.sensitivity_tags = std::move(sensitivity_tags);
        event.actor_agent_key = std::move(actor_agent_key);

        const auto prefix = storage::make_key({tenant, invocation}) + '\x1f';
        const auto rows = store.scan_prefix(kStore, prefix);
        if (rows.empty()) {
            // A fully pruned chain resumes after its recorded cut so seqs
            // stay monotonic and verification still sees a clean cut.
            if (const auto cut = latest_cut(store, tenant, invocation)) {
                event.seq = cut->cut_seq;
                event.prev_hash = cut->surviving_head;
            } else {
                event.seq = 0;
                event.prev_hash = chain_seed(k, tenant, invocation);
            }
        } else {
            const auto tail = event_from_json(rows.back().second);
            event.seq = tail.seq + 1;
            event.prev_hash = tail.signed_hash;
        }
        event.signed_hash = event_hash(k, event.prev_hash, event);
        store.put(kStore, prefix + seq_key_part(event.seq), to_json(event));
        return event;
    });
}

std::vector<EvidenceEvent> load_chain(const storage::Storage& store, std::string_view tenant,
                                      std::string_view invocation) {
    const auto prefix = storage::make_key({tenant, invocation}) + '\x1f';
    std::vector<EvidenceEvent> out;
    for (const auto& [key, row] : store.scan_prefix(kStore, prefix)) out.push_back(event_from_json(row));
    return out;
}

VerificationReport verify_chain(const storage::Storage& store, std::string_view tenant,
                                std::string_view invocation, const SigningKey* key) {
    const SigningKey& k = key ? *key : process_signing_key();
    VerificationReport report;
    const auto chain = load_chain(store, tenant, invocation);
    const auto cut = latest_cut(store, tenant, invocation);
    report.events_checked = static_cast<std::int64_t>(chain.size());

    if (chain.empty()) {
        if (cut) {
            report.status = ChainStatus::clean_cut;
            report.cut_seq = cut->cut_seq;
            report.detail = "chain fully pruned with ledger-recorded cut";
        } else {
            report.detail = "empty chain";
        }
        return report;
    }

    bool have_cut = false;

    // Linkage pass.
    const auto& first = chain.front();
    if (first.seq == 0) {
        if (first.prev_hash != chain_seed(k, tenant, invocation)) {
            report.status = ChainStatus::chain_break;
            report.failed_seq = 0;
            report.detail = "head does not descend from the chain seed";
            return report;
        }
    } else {
        if (!cut || cut->cut_seq != first.seq || cut->surviving_head != first.prev_hash) {
            report.status = ChainStatus::chain_break;
            report.failed_seq = first.seq;
            report.detail = "chain starts mid-sequence without a matching ledger cut";
            return report;
        }
        have_cut = true;
        report.cut_seq = cut->cut_seq;
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        if (chain[i].seq != chain[i - 1].seq + 1 || chain[i].prev_hash != chain[i - 1].signed_hash) {
            report.status = ChainStatus::chain_break;
            report.failed_seq = chain[i].seq;
            report.detail = "prev_hash does not match predecessor's signed hash";
            return report;
        }
    }

    // Payload pass.
    for (const auto& event : chain) {
        if (event_hash(k, event.prev_hash, event) != event.signed_hash) {
            report.status = ChainStatus::payload_tamper;
            report.failed_seq = event.seq;
            report.detail = "recomputed event hash does not match stored hash";
            return report;
        }
    }

    report.status = have_cut ? ChainStatus::clean_cut : ChainStatus::valid;
    if (have_cut) report.detail = "verified above a ledger-recorded cut";
    return report;
}

PruneReport prune_expired_evidence(storage::Storage& store, const compliance::RegimeRegistry& registry,
                                   std::string_view tenant, const std::set<std::string>& tenant_regimes,
                                   Timestamp now) {
    PruneReport report;

    // Group this tenant's events by invocation.
    const auto tenant_prefix = std::string(tenant) + '\x1f';
    std::map<std::string, std::vector<EvidenceEvent>> chains;
    for (const auto& [key, row] : store.scan_prefix("evidence", tenant_prefix))
        chains[row.at("invocation_id").get<std::string>()].push_back(event_from_json(row));

    for (auto& [invocation, chain] : chains) {
        store.with_chain_lock(tenant, invocation, [&] {
            std::size_t cut_at = 0;  // events [0, cut_at) are prunable
            for (const auto& event : chain) {
                const int years =
                    compliance::required_retention_years(registry, tenant_regimes, event.sensitivity_tags);
                const auto age = now.micros - event.occurred_at.micros;
                if (age > compliance::retention_floor_micros(years))
                    ++cut_at;
                else
                    break;
            }
            if (cut_at == 0) return;

            const auto prefix = storage::make_key({tenant, invocation}) + '\x1f';
            for (std::size_t i = 0; i < cut_at; ++i)
                store.erase("evidence", prefix + seq_key_part(chain[i].seq));
            report.events_pruned += static_cast<std::int64_t>(cut_at);

            ChainCut cut;
            if (cut_at < chain.size()) {
                cut.cut_seq = chain[cut_at].seq;
                cut.surviving_head = chain[cut_at].prev_hash;
            } else {
                cut.cut_seq = chain.back().seq + 1;
                cut.surviving_head = chain.back().signed_hash;
            }
            cut.pruned_at = now;
            report.cuts.emplace_back(invocation, cut.cut_seq);

            const auto ledger_key = storage::make_key({tenant, invocation});
            store.upsert("cut_ledger", ledger_key, [&](std::optional<nlohmann::json> existing) {
                nlohmann::json row = existing.value_or(nlohmann::json{
                    {"tenant_id", std::string(tenant)},
                    {"invocation_id", invocation},
                    {"cuts", nlohmann::json::array()},
                });
                row["cuts"].push_back({{"cut_seq", cut.cut_seq},
                                       {"surviving_head", crypto::to_hex(cut.surviving_head)},
                                       {"pruned_at", format_iso8601(cut.pruned_at)}});
                return row;
            });
        });
    }
    return report;
}

}  // namespace veldt::evidence
