#include "veldt/versioning.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "veldt/canonical.hpp"
#include "veldt/evidence.hpp"

namespace veldt::versioning {
namespace {

constexpr std::string_view kVersionStore = "versions";
constexpr std::string_view kInvocationStore = "invocations";
constexpr std::string_view kDriftChain = "drift-audit";

std::string pad12(std::int64_t n) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%012lld", static_cast<long long>(n));
    return buf;
}

std::string version_lock_id(std::string_view agent_key) {
    return "versions\x1f" + std::string(agent_key);
}

std::string invocation_lock_id(std::string_view agent_key) {
    return "invocations\x1f" + std::string(agent_key);
}

}  // namespace

nlohmann::json to_json(const VersionSnapshot& snapshot) {
    return {
        {"tenant_id", snapshot.tenant_id},
        {"agent_key", snapshot.agent_key},
        {"version_no", snapshot.version_no},
        {"definition", model::definition_to_json(snapshot.definition)},
        {"definition_hash", snapshot.definition_hash},
        {"occurred_at", format_iso8601(snapshot.occurred_at)},
        {"created_at", format_iso8601(snapshot.created_at)},
        {"parent_agent_key", snapshot.parent_agent_key
                                 ? nlohmann::json(*snapshot.parent_agent_key)
                                 : nlohmann::json(nullptr)},
        {"note", snapshot.note},
    };
}

VersionSnapshot snapshot_from_json(const nlohmann::json& row) {
    VersionSnapshot s;
    s.tenant_id = row.at("tenant_id").get<std::string>();
    s.agent_key = row.at("agent_key").get<std::string>();
    s.version_no = row.at("version_no").get<std::int64_t>();
    auto validated = model::validate_definition(row.at("definition"));
    if (!validated.definition)
        throw canonical::CanonicalizationError("stored version row holds an invalid definition");
    s.definition = std::move(*validated.definition);
    s.definition_hash = row.at("definition_hash").get<std::string>();
    s.occurred_at = parse_iso8601(row.at("occurred_at").get<std::string>()).value_or(Timestamp{});
    s.created_at = parse_iso8601(row.at("created_at").get<std::string>()).value_or(Timestamp{});
    if (row.contains("parent_agent_key") && !row["parent_agent_key"].is_null())
        s.parent_agent_key = row["parent_agent_key"].get<std::string>();
    s.note = row.value("note", "");
    return s;
}

VersionSnapshot snapshot(storage::Storage& store, std::string_view tenant,
                         const model::AgentDefinition& def, Timestamp occurred_at,
                         std::optional<std::string> parent_agent_key, std::string_view note,
                         Timestamp created_at) {
    return store.with_chain_lock(tenant, version_lock_id(def.agent_key), [&] {
        const auto prefix = storage::make_key({tenant, def.agent_key}) + '\x1f';
        const auto rows = store.scan_prefix(kVersionStore, prefix);
        VersionSnapshot s;
        s.tenant_id = std::string(tenant);
        s.agent_key = def.agent_key;
        s.version_no = rows.empty() ? 1 : rows.back().second.at("version_no").get<std::int64_t>() + 1;
        s.definition = def;
        s.definition_hash = model::definition_hash_hex(def);
        s.occurred_at = occurred_at;
        s.created_at = created_at;
        s.parent_agent_key = std::move(parent_agent_key);
        s.note = std::string(note);
        store.put(kVersionStore, prefix + pad12(s.version_no), to_json(s));
        return s;
    });
}

std::optional<VersionSnapshot> find_version(const storage::Storage& store, std::string_view tenant,
                                            std::string_view agent_key, std::int64_t version_no) {
    const auto key = storage::make_key({tenant, agent_key}) + '\x1f' + pad12(version_no);
    const auto row = store.get(kVersionStore, key);
    if (!row) return std::nullopt;
    return snapshot_from_json(*row);
}

std::optional<VersionSnapshot> latest_version(const storage::Storage& store,
                                              std::string_view tenant,
                                              std::string_view agent_key) {
    const auto prefix = storage::make_key({tenant, agent_key}) + '\x1f';
    const auto rows = store.scan_prefix(kVersionStore, prefix);
    if (rows.empty()) return std::nullopt;
    return snapshot_from_json(rows.back().second);
}

std::optional<VersionSnapshot> find_by_hash(const storage::Storage& store, std::string_view tenant,
                                            std::string_view hash_hex) {
    const auto prefix = std::string(tenant) + '\x1f';
    std::optional<VersionSnapshot> best;
    for (const auto& [key, row] : store.scan_prefix(kVersionStore, prefix)) {
        if (row.at("definition_hash").get<std::string>() != hash_hex) continue;
        auto s = snapshot_from_json(row);
        if (!best || s.created_at.micros >= best->created_at.micros) best = std::move(s);
    }
    return best;
}

std::vector<VersionSnapshot> history(const storage::Storage& store, std::string_view tenant,
                                     std::string_view agent_key) {
    const auto prefix = storage::make_key({tenant, agent_key}) + '\x1f';
    std::vector<VersionSnapshot> out;
    for (const auto& [key, row] : store.scan_prefix(kVersionStore, prefix))
        out.push_back(snapshot_from_json(row));
    return out;
}

std::vector<std::string> DriftDiff::changed_fields() const {
    std::vector<std::string> out;
    out.reserve(changes.size());
    for (const auto& c : changes) out.push_back(c.field);
    return out;
}

nlohmann::json to_json(const DriftDiff& diff) {
    nlohmann::json changes = nlohmann::json::array();
    for (const auto& c : diff.changes)
        changes.push_back({{"field", c.field}, {"old", c.old_value}, {"new", c.new_value}});
    return {{"drift", true}, {"changed_fields", diff.changed_fields()}, {"changes", changes}};
}

std::optional<DriftDiff> detect_drift(storage::Storage& store, std::string_view tenant,
                                      std::string_view declared_hash_hex,
                                      const model::AgentDefinition& current_def, Timestamp now) {
    if (model::definition_hash_hex(current_def) == declared_hash_hex) return std::nullopt;

    const auto declared = find_by_hash(store, tenant, declared_hash_hex);
    if (!declared)
        throw DeclaredHashUnknown("no stored snapshot carries the declared hash " +
                                  std::string(declared_hash_hex));

    const auto old_projection = model::hash_projection(declared->definition);
    const auto new_projection = model::hash_projection(current_def);
    DriftDiff diff;
    for (const auto field : model::kHashedFields) {
        const auto& old_value = old_projection.at(std::string(field));
        const auto& new_value = new_projection.at(std::string(field));
        if (canonical::canonical_bytes(old_value) == canonical::canonical_bytes(new_value))
            continue;
        diff.changes.push_back({std::string(field), canonical::to_json(old_value),
                                canonical::to_json(new_value)});
    }

    canonical::ValueMap payload;
    payload.emplace("drift", true);
    payload.emplace("agent_key", current_def.agent_key);
    payload.emplace("declared_hash", std::string(declared_hash_hex));
    payload.emplace("current_hash", model::definition_hash_hex(current_def));
    canonical::ValueList fields;
    for (const auto& field : diff.changed_fields()) fields.emplace_back(field);
    payload.emplace("changed_fields", canonical::Value(std::move(fields)));
    evidence::append_event(store, tenant, kDriftChain, model::EvidenceKind::system_message,
                           canonical::Value(std::move(payload)), now, {}, current_def.agent_key);
    return diff;
}

VersionSnapshot rollback_to(storage::Storage& store, std::string_view tenant,
                            std::string_view agent_key, std::int64_t old_version,
                            Timestamp occurred_at) {
    const auto old_snapshot = find_version(store, tenant, agent_key, old_version);
    if (!old_snapshot)
        throw VersionNotFound("no version " + std::to_string(old_version) + " for agent " +
                              std::string(agent_key));
    return snapshot(store, tenant, old_snapshot->definition, occurred_at,
                    old_snapshot->parent_agent_key,
                    "rollback to v" + std::to_string(old_version));
}

std::vector<std::pair<std::string, int>> propagate_lineage_elevation(
    const std::map<std::string, std::vector<std::string>>& children_of,
    const std::string& parent_agent_key) {
    constexpr int kMaxNodes = 5000;
    constexpr int kMaxGenerations = 50;
    const auto increment_for = [](int generation) {
        switch (generation) {
            case 1: return 8;
            case 2: return 4;
            case 3: return 2;
            default: return 1;
        }
    };

    std::vector<std::pair<std::string, int>> out;
    std::set<std::string> seen{parent_agent_key};
    std::vector<std::string> frontier{parent_agent_key};
    for (int generation = 1; generation <= kMaxGenerations && !frontier.empty(); ++generation) {
        std::vector<std::string> next;
        for (const auto& node : frontier) {
            const auto it = children_of.find(node);
            if (it == children_of.end()) continue;
            for (const auto& child : it->second) {
                if (!seen.insert(child).second) continue;
                out.emplace_back(child, increment_for(generation));
                next.push_back(child);
                if (static_cast<int>(seen.size()) > kMaxNodes) return out;
            }
        }
        frontier = std::move(next);
    }
    return out;
}

std::map<std::string, std::vector<std::string>> lineage_adjacency(
    const std::vector<model::AgentDefinition>& defs) {
    std::map<std::string, std::vector<std::string>> children_of;
    for (const auto& def : defs)
        if (def.extends) children_of[*def.extends].push_back(def.agent_key);
    return children_of;
}

InvocationRecord record_invocation(storage::Storage& store, std::string_view tenant,
                                   std::string_view agent_key,
                                   model::HumanLoopMode configured_mode,
                                   model::HumanLoopMode exercised_mode, Timestamp at) {
    return store.with_chain_lock(tenant, invocation_lock_id(agent_key), [&] {
        const auto prefix = storage::make_key({tenant, agent_key}) + '\x1f';
        const auto rows = store.scan_prefix(kInvocationStore, prefix);
        InvocationRecord rec;
        rec.tenant_id = std::string(tenant);
        rec.agent_key = std::string(agent_key);
        rec.invocation_no =
            rows.empty() ? 1 : rows.back().second.at("invocation_no").get<std::int64_t>() + 1;
        rec.configured_mode = configured_mode;
        rec.exercised_mode = exercised_mode;
        rec.at = at;
        store.put(kInvocationStore, prefix + pad12(rec.invocation_no),
                  {
                      {"tenant_id", rec.tenant_id},
                      {"agent_key", rec.agent_key},
                      {"invocation_no", rec.invocation_no},
                      {"configured_mode", std::string(model::to_string(rec.configured_mode))},
                      {"exercised_mode", std::string(model::to_string(rec.exercised_mode))},
                      {"at", format_iso8601(rec.at)},
                  });
        return rec;
    });
}

std::int64_t count_invocations(const storage::Storage& store, std::string_view tenant,
                               std::string_view agent_key) {
    const auto prefix = storage::make_key({tenant, agent_key}) + '\x1f';
    return static_cast<std::int64_t>(store.scan_prefix(kInvocationStore, prefix).size());
}

ModeDistribution mode_distribution(const storage::Storage& store, std::string_view tenant,
                                   std::string_view agent_key,
                                   model::HumanLoopMode configured_mode, double threshold,
                                   std::int64_t min_invocations) {
    ModeDistribution dist;
    const auto prefix = storage::make_key({tenant, agent_key}) + '\x1f';
    for (const auto& [key, row] : store.scan_prefix(kInvocationStore, prefix)) {
        const auto mode = model::parse_human_loop(row.at("exercised_mode").get<std::string>());
        if (!mode) continue;
        ++dist.exercised_counts[*mode];
        ++dist.total;
    }
    if (dist.total > 0) {
        const auto it = dist.exercised_counts.find(configured_mode);
        const auto matching = it == dist.exercised_counts.end() ? 0 : it->second;
        dist.configured_share = static_cast<double>(matching) / static_cast<double>(dist.total);
    }
    dist.gap_flag = dist.total >= min_invocations && dist.configured_share < threshold;
    return dist;
}

bool verify_definition_signature(storage::Storage& store, std::string_view tenant,
                                 const model::AgentDefinition& def, const crypto::Bytes& signature,
                                 const crypto::Bytes& operator_public_key, Timestamp now) {
    if (signature.size() != 64)
        throw MalformedSignature("Ed25519 signatures are 64 bytes (got " +
                                 std::to_string(signature.size()) + ")");
    if (operator_public_key.size() != 32)
        throw MalformedSignature("Ed25519 public keys are 32 bytes");
    const auto hash = model::definition_hash(def);
    const crypto::Bytes message(hash.begin(), hash.end());
    const bool ok = crypto::ed25519_verify(operator_public_key, message, signature);
    if (ok) {
        canonical::ValueMap payload;
        payload.emplace("definition_signed", true);
        payload.emplace("agent_key", def.agent_key);
        payload.emplace("definition_hash", model::definition_hash_hex(def));
        evidence::append_event(store, tenant, kDriftChain, model::EvidenceKind::system_message,
                               canonical::Value(std::move(payload)), now, {}, def.agent_key);
    }
    return ok;
}

}  // namespace veldt::versioning
