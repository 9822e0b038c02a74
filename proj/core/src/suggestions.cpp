#include "veldt/suggestions.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "veldt/canonical.hpp"
#include "veldt/evidence.hpp"

namespace veldt::suggestions {
namespace {

constexpr std::string_view kStore = "weight_suggestions";
constexpr std::string_view kAuditInvocation = "weights-audit";
constexpr double kBump = 2;

std::string suggestion_key(std::string_view tenant, std::string_view id) {
    return storage::make_key({tenant, id});
}

// Factor families with a published cap: a bump never pushes the weight past
// the ceiling the additive engine would clamp it to anyway.
std::optional<double> family_cap(std::string_view key) {
    static const std::map<std::string, double, std::less<>> caps = {
        {"data_class", 60},   {"security_cap", 60}, {"provenance", 20},
        {"model_trust", 10},  {"deployment", 25},   {"supply_chain", 35},
        {"input_source", 25}, {"blast_radius", 30}, {"delegation", 25},
    };
    const auto dot = key.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    const auto it = caps.find(key.substr(0, dot));
    if (it == caps.end()) return std::nullopt;
    return it->second;
}

bool seeded_factor(std::string_view key) {
    return weights::seeded_default(weights::Scope::factor_weight, key).has_value();
}

}  // namespace

std::string_view to_string(SuggestionStatus s) {
    switch (s) {
        case SuggestionStatus::pending: return "pending";
        case SuggestionStatus::approved: return "approved";
        case SuggestionStatus::rejected: return "rejected";
    }
    return "pending";
}

std::optional<SuggestionStatus> parse_status(std::string_view s) {
    if (s == "pending") return SuggestionStatus::pending;
    if (s == "approved") return SuggestionStatus::approved;
    if (s == "rejected") return SuggestionStatus::rejected;
    return std::nullopt;
}

nlohmann::json to_json(const WeightSuggestion& s) {
    nlohmann::json doc{{"id", s.id},
                       {"tenant_id", s.tenant_id},
                       {"scope", weights::to_string(s.scope)},
                       {"key", s.key},
                       {"proposed_value", s.proposed_value},
                       {"incident_id", s.incident_id},
                       {"status", to_string(s.status)},
                       {"reviewer", s.reviewer},
                       {"created_at", format_iso8601(s.created_at)}};
    if (s.reviewed_at) doc["reviewed_at"] = format_iso8601(*s.reviewed_at);
    return doc;
}

WeightSuggestion suggestion_from_json(const nlohmann::json& doc) {
    WeightSuggestion s;
    s.id = doc.at("id").get<std::string>();
    s.tenant_id = doc.at("tenant_id").get<std::string>();
    s.scope = weights::parse_scope(doc.at("scope").get<std::string>()).value();
    s.key = doc.at("key").get<std::string>();
    s.proposed_value = doc.at("proposed_value").get<double>();
    s.incident_id = doc.at("incident_id").get<std::string>();
    s.status = parse_status(doc.at("status").get<std::string>()).value();
    s.reviewer = doc.at("reviewer").get<std::string>();
    s.created_at = parse_iso8601(doc.at("created_at").get<std::string>()).value();
    if (doc.contains("reviewed_at"))
        s.reviewed_at = parse_iso8601(doc.at("reviewed_at").get<std::string>()).value();
    return s;
}

std::optional<std::string> weight_key_for_factor(std::string_view fired_factor) {
    // "base" fires on every score, so an incident implicates nothing by it.
    if (fired_factor == "base") return std::nullopt;
    if (seeded_factor(fired_factor)) return std::string(fired_factor);

    // Score-breakdown factor names map onto weight-table families; a detail
    // after ':' selects the member.
    static const std::map<std::string, std::string, std::less<>> families = {
        {"data_sensitivity", "data_class"}, {"security_capabilities", "security_cap"},
        {"provenance", "provenance"},       {"model_trust", "model_trust"},
        {"deployment_env", "deployment"},   {"supply_chain", "supply_chain"},
        {"input_sources", "input_source"},  {"governance_mode", "governance"},
        {"access_level", "access"},         {"blast_radius", "blast_radius"},
        {"lifecycle", "lifecycle"},
    };
    static const std::map<std::string, std::string, std::less<>> bare = {
        {"write_tools", "tools.write"},
        {"admin_gated_tools", "tools.admin_gated"},
        {"can_override", "authority.can_override"},
        {"can_revert", "authority.can_revert"},
        {"delegation_depth", "delegation.per_hop"},
        {"delegation_trust_premium", "delegation.premium_high"},
        {"cost_burn", "cost.burst"},
    };

    const auto colon = fired_factor.find(':');
    const std::string_view name = fired_factor.substr(0, colon);
    if (colon != std::string_view::npos) {
        const std::string_view detail = fired_factor.substr(colon + 1);
        if (const auto fam = families.find(name); fam != families.end() && !detail.empty()) {
            std::string candidate = fam->second;
            candidate.push_back('.');
            candidate += detail;
            if (seeded_factor(candidate)) return candidate;
        }
        return std::nullopt;
    }
    if (const auto it = bare.find(name); it != bare.end()) return it->second;
    return std::nullopt;
}

std::vector<WeightSuggestion> propose_from_incident(storage::Storage& store, const Incident& incident,
                                                    Timestamp now) {
    if (!incident.resolved || incident.severity != scoring::Bucket::critical) return {};

    auto existing = list_suggestions(store, incident.tenant_id);
    std::erase_if(existing,
                  [&](const WeightSuggestion& s) { return s.incident_id != incident.incident_id; });
    if (!existing.empty()) return existing;

    std::vector<WeightSuggestion> created;
    std::set<std::string> seen;
    for (const auto& fired : incident.fired_factors) {
        const auto key = weight_key_for_factor(fired);
        if (!key || !seen.insert(*key).second) continue;

        double proposed =
            weights::effective_weight(store, incident.tenant_id, weights::Scope::factor_weight, *key) +
            kBump;
        if (const auto cap = family_cap(*key)) proposed = std::min(proposed, *cap);

        WeightSuggestion s;
        s.id = incident.incident_id + ":" + *key;
        s.tenant_id = incident.tenant_id;
        s.scope = weights::Scope::factor_weight;
        s.key = *key;
        s.proposed_value = proposed;
        s.incident_id = incident.incident_id;
        s.status = SuggestionStatus::pending;
        s.created_at = now;
        store.put(kStore, suggestion_key(incident.tenant_id, s.id), to_json(s));
        created.push_back(std::move(s));
    }
    return created;
}

namespace {

WeightSuggestion load_pending(const storage::Storage& store, std::string_view tenant,
                              std::string_view id) {
    auto found = find_suggestion(store, tenant, id);
    if (!found) throw std::out_of_range("unknown suggestion id: " + std::string(id));
    if (found->status != SuggestionStatus::pending)
        throw NotPending("suggestion " + std::string(id) + " is " +
                         std::string(to_string(found->status)));
    return *found;
}

void audit_review(storage::Storage& store, const WeightSuggestion& s, std::string_view action,
                  std::string_view reviewer, Timestamp now) {
    canonical::ValueMap payload;
    payload.emplace("action", std::string(action));
    payload.emplace("suggestion_id", s.id);
    payload.emplace("scope", std::string(weights::to_string(s.scope)));
    payload.emplace("key", s.key);
    payload.emplace("proposed_value", s.proposed_value);
    payload.emplace("incident_id", s.incident_id);
    evidence::append_event(store, s.tenant_id, kAuditInvocation, model::EvidenceKind::system_message,
                           canonical::Value(std::move(payload)), now, {}, std::string(reviewer));
}

}  // namespace

WeightSuggestion approve_suggestion(storage::Storage& store, std::string_view tenant,
                                    std::string_view id, std::string_view reviewer, Timestamp now) {
    WeightSuggestion s = load_pending(store, tenant, id);
    // May throw OverrideLoosensError (platform tightened past the proposal
    // since it was queued); the suggestion then stays pending for re-review.
    weights::set_override(store, tenant, s.scope, s.key, s.proposed_value,
                          weights::Channel::tenant, reviewer, now);
    s.status = SuggestionStatus::approved;
    s.reviewer = std::string(reviewer);
    s.reviewed_at = now;
    store.put(kStore, suggestion_key(tenant, id), to_json(s));
    audit_review(store, s, "suggestion_approved", reviewer, now);
    return s;
}

WeightSuggestion reject_suggestion(storage::Storage& store, std::string_view tenant,
                                   std::string_view id, std::string_view reviewer, Timestamp now) {
    WeightSuggestion s = load_pending(store, tenant, id);
    s.status = SuggestionStatus::rejected;
    s.reviewer = std::string(reviewer);
    s.reviewed_at = now;
    store.put(kStore, suggestion_key(tenant, id), to_json(s));
    audit_review(store, s, "suggestion_rejected", reviewer, now);
    return s;
}

std::optional<WeightSuggestion> find_suggestion(const storage::Storage& store,
                                                std::string_view tenant, std::string_view id) {
    const auto row = store.get(kStore, suggestion_key(tenant, id));
    if (!row) return std::nullopt;
    return suggestion_from_json(*row);
}

std::vector<WeightSuggestion> list_suggestions(const storage::Storage& store,
                                               std::string_view tenant,
                                               std::optional<SuggestionStatus> status) {
    std::vector<WeightSuggestion> out;
    std::string prefix(tenant);
    prefix.push_back('\x1f');
    for (const auto& [key, doc] : store.scan_prefix(kStore, prefix)) {
        auto s = suggestion_from_json(doc);
        if (status && s.status != *status) continue;
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(),
              [](const WeightSuggestion& a, const WeightSuggestion& b) { return a.id < b.id; });
    return out;
}

}  // namespace veldt::suggestions
