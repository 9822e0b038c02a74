#include "veldt/compliance.hpp"

#include <algorithm>

#include "veldt/regimes_data.hpp"

namespace veldt::compliance {

const RegimeRegistry& RegimeRegistry::builtin() {
    static const RegimeRegistry instance = from_json(nlohmann::json::parse(detail::kRegimesJson));
    return instance;
}

RegimeRegistry RegimeRegistry::from_json(const nlohmann::json& doc) {
    RegimeRegistry reg;
    for (const auto& row : doc.at("regimes")) {
        Regime r;
        r.id = row.at("id").get<std::string>();
        r.display = row.at("display").get<std::string>();
        r.retention_years = row.at("retention_years").get<int>();
        if (row.contains("breach_sla_hours") && !row["breach_sla_hours"].is_null())
            r.breach_sla_hours = row["breach_sla_hours"].get<int>();
        if (row.contains("tier_model") && !row["tier_model"].is_null())
            r.tier_model = row["tier_model"].get<std::string>();
        r.breach_format = row.value("breach_format", r.display);
        reg.by_id_[r.id] = reg.regimes_.size();
        reg.regimes_.push_back(std::move(r));
    }
    if (doc.contains("class_implications"))
        for (const auto& [cls, rs] : doc["class_implications"].items())
            reg.class_implications_[cls] = rs.get<std::vector<std::string>>();
    if (doc.contains("conditional_implications"))
        for (const auto& [cls, rs] : doc["conditional_implications"].items())
            reg.conditional_implications_[cls] = rs.get<std::vector<std::string>>();
    return reg;
}

const Regime* RegimeRegistry::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return nullptr;
    return &regimes_[it->second];
}

std::set<std::string> RegimeRegistry::implied_regimes(const std::set<model::DataClass>& classes,
                                                      const std::set<std::string>& declared_scope) const {
    std::set<std::string> out;
    for (const auto c : classes) {
        const std::string name(model::to_string(c));
        if (const auto it = class_implications_.find(name); it != class_implications_.end())
            out.insert(it->second.begin(), it->second.end());
        if (const auto it = conditional_implications_.find(name); it != conditional_implications_.end())
            for (const auto& r : it->second)
                if (declared_scope.contains(r)) out.insert(r);
    }
    return out;
}

int required_retention_years(const RegimeRegistry& registry, const std::set<std::string>& regimes,
                             const std::set<model::DataClass>& classes) {
    std::set<std::string> applicable = regimes;
    const auto implied = registry.implied_regimes(classes, regimes);
    applicable.insert(implied.begin(), implied.end());
    int years = 0;
    for (const auto& id : applicable)
        if (const auto* r = registry.find(id)) years = std::max(years, r->retention_years);
    return years;
}

std::int64_t retention_floor_micros(int years) {
    return static_cast<std::int64_t>(years) * 365 * kMicrosPerDay;
}

ComplianceSummary summary_for(const RegimeRegistry& registry, const model::AgentDefinition& def) {
    ComplianceSummary summary;
    summary.agent_key = def.agent_key;
    std::set<std::string> applicable = def.compliance_scope;
    const auto implied = registry.implied_regimes(def.data_classes, def.compliance_scope);
    applicable.insert(implied.begin(), implied.end());
    for (const auto& id : applicable) {
        const auto* r = registry.find(id);
        if (!r) continue;
        summary.obligations.push_back({r->id, r->display, r->retention_years, r->breach_sla_hours, r->tier_model});
        summary.governing_retention_years = std::max(summary.governing_retention_years, r->retention_years);
    }
    return summary;
}

std::vector<BreachNotification> emit_breach_notifications(
    storage::Storage& store, const RegimeRegistry& registry, std::string_view tenant,
    std::string_view incident_id, const std::set<std::string>& regimes,
    const std::set<model::DataClass>& classes, Timestamp now) {
    std::set<std::string> applicable = regimes;
    const auto implied = registry.implied_regimes(classes, regimes);
    applicable.insert(implied.begin(), implied.end());

    std::vector<BreachNotification> created;
    for (const auto& id : applicable) {
        const auto* r = registry.find(id);
        if (!r || !r->breach_sla_hours) continue;

        BreachNotification n;
        n.tenant_id = std::string(tenant);
        n.incident_id = std::string(incident_id);
        n.regime = r->id;
        n.format = r->breach_format;
        n.created_at = now;
        n.due_at = Timestamp{now.micros + static_cast<std::int64_t>(*r->breach_sla_hours) * kMicrosPerHour};

        const auto key = storage::make_key({tenant, incident_id, r->id});
        bool inserted = false;
        store.upsert("breach_notifications", key, [&](std::optional<nlohmann::json> existing) {
            if (existing) return *existing;  // UNIQUE(incident_id, regime)
            inserted = true;
            return to_json(n);
        });
        if (inserted) created.push_back(std::move(n));
    }
    return created;
}

nlohmann::json to_json(const BreachNotification& n) {
    return {
        {"tenant_id", n.tenant_id},
        {"incident_id", n.incident_id},
        {"regime", n.regime},
        {"format", n.format},
        {"created_at", format_iso8601(n.created_at)},
        {"due_at", n.due_at ? nlohmann::json(format_iso8601(*n.due_at)) : nlohmann::json(nullptr)},
    };
}

nlohmann::json to_json(const ComplianceSummary& s) {
    nlohmann::json obligations = nlohmann::json::array();
    for (const auto& o : s.obligations) {
        obligations.push_back({
            {"regime", o.regime},
            {"display", o.display},
            {"retention_years", o.retention_years},
            {"breach_sla_hours",
             o.breach_sla_hours ? nlohmann::json(*o.breach_sla_hours) : nlohmann::json(nullptr)},
            {"tier_model", o.tier_model ? nlohmann::json(*o.tier_model) : nlohmann::json(nullptr)},
        });
    }
    return {{"agent_key", s.agent_key},
            {"obligations", obligations},
            {"governing_retention_years", s.governing_retention_years}};
}

}  // namespace veldt::compliance
