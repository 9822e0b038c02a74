#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/core_model.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"

namespace veldt::compliance {

struct Regime {
    std::string id;
    std::string display;
    int retention_years = 0;
    std::optional<int> breach_sla_hours;  // absent = no notification duty modeled
    std::optional<std::string> tier_model;
    std::string breach_format;
};

class RegimeRegistry {
public:
    static const RegimeRegistry& builtin();
    static RegimeRegistry from_json(const nlohmann::json& doc);

    const Regime* find(std::string_view id) const;
    const std::vector<Regime>& all() const { return regimes_; }

    // Regimes applicable to the classes: unconditional implications plus
    // conditional ones (e.g. financial) that are already in declared scope.
    std::set<std::string> implied_regimes(const std::set<model::DataClass>& classes,
                                          const std::set<std::string>& declared_scope) const;

private:
    std::vector<Regime> regimes_;
    std::map<std::string, std::size_t> by_id_;
    std::map<std::string, std::vector<std::string>> class_implications_;
    std::map<std::string, std::vector<std::string>> conditional_implications_;
};

// Retention floors compare in whole years (365-day years when converted to
// an instant). The maximum applicable floor governs.
int required_retention_years(const RegimeRegistry& registry, const std::set<std::string>& regimes,
                             const std::set<model::DataClass>& classes);
std::int64_t retention_floor_micros(int years);

struct RegimeObligation {
    std::string regime;
    std::string display;
    int retention_years = 0;
    std::optional<int> breach_sla_hours;
    std::optional<std::string> tier_model;
};

struct ComplianceSummary {
    std::string agent_key;
    std::vector<RegimeObligation> obligations;  // sorted by regime id
    int governing_retention_years = 0;
};

ComplianceSummary summary_for(const RegimeRegistry& registry, const model::AgentDefinition& def);

struct BreachNotification {
    std::string tenant_id;
    std::string incident_id;
    std::string regime;
    std::string format;
    Timestamp created_at;
    std::optional<Timestamp> due_at;  // created_at + SLA when the regime has one
};

// Fans one incident out to every applicable regime that carries a breach
// SLA. Idempotent on (incident_id, regime): re-emission returns only rows
// that were newly created.
std::vector<BreachNotification> emit_breach_notifications(
    storage::Storage& store, const RegimeRegistry& registry, std::string_view tenant,
    std::string_view incident_id, const std::set<std::string>& regimes,
    const std::set<model::DataClass>& classes, Timestamp now);

nlohmann::json to_json(const BreachNotification& n);
nlohmann::json to_json(const ComplianceSummary& s);

}  // namespace veldt::compliance
