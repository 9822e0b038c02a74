#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/scoring.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"
#include "veldt/weights.hpp"

namespace veldt::suggestions {

struct NotPending : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SuggestionStatus { pending, approved, rejected };
std::string_view to_string(SuggestionStatus);
std::optional<SuggestionStatus> parse_status(std::string_view);

struct WeightSuggestion {
    std::string id;
    std::string tenant_id;
    weights::Scope scope = weights::Scope::factor_weight;
    std::string key;
    double proposed_value = 0;
    std::string incident_id;
    SuggestionStatus status = SuggestionStatus::pending;
    std::string reviewer;  // empty until reviewed
    Timestamp created_at;
    std::optional<Timestamp> reviewed_at;
};

nlohmann::json to_json(const WeightSuggestion&);
WeightSuggestion suggestion_from_json(const nlohmann::json&);

// A resolved incident as handed to the review pipeline. fired_factors carries
// the factor names from the incident's risk report, either as weight-table
// keys ("data_class.pii") or as "<factor>:<detail>" pairs from a score
// breakdown ("data_sensitivity:pii").
struct Incident {
    std::string incident_id;
    std::string tenant_id;
    std::string agent_key;
    std::vector<std::string> fired_factors;
    scoring::Bucket severity = scoring::Bucket::low;
    bool resolved = true;
};

// Translates a fired-factor entry to its weight-table key; nullopt when the
// entry names nothing overridable (e.g. the base factor).
std::optional<std::string> weight_key_for_factor(std::string_view fired_factor);

// Queues one pending suggestion per translatable fired factor, bumping the
// tenant's current effective weight by a fixed increment (clamped to the
// factor family's cap). Only resolved critical incidents produce
// suggestions, and re-submitting an incident id is a no-op that returns the
// existing set. Suggestions are never applied here: application requires an
// explicit reviewer approval.
std::vector<WeightSuggestion> propose_from_incident(storage::Storage& store, const Incident& incident,
                                                    Timestamp now = now_utc());

// Applies the suggestion through the tenant weight channel under the
// reviewer's identity. A suggestion that would loosen the current platform
// default (e.g. the platform raised the key after the proposal) throws
// OverrideLoosensError and the suggestion stays pending.
WeightSuggestion approve_suggestion(storage::Storage& store, std::string_view tenant,
                                    std::string_view id, std::string_view reviewer,
                                    Timestamp now = now_utc());

WeightSuggestion reject_suggestion(storage::Storage& store, std::string_view tenant,
                                   std::string_view id, std::string_view reviewer,
                                   Timestamp now = now_utc());

std::optional<WeightSuggestion> find_suggestion(const storage::Storage& store,
                                                std::string_view tenant, std::string_view id);
std::vector<WeightSuggestion> list_suggestions(const storage::Storage& store,
                                               std::string_view tenant,
                                               std::optional<SuggestionStatus> status = std::nullopt);

}  // namespace veldt::suggestions
