#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/core_model.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"
#include "veldt/trust.hpp"
#include "veldt/weights.hpp"

namespace veldt::attacksim {

// A delegation fleet plus a deterministic attack plan: at each invocation
// the compromised sub-agent emits one rogue signal while acting on the
// orchestrator's behalf.
struct FleetScenario {
    std::string tenant_id = "bank-ops";
    model::AgentDefinition orchestrator;
    std::vector<model::AgentDefinition> sub_agents;
    std::string compromised_agent_key;
    int invocations = 20;
    // When false, signals are recorded without the acting-principal key, so
    // only the emitting sub-agent is debited (the evasion configuration).
    bool attribution_enabled = true;
};

// The reference fleet: a triage orchestrator delegating to document
// verification, sanctions screening, and risk review agents. The document
// verification sub-agent is the compromise target.
FleetScenario loan_fleet(std::string_view tenant = "bank-ops");

struct TrajectoryPoint {
    int invocation_no = 0;
    int trust = trust::kStartingTrust;
    trust::TrustBucket bucket = trust::TrustBucket::neutral;
};

struct Trajectory {
    std::string subject_agent_key;
    std::vector<TrajectoryPoint> points;
    std::optional<int> first_risky;    // first invocation with trust < risky threshold
    std::optional<int> first_blocked;  // first invocation with trust < blocked threshold
};

nlohmann::json to_json(const Trajectory&);

// Closed-form first crossing: the smallest n >= 1 with
// start + n * delta < threshold (delta negative), or nullopt when the
// per-signal delta cannot reach the threshold.
std::optional<int> predicted_crossing(int start, int delta, int threshold);

// Replays the attack plan against a fresh trust ledger: one signal per
// invocation from the compromised sub-agent, attributed to the orchestrator
// when the scenario enables attribution. Returns the orchestrator's full
// trust trajectory with first bucket crossings. Deterministic: timestamps
// advance one second per invocation from `start`.
Trajectory run_topology_attack(storage::Storage& store, const FleetScenario& scenario,
                               model::SignalKind signal, const weights::WeightView& view = {},
                               Timestamp start = Timestamp{0});

// The matched control: same fleet, same invocation count, zero signals.
// The orchestrator's trust must hold at the starting value throughout.
Trajectory run_matched_control(storage::Storage& store, const FleetScenario& scenario,
                               const weights::WeightView& view = {}, Timestamp start = Timestamp{0});

}  // namespace veldt::attacksim
