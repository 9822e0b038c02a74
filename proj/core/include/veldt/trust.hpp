#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/core_model.hpp"
#include "veldt/scoring.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"
#include "veldt/weights.hpp"

namespace veldt::trust {

inline constexpr int kStartingTrust = 50;

enum class TrustBucket { trusted, neutral, risky, blocked };
std::string_view to_string(TrustBucket);
std::optional<TrustBucket> parse_trust_bucket(std::string_view);

// trusted >= 75, neutral >= 40, risky >= 15, blocked below.
TrustBucket bucket_for_trust(int score);

// One record per (tenant, principal kind, principal id); humans, agents,
// and service accounts share the table with a kind discriminator.
struct PrincipalTrustRecord {
    std::string tenant_id;
    model::PrincipalKind principal_kind = model::PrincipalKind::agent;
    std::string principal_id;
    int trust_score = kStartingTrust;
    std::map<model::SignalKind, std::int64_t> signal_counts;
    std::optional<Timestamp> last_signal_at;
    Timestamp updated_at;
};

nlohmann::json to_json(const PrincipalTrustRecord& record);
PrincipalTrustRecord record_from_json(const nlohmann::json& row);

std::optional<PrincipalTrustRecord> get_principal(const storage::Storage& store,
                                                  std::string_view tenant,
                                                  model::PrincipalKind kind, std::string_view id);

struct SignalOutcome {
    PrincipalTrustRecord principal;
    std::optional<PrincipalTrustRecord> actor;  // present when debited separately
    int delta = 0;
};

// Applies one rogue signal: the emitting principal's record is debited, and
// when the responsible actor agent differs from the emitter, the actor's
// agent record is debited by the same delta (attribution). An absent actor
// defaults to the emitting agent itself. Each record update is one atomic
// storage upsert; the signal is evidence-chained and counted.
SignalOutcome record_principal_signal(storage::Storage& store, std::string_view tenant,
                                      model::PrincipalKind principal_kind,
                                      std::string_view principal_id, model::SignalKind signal,
                                      std::optional<std::string> actor_agent_key = std::nullopt,
                                      const weights::WeightView& view = {},
                                      Timestamp now = now_utc(),
                                      std::string_view invocation = "kyp-signals");

// Rogue-score aggregation over a signal window: min(50, sum of
// w * log2(1 + count)) across rogue and quality signals, rounded
// half-to-even. Breadth across kinds beats depth in one kind.
struct RogueReport {
    std::map<model::SignalKind, std::int64_t> signal_counts;
    std::map<model::QualitySignal, std::int64_t> quality_counts;
    std::int64_t window_hours = 24;
};

int rogue_score(const RogueReport& report, const weights::WeightView& view = {});

// Idle recovery: +1 toward the starting score per fully idle 24 h. Never
// recovers past 50 and never decays a score already at or above 50.
PrincipalTrustRecord apply_time_decay(PrincipalTrustRecord record, Timestamp now);

// Volatile per-kind burst detection: alert when the last-minute rate
// exceeds factor x the trailing-hour per-minute baseline. A zero baseline
// with any current activity always alerts. State is deliberately in-memory
// only (live triage, not audit).
class BurstDetector {
public:
    explicit BurstDetector(double factor = 3.0) : factor_(factor) {}

    void record(model::SignalKind kind, Timestamp at);

    struct Alert {
        model::SignalKind kind = model::SignalKind::oos_tool;
        std::int64_t count_1m = 0;
        double baseline_per_min = 0;
    };
    std::vector<Alert> detect(Timestamp now) const;

private:
    double factor_;
    std::map<model::SignalKind, std::vector<Timestamp>> events_;
};

// Layer-3 role check: allowed iff the tool requires no roles or the caller
// holds at least one required role.
bool roles_permit(const std::set<std::string>& caller_roles,
                  const std::set<std::string>& required_roles);

struct RbacDecision {
    bool allowed = false;
    std::optional<SignalOutcome> refusal_signal;
};

// Effectful variant: a refusal records an rbac_refusal signal against the
// calling agent.
RbacDecision tool_rbac_check(storage::Storage& store, std::string_view tenant,
                             std::string_view agent_key,
                             const std::set<std::string>& caller_roles,
                             const std::set<std::string>& required_roles,
                             const weights::WeightView& view = {}, Timestamp now = now_utc(),
                             std::string_view invocation = "kyp-signals");

enum class Verdict { allow, block, redact, throttle, flag_for_review };
std::string_view to_string(Verdict);

struct ActionRequest {
    std::string tool;
    std::set<model::DataClass> data_classes;        // classes the action touches
    std::set<model::DataClass> sanctioned_classes;  // classes the agent may touch
    bool out_of_scope_tool = false;
};

struct GateVerdict {
    Verdict verdict = Verdict::allow;
    std::string reason;
    std::string evidence_ref;
    std::vector<model::SignalKind> emitted_signals;
};

struct GatePolicy {
    bool block_critical_writes = false;  // default policy flags instead
};

// Layer-2 action gate. Pure in its verdict (a function of the arguments
// alone; prior rogue history never reads back in), effectful in its
// emissions: signals for violations, and the verdict appended to the
// invocation's evidence chain. Tool and data-class multipliers from the
// weight view escalate a high-bucket agent to critical handling once the
// tightened multiplier passes the escalation threshold.
GateVerdict evaluate_action_gate(storage::Storage& store, std::string_view tenant,
                                 std::string_view agent_key, scoring::Bucket agent_bucket,
                                 const ActionRequest& action,
                                 const weights::WeightView& view = {},
                                 const GatePolicy& policy = {}, Timestamp now = now_utc(),
                                 std::string_view invocation = "kyp-signals");

inline constexpr double kGateEscalationThreshold = 1.25;

// Process-wide counter registry mirroring the operational metric names.
class CounterRegistry {
public:
    static CounterRegistry& instance();

    void increment(std::string_view name, std::int64_t by = 1);
    std::int64_t value(std::string_view name) const;
    std::map<std::string, std::int64_t> snapshot() const;
    void reset();

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::int64_t> counters_;
};

std::string_view counter_name(model::SignalKind kind);

}  // namespace veldt::trust
