#include "veldt/trust.hpp"

#include <algorithm>
#include <cmath>

#include "veldt/evidence.hpp"

namespace veldt::trust {
namespace {

constexpr std::string_view kStore = "principal_trust";

std::string principal_key(std::string_view tenant, model::PrincipalKind kind, std::string_view id) {
    return storage::make_key({tenant, model::to_string(kind), id});
}

int clamp_trust(int score) { return std::clamp(score, 0, 100); }

PrincipalTrustRecord debit(storage::Storage& store, std::string_view tenant,
                           model::PrincipalKind kind, std::string_view id,
                           model::SignalKind signal, int delta, Timestamp now) {
    const auto merged = store.upsert(kStore, principal_key(tenant, kind, id),
                                     [&](std::optional<nlohmann::json> existing) {
                                         PrincipalTrustRecord rec;
                                         if (existing) {
                                             rec = record_from_json(*existing);
                                         } else {
                                             rec.tenant_id = std::string(tenant);
                                             rec.principal_kind = kind;
                                             rec.principal_id = std::string(id);
                                         }
                                         rec.trust_score = clamp_trust(rec.trust_score + delta);
                                         ++rec.signal_counts[signal];
                                         rec.last_signal_at = now;
                                         rec.updated_at = now;
                                         return to_json(rec);
                                     });
    return record_from_json(merged);
}

}  // namespace

std::string_view to_string(TrustBucket b) {
    switch (b) {
        case TrustBucket::trusted: return "trusted";
        case TrustBucket::neutral: return "neutral";
        case TrustBucket::risky: return "risky";
        case TrustBucket::blocked: return "blocked";
    }
    return "?";
}

std::optional<TrustBucket> parse_trust_bucket(std::string_view s) {
    for (const auto b :
         {TrustBucket::trusted, TrustBucket::neutral, TrustBucket::risky, TrustBucket::blocked})
        if (s == to_string(b)) return b;
    return std::nullopt;
}

TrustBucket bucket_for_trust(int score) {
    if (score >= 75) return TrustBucket::trusted;
    if (score >= 40) return TrustBucket::neutral;
    if (score >= 15) return TrustBucket::risky;
    return TrustBucket::blocked;
}

nlohmann::json to_json(const PrincipalTrustRecord& record) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [kind, n] : record.signal_counts)
        counts[std::string(model::to_string(kind))] = n;
    return {
        {"tenant_id", record.tenant_id},
        {"principal_kind", std::string(model::to_string(record.principal_kind))},
        {"principal_id", record.principal_id},
        {"trust_score", record.trust_score},
        {"signal_counts", counts},
        {"last_signal_at", record.last_signal_at
                               ? nlohmann::json(format_iso8601(*record.last_signal_at))
                               : nlohmann::json(nullptr)},
        {"updated_at", format_iso8601(record.updated_at)},
    };
}

PrincipalTrustRecord record_from_json(const nlohmann::json& row) {
    PrincipalTrustRecord rec;
    rec.tenant_id = row.at("tenant_id").get<std::string>();
    rec.principal_kind =
        model::parse_principal_kind(row.at("principal_kind").get<std::string>())
            .value_or(model::PrincipalKind::agent);
    rec.principal_id = row.at("principal_id").get<std::string>();
    rec.trust_score = row.at("trust_score").get<int>();
    for (const auto& [name, n] : row.at("signal_counts").items())
        if (const auto kind = model::parse_signal_kind(name))
            rec.signal_counts[*kind] = n.get<std::int64_t>();
    if (row.contains("last_signal_at") && !row["last_signal_at"].is_null())
        rec.last_signal_at = parse_iso8601(row["last_signal_at"].get<std::string>());
    if (const auto at = parse_iso8601(row.at("updated_at").get<std::string>()))
        rec.updated_at = *at;
    return rec;
}

std::optional<PrincipalTrustRecord> get_principal(const storage::Storage& store,
                                                  std::string_view tenant,
                                                  model::PrincipalKind kind, std::string_view id) {
    const auto row = store.get(kStore, principal_key(tenant, kind, id));
    if (!row) return std::nullopt;
    return record_from_json(*row);
}

SignalOutcome record_principal_signal(storage::Storage& store, std::string_view tenant,
                                      model::PrincipalKind principal_kind,
                                      std::string_view principal_id, model::SignalKind signal,
                                      std::optional<std::string> actor_agent_key,
                                      const weights::WeightView& view, Timestamp now,
                                      std::string_view invocation) {
    SignalOutcome outcome;
    outcome.delta = view.signal_delta(signal);
    outcome.principal = debit(store, tenant, principal_kind, principal_id, signal, outcome.delta, now);

    // Attribution: absent actor defaults to the emitting agent itself, so
    // only a distinct responsible agent picks up a second debit.
    std::optional<std::string> actor = std::move(actor_agent_key);
    if (!actor && principal_kind == model::PrincipalKind::agent)
        actor = std::string(principal_id);
    const bool actor_is_emitter = actor && principal_kind == model::PrincipalKind::agent &&
                                  *actor == principal_id;
    if (actor && !actor_is_emitter)
        outcome.actor =
            debit(store, tenant, model::PrincipalKind::agent, *actor, signal, outcome.delta, now);

    CounterRegistry::instance().increment(counter_name(signal));

    canonical::ValueMap payload;
    payload.emplace("signal", std::string(model::to_string(signal)));
    payload.emplace("principal_kind", std::string(model::to_string(principal_kind)));
    payload.emplace("principal_id", std::string(principal_id));
    payload.emplace("delta", static_cast<std::int64_t>(outcome.delta));
    payload.emplace("trust_after", static_cast<std::int64_t>(outcome.principal.trust_score));
    evidence::append_event(store, tenant, invocation, model::EvidenceKind::system_message,
                           canonical::Value(std::move(payload)), now, {}, actor);
    return outcome;
}

int rogue_score(const RogueReport& report, const weights::WeightView& view) {
    double total = 0;
    for (const auto& [kind, count] : report.signal_counts) {
        if (count <= 0) continue;
        const double w = view.value(weights::Scope::signal_delta, model::to_string(kind));
        total += w * std::log2(1.0 + static_cast<double>(count));
    }
    for (const auto& [kind, count] : report.quality_counts) {
        if (count <= 0) continue;
        total += 1.0 * std::log2(1.0 + static_cast<double>(count));
    }
    return std::min(50, scoring::round_half_even(total));
}

PrincipalTrustRecord apply_time_decay(PrincipalTrustRecord record, Timestamp now) {
    if (record.trust_score >= kStartingTrust) return record;
    const Timestamp since = record.last_signal_at.value_or(record.updated_at);
    const auto idle = now.micros - since.micros;
    if (idle < kMicrosPerDay) return record;
    const auto days = idle / kMicrosPerDay;
    record.trust_score =
        std::min<std::int64_t>(kStartingTrust, record.trust_score + days);
    record.updated_at = now;
    return record;
}

void BurstDetector::record(model::SignalKind kind, Timestamp at) {
    auto& log = events_[kind];
    log.push_back(at);
    // Drop entries that can no longer affect any trailing-hour window.
    const auto horizon = at.micros - 2 * kMicrosPerHour;
    while (!log.empty() && log.front().micros < horizon) log.erase(log.begin());
}

std::vector<BurstDetector::Alert> BurstDetector::detect(Timestamp now) const {
    std::vector<Alert> alerts;
    for (const auto& [kind, log] : events_) {
        std::int64_t count_1m = 0;
        std::int64_t count_1h = 0;
        for (const auto& at : log) {
            if (at.micros > now.micros) continue;
            if (now.micros - at.micros < kMicrosPerHour) ++count_1h;
            if (now.micros - at.micros < kMicrosPerMinute) ++count_1m;
        }
        const double baseline = static_cast<double>(count_1h) / 60.0;
        if (count_1m > 0 && static_cast<double>(count_1m) > factor_ * baseline)
            alerts.push_back({kind, count_1m, baseline});
    }
    return alerts;
}

bool roles_permit(const std::set<std::string>& caller_roles,
                  const std::set<std::string>& required_roles) {
    if (required_roles.empty()) return true;
    for (const auto& role : caller_roles)
        if (required_roles.count(role)) return true;
    return false;
}

RbacDecision tool_rbac_check(storage::Storage& store, std::string_view tenant,
                             std::string_view agent_key,
                             const std::set<std::string>& caller_roles,
                             const std::set<std::string>& required_roles,
                             const weights::WeightView& view, Timestamp now,
                             std::string_view invocation) {
    RbacDecision decision;
    decision.allowed = roles_permit(caller_roles, required_roles);
    if (!decision.allowed)
        decision.refusal_signal = record_principal_signal(
            store, tenant, model::PrincipalKind::agent, agent_key,
            model::SignalKind::rbac_refusal, std::nullopt, view, now, invocation);
    return decision;
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::allow: return "allow";
        case Verdict::block: return "block";
        case Verdict::redact: return "redact";
        case Verdict::throttle: return "throttle";
        case Verdict::flag_for_review: return "flag_for_review";
    }
    return "?";
}

GateVerdict evaluate_action_gate(storage::Storage& store, std::string_view tenant,
                                 std::string_view agent_key, scoring::Bucket agent_bucket,
                                 const ActionRequest& action, const weights::WeightView& view,
                                 const GatePolicy& policy, Timestamp now,
                                 std::string_view invocation) {
    GateVerdict verdict;

    std::set<model::DataClass> unsanctioned;
    for (const auto dc : action.data_classes)
        if (!action.sanctioned_classes.count(dc)) unsanctioned.insert(dc);

    if (action.out_of_scope_tool) {
        verdict.verdict = Verdict::block;
        verdict.reason = "tool outside the sanctioned list: " + action.tool;
        verdict.emitted_signals.push_back(model::SignalKind::oos_tool);
        if (!unsanctioned.empty())
            verdict.emitted_signals.push_back(model::SignalKind::policy_violation);
    } else if (!unsanctioned.empty()) {
        verdict.verdict = Verdict::block;
        verdict.reason = "action touches an unsanctioned data class";
        verdict.emitted_signals.push_back(model::SignalKind::data_leak);
    } else {
        // Tightened multipliers escalate a high-bucket agent to critical
        // handling once they pass the escalation threshold.
        double multiplier = view.value(weights::Scope::tool_multiplier, action.tool);
        for (const auto dc : action.data_classes)
            multiplier = std::max(
                multiplier, view.value(weights::Scope::data_class_multiplier,
                                       model::to_string(dc)));
        auto effective_bucket = agent_bucket;
        if (effective_bucket == scoring::Bucket::high && multiplier > kGateEscalationThreshold)
            effective_bucket = scoring::Bucket::critical;

        if (effective_bucket == scoring::Bucket::critical && scoring::is_write_tool(action.tool)) {
            if (policy.block_critical_writes) {
                verdict.verdict = Verdict::block;
                verdict.reason = "critical-bucket write blocked by tenant policy";
                verdict.emitted_signals.push_back(model::SignalKind::governance_block);
            } else {
                verdict.verdict = Verdict::flag_for_review;
                verdict.reason = "critical-bucket agent invoking a write-capability tool";
            }
        } else {
            verdict.verdict = Verdict::allow;
            verdict.reason = "within sanctioned scope";
        }
    }

    for (const auto signal : verdict.emitted_signals)
        record_principal_signal(store, tenant, model::PrincipalKind::agent, agent_key, signal,
                                std::nullopt, view, now, invocation);

    canonical::ValueMap payload;
    payload.emplace("gate", std::string("action_gate"));
    payload.emplace("tool", action.tool);
    payload.emplace("verdict", std::string(to_string(verdict.verdict)));
    payload.emplace("reason", verdict.reason);
    payload.emplace("agent_bucket", std::string(scoring::to_string(agent_bucket)));
    const auto event = evidence::append_event(
        store, tenant, invocation, model::EvidenceKind::system_message,
        canonical::Value(std::move(payload)), now, action.data_classes,
        std::string(agent_key));
    verdict.evidence_ref = event.invocation_id + "#" + std::to_string(event.seq);
    return verdict;
}

CounterRegistry& CounterRegistry::instance() {
    static CounterRegistry registry;
    return registry;
}

void CounterRegistry::increment(std::string_view name, std::int64_t by) {
    const std::lock_guard<std::mutex> lock(mutex_);
    counters_[std::string(name)] += by;
}

std::int64_t CounterRegistry::value(std::string_view name) const {
    const std::lock_guard<std::mutex> lock(mutex_);
    const auto it = counters_.find(std::string(name));
    return it == counters_.end() ? 0 : it->second;
}

std::map<std::string, std::int64_t> CounterRegistry::snapshot() const {
    const std::lock_guard<std::mutex> lock(mutex_);
    return counters_;
}

void CounterRegistry::reset() {
    const std::lock_guard<std::mutex> lock(mutex_);
    counters_.clear();
}

std::string_view counter_name(model::SignalKind kind) {
    switch (kind) {
        case model::SignalKind::oos_tool: return "veldt_agent_oos_tool_attempts_total";
        case model::SignalKind::rbac_refusal: return "veldt_tool_rbac_refusals_total";
        case model::SignalKind::governance_block: return "veldt_governance_action_gate_total";
        case model::SignalKind::data_leak: return "veldt_agent_data_leak_total";
        case model::SignalKind::cross_tenant: return "veldt_agent_cross_tenant_attempts_total";
        case model::SignalKind::policy_violation: return "veldt_agent_policy_violations_total";
    }
    return "veldt_unknown_signal_total";
}

}  // namespace veldt::trust
