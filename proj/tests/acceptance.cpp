// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check is self-contained and deterministic; the timed ones
// assert wall-clock budgets on top of exactness.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <veldt/attacksim.hpp>
#include <veldt/compliance.hpp>
#include <veldt/crypto.hpp>
#include <veldt/evidence.hpp>
#include <veldt/inbound.hpp>
#include <veldt/scoring.hpp>
#include <veldt/storage.hpp>
#include <veldt/trust.hpp>
#include <veldt/versioning.hpp>
#include <veldt/weights.hpp>

#include "ablation_fixtures.hpp"

using namespace veldt;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

double elapsed_ms(Clock::time_point from) {
    return std::chrono::duration<double, std::milli>(Clock::now() - from).count();
}

// ---------------------------------------------------------------------------

Criterion check_ablation_fixtures() {
    Criterion c;
    const auto start = Clock::now();
    for (const auto& expected : fixtures::ablation_cases()) {
        scoring::ScoreOptions baseline_options;
        baseline_options.disable_interactions = true;
        const auto baseline = scoring::score_agent(expected.def, {},
                                                   scoring::InteractionRegistry::defaults(),
                                                   baseline_options, {});
        c.require(baseline.additive == expected.additive,
                  expected.def.agent_key + ": additive " + std::to_string(baseline.additive) +
                      " != " + std::to_string(expected.additive));
        c.require(scoring::bucket_for_score(baseline.additive) == expected.additive_bucket,
                  expected.def.agent_key + ": additive bucket");
        c.require(baseline.applied_multiplier == 1.0 && baseline.fired_codes.empty(),
                  expected.def.agent_key + ": baseline run fired rules");

        const auto full = scoring::score_agent(expected.def, {},
                                               scoring::InteractionRegistry::defaults(), {}, {});
        c.require(full.final_score == expected.final_score,
                  expected.def.agent_key + ": final " + std::to_string(full.final_score) +
                      " != " + std::to_string(expected.final_score));
        c.require(full.bucket == expected.final_bucket, expected.def.agent_key + ": final bucket");
        c.require(std::abs(full.applied_multiplier - expected.multiplier) < 1e-9,
                  expected.def.agent_key + ": multiplier");
        c.require(full.fired_codes == expected.fired, expected.def.agent_key + ": fired rules");
    }
    const double ms = elapsed_ms(start);
    c.require(ms < 1000.0, "exceeded 1s budget");
    if (c.ok) c.detail << "6/6 exact in " << static_cast<int>(ms) << " ms";
    return c;
}

Criterion check_topology_crossings() {
    Criterion c;
    const auto start = Clock::now();
    const struct {
        model::SignalKind signal;
        int risky;
        int blocked;
    } expected[] = {
        {model::SignalKind::oos_tool, 4, 12},
        {model::SignalKind::data_leak, 2, 4},
        {model::SignalKind::cross_tenant, 1, 3},
    };
    for (const auto& e : expected) {
        auto store = storage::Storage::in_memory();
        const auto traj =
            attacksim::run_topology_attack(store, attacksim::loan_fleet(), e.signal);
        const std::string name(model::to_string(e.signal));
        c.require(traj.first_risky == e.risky,
                  name + ": first risky at " +
                      (traj.first_risky ? std::to_string(*traj.first_risky) : "never"));
        c.require(traj.first_blocked == e.blocked,
                  name + ": first blocked at " +
                      (traj.first_blocked ? std::to_string(*traj.first_blocked) : "never"));
    }
    auto store = storage::Storage::in_memory();
    const auto control = attacksim::run_matched_control(store, attacksim::loan_fleet());
    for (const auto& p : control.points) {
        c.require(p.trust == trust::kStartingTrust && p.bucket == trust::TrustBucket::neutral,
                  "control moved at invocation " + std::to_string(p.invocation_no));
        if (!c.ok) break;
    }
    const double ms = elapsed_ms(start);
    c.require(ms < 1000.0, "exceeded 1s budget");
    if (c.ok) c.detail << "3 signal classes + flat control in " << static_cast<int>(ms) << " ms";
    return c;
}

Criterion check_four_gates() {
    Criterion c;
    const auto kp = crypto::ed25519_generate();
    const inbound::TrustAnchorSet anchors{{"collector", kp.public_key}};
    const Timestamp now{1773568200000000};
    int rejections = 0;
    constexpr int kTrials = 100;
    constexpr int kRuns = 3;

    const auto make = [&](std::string id, double value, bool expired) {
        inbound::RecommendationEnvelope env;
        env.recommendation_id = std::move(id);
        env.key_id = "collector";
        env.expires_at = Timestamp{now.micros + (expired ? -1 : 1) * kMicrosPerDay};
        env.scope = weights::Scope::factor_weight;
        env.key = "data_class.pii";
        env.value = value;
        env.tenant_id = "acme";
        inbound::sign_envelope(env, kp.private_key);
        return env;
    };

    for (int run = 0; run < kRuns; ++run) {
        auto store = storage::Storage::in_memory();
        std::mt19937 rng(1000 + run);
        const auto tag = [&](const char* gate, int trial) {
            return std::string(gate) + "-r" + std::to_string(run) + "-t" + std::to_string(trial);
        };

        for (int t = 0; t < kTrials; ++t) {  // forged signature
            auto env = make(tag("g1", t), 20 + static_cast<double>(rng() % 40), false);
            env.value += 1;  // tamper after signing
            const auto rec = inbound::ingest_recommendation(store, env, anchors, now);
            if (rec.status == inbound::RecStatus::rejected && rec.gate_rejected == 1)
                ++rejections;
            else
                c.require(false, "gate 1 miss at " + env.recommendation_id);
        }
        for (int t = 0; t < kTrials; ++t) {  // stale envelope
            const auto env = make(tag("g2", t), 20 + static_cast<double>(rng() % 40), true);
            const auto rec = inbound::ingest_recommendation(store, env, anchors, now);
            if (rec.status == inbound::RecStatus::rejected && rec.gate_rejected == 2)
                ++rejections;
            else
                c.require(false, "gate 2 miss at " + env.recommendation_id);
        }
        for (int t = 0; t < kTrials; ++t) {  // below-baseline value
            const auto env =
                make(tag("g3", t), static_cast<double>(rng() % 15), false);  // seeded pii is 15
            const auto rec = inbound::ingest_recommendation(store, env, anchors, now);
            if (rec.status == inbound::RecStatus::rejected && rec.gate_rejected == 3)
                ++rejections;
            else
                c.require(false, "gate 3 miss at " + env.recommendation_id);
        }
        for (int t = 0; t < kTrials; ++t) {  // valid but not allowlisted
            const auto env = make(tag("g4", t), 20 + static_cast<double>(rng() % 40), false);
            const auto rec = inbound::ingest_recommendation(store, env, anchors, now);
            if (rec.status == inbound::RecStatus::pending && !rec.gate_rejected)
                ++rejections;
            else
                c.require(false, "gate 4 auto-applied " + env.recommendation_id);
        }
        c.require(store.size("weight_changes") == 0, "a gated envelope reached the weight table");
    }
    c.require(rejections == kRuns * 4 * kTrials, std::to_string(rejections) + "/1200 held");
    if (c.ok) c.detail << rejections << "/1200 held at their gate";
    return c;
}

Criterion check_only_tighten() {
    Criterion c;

    // Property: across random write sequences on all three channels, the
    // effective weight dominates the platform default after every write.
    std::mt19937 rng(20260817);
    const weights::Scope scopes[] = {weights::Scope::factor_weight, weights::Scope::signal_delta,
                                     weights::Scope::bucket_threshold,
                                     weights::Scope::data_class_multiplier,
                                     weights::Scope::tool_multiplier};
    const std::vector<std::string> keys[] = {
        {"base", "data_class.pii", "tools.write", "governance.none", "deployment.prod"},
        {"oos_tool", "data_leak", "cross_tenant", "rbac_refusal"},
        {"medium", "high", "critical"},
        {"pii", "financial", "phi"},
        {"update_record", "drop_table"},
    };
    int checked = 0;
    for (int sequence = 0; sequence < 1000 && c.ok; ++sequence) {
        auto store = storage::Storage::in_memory();
        Timestamp now{1700000000000000};
        for (int step = 0; step < 10; ++step) {
            now.micros += kMicrosPerSecond;
            const int s = static_cast<int>(rng() % 5);
            const auto scope = scopes[s];
            const auto& key = keys[s][rng() % keys[s].size()];
            const auto channel = static_cast<weights::Channel>(rng() % 3);
            const auto tenant = channel == weights::Channel::platform ? "" : "acme";
            double value = static_cast<double>(rng() % 101);
            if (scope == weights::Scope::data_class_multiplier ||
                scope == weights::Scope::tool_multiplier)
                value = 1.0 + value / 50.0;
            try {
                weights::set_override(store, tenant, scope, key, value, channel, "prop", now);
            } catch (const weights::OverrideLoosensError&) {
            } catch (const weights::InvalidWeightWrite&) {
            }
            const double platform = weights::platform_default(store, scope, key);
            const double effective = weights::effective_weight(store, "acme", scope, key);
            ++checked;
            c.require(weights::dominates(scope, effective, platform),
                      "sequence " + std::to_string(sequence) + " step " + std::to_string(step) +
                          ": effective " + std::to_string(effective) + " loosens platform " +
                          std::to_string(platform));
            if (!c.ok) break;
        }
    }

    // Six-attempt composition witness on one factor weight.
    auto store = storage::Storage::in_memory();
    const Timestamp now{1773568200000000};
    const auto set = [&](std::string_view tenant, double value, weights::Channel channel) {
        weights::set_override(store, tenant, weights::Scope::factor_weight, "data_class.pii",
                              value, channel, "witness", now);
    };
    const auto blocked_as_loosening = [&](std::string_view tenant, double value,
                                          weights::Channel channel) {
        try {
            weights::set_override(store, tenant, weights::Scope::factor_weight, "data_class.pii",
                                  value, channel, "witness", now);
            return false;
        } catch (const weights::OverrideLoosensError&) {
            return true;
        }
    };

    set("", 10, weights::Channel::platform);
    set("", 12, weights::Channel::platform);  // 1: platform raise accepted
    c.require(weights::platform_default(store, weights::Scope::factor_weight, "data_class.pii") ==
                  12,
              "witness: platform raise");
    set("acme", 30, weights::Channel::tenant);  // 2: tenant tighten accepted
    c.require(weights::effective_weight(store, "acme", weights::Scope::factor_weight,
                                        "data_class.pii") == 30,
              "witness: tenant tighten");
    c.require(blocked_as_loosening("acme", 5, weights::Channel::tenant),
              "witness: tenant loosen was not blocked");  // 3
    set("acme", 25, weights::Channel::recommendation);    // 4: signed tighten accepted
    c.require(blocked_as_loosening("acme", 8, weights::Channel::recommendation),
              "witness: signed loosen was not blocked");  // 5
    bool platform_lower_refused = false;                  // 6: signed write with no tenant
    try {
        set("", 6, weights::Channel::recommendation);
    } catch (const weights::InvalidWeightWrite&) {
        platform_lower_refused = true;
    }
    c.require(platform_lower_refused, "witness: signed platform-lower was accepted");
    const double final_effective =
        weights::effective_weight(store, "acme", weights::Scope::factor_weight, "data_class.pii");
    c.require(final_effective == 30 &&
                  weights::platform_default(store, weights::Scope::factor_weight,
                                            "data_class.pii") == 12,
              "witness: final state drifted");

    if (c.ok) c.detail << checked << " random writes dominated; witness 6/6";
    return c;
}

Criterion check_evidence_tampering() {
    Criterion c;
    const Timestamp t0{1773568200000000};
    const auto build_chain = [&](storage::Storage& store, std::string_view tenant,
                                 std::string_view invocation, int events) {
        for (int i = 0; i < events; ++i) {
            canonical::ValueMap payload;
            payload.emplace("step", static_cast<std::int64_t>(i));
            evidence::append_event(store, tenant, invocation, model::EvidenceKind::tool_call,
                                   canonical::Value(std::move(payload)),
                                   Timestamp{t0.micros + i * kMicrosPerSecond});
        }
    };

    // Every single-field mutation at every position reads as non-valid.
    {
        auto store = storage::Storage::in_memory();
        build_chain(store, "t-acc", "inv-acc", 100);
        c.require(evidence::verify_chain(store, "t-acc", "inv-acc").status ==
                      evidence::ChainStatus::valid,
                  "pristine 100-event chain did not verify");

        const auto flip_hex = [](std::string h) {
            h[0] = h[0] == '0' ? '1' : '0';
            return h;
        };
        const std::vector<std::pair<std::string, std::function<void(nlohmann::json&)>>> mutations =
            {
                {"payload", [](nlohmann::json& row) { row["payload"] = "forged"; }},
                {"kind", [](nlohmann::json& row) { row["kind"] = "response"; }},
                {"occurred_at",
                 [](nlohmann::json& row) { row["occurred_at"] = "2031-01-01T00:00:00+00:00"; }},
                {"sensitivity_tags",
                 [](nlohmann::json& row) {
                     row["sensitivity_tags"] = nlohmann::json::array({"pii"});
                 }},
                {"actor_agent_key",
                 [](nlohmann::json& row) { row["actor_agent_key"] = "mallory"; }},
                {"tenant_id", [](nlohmann::json& row) { row["tenant_id"] = "t-evil"; }},
                {"invocation_id", [](nlohmann::json& row) { row["invocation_id"] = "inv-evil"; }},
                {"prev_hash",
                 [&](nlohmann::json& row) {
                     row["prev_hash"] = flip_hex(row["prev_hash"].get<std::string>());
                 }},
                {"signed_hash",
                 [&](nlohmann::json& row) {
                     row["signed_hash"] = flip_hex(row["signed_hash"].get<std::string>());
                 }},
            };

        const auto rows = store.scan_prefix("evidence", storage::make_key({"t-acc", "inv-acc"}) +
                                                            '\x1f');
        int caught = 0;
        for (const auto& [field, mutate] : mutations) {
            for (const auto& [key, original] : rows) {
                auto forged = original;
                mutate(forged);
                store.put("evidence", key, forged);
                const auto report = evidence::verify_chain(store, "t-acc", "inv-acc");
                if (report.status != evidence::ChainStatus::valid)
                    ++caught;
                else
                    c.require(false, field + " mutation at seq " +
                                         std::to_string(original.at("seq").get<std::int64_t>()) +
                                         " went undetected");
                store.put("evidence", key, original);
            }
            if (!c.ok) break;
        }
        c.require(evidence::verify_chain(store, "t-acc", "inv-acc").status ==
                      evidence::ChainStatus::valid,
                  "chain did not restore after the mutation sweep");
        if (c.ok) c.detail << caught << "/900 mutations caught";
    }

    // Prefix pruning downgrades to a ledgered clean cut, never a failure.
    {
        auto store = storage::Storage::in_memory();
        const Timestamp now{t0.micros + 7LL * 365 * kMicrosPerDay};
        for (int i = 0; i < 10; ++i) {
            canonical::ValueMap payload;
            payload.emplace("step", static_cast<std::int64_t>(i));
            const bool retained = i >= 4;
            evidence::append_event(
                store, "t-prune", "inv-1", model::EvidenceKind::tool_call,
                canonical::Value(std::move(payload)),
                retained ? Timestamp{now.micros - 300 * kMicrosPerDay}
                         : Timestamp{t0.micros + i * kMicrosPerSecond},
                retained ? std::set<model::DataClass>{model::DataClass::pii}
                         : std::set<model::DataClass>{});
        }
        const auto pruned = evidence::prune_expired_evidence(
            store, compliance::RegimeRegistry::builtin(), "t-prune", {}, now);
        c.require(pruned.events_pruned == 4, "expected a 4-event prefix prune");
        const auto report = evidence::verify_chain(store, "t-prune", "inv-1");
        c.require(report.status == evidence::ChainStatus::clean_cut,
                  std::string("post-prune status ") +
                      std::string(evidence::to_string(report.status)));
        c.require(report.cut_seq == 4, "cut seq not honored");

        // Survivors are still tamper-checked above the cut.
        const auto keys =
            store.scan_prefix("evidence", storage::make_key({"t-prune", "inv-1"}) + '\x1f');
        auto forged = keys.front().second;
        forged["payload"] = "forged";
        store.put("evidence", keys.front().first, forged);
        c.require(evidence::verify_chain(store, "t-prune", "inv-1").status !=
                      evidence::ChainStatus::clean_cut,
                  "tamper above the cut went undetected");
    }

    // Tenant isolation: a mutation in one tenant's chain leaves others valid.
    {
        auto store = storage::Storage::in_memory();
        build_chain(store, "iso-a", "inv-1", 5);
        build_chain(store, "iso-b", "inv-1", 5);
        const auto rows =
            store.scan_prefix("evidence", storage::make_key({"iso-a", "inv-1"}) + '\x1f');
        auto forged = rows[2].second;
        forged["payload"] = "forged";
        store.put("evidence", rows[2].first, forged);
        c.require(evidence::verify_chain(store, "iso-a", "inv-1").status !=
                      evidence::ChainStatus::valid,
                  "tampered tenant chain still valid");
        c.require(evidence::verify_chain(store, "iso-b", "inv-1").status ==
                      evidence::ChainStatus::valid,
                  "sibling tenant chain was affected");
    }

    // Concurrent appends on one chain stay contiguous and verifiable.
    {
        auto store = storage::Storage::in_memory();
        std::vector<std::thread> writers;
        for (int w = 0; w < 20; ++w) {
            writers.emplace_back([&store, w, t0] {
                for (int i = 0; i < 25; ++i) {
                    canonical::ValueMap payload;
                    payload.emplace("writer", static_cast<std::int64_t>(w));
                    payload.emplace("step", static_cast<std::int64_t>(i));
                    evidence::append_event(store, "t-conc", "inv-1",
                                           model::EvidenceKind::tool_call,
                                           canonical::Value(std::move(payload)),
                                           Timestamp{t0.micros + i});
                }
            });
        }
        for (auto& t : writers) t.join();
        const auto chain = evidence::load_chain(store, "t-conc", "inv-1");
        c.require(chain.size() == 500, "expected 500 events from 20 writers");
        for (std::size_t i = 0; i < chain.size(); ++i)
            if (chain[i].seq != static_cast<std::int64_t>(i)) {
                c.require(false, "seq gap at " + std::to_string(i));
                break;
            }
        c.require(evidence::verify_chain(store, "t-conc", "inv-1").status ==
                      evidence::ChainStatus::valid,
                  "concurrent chain failed verification");
    }
    return c;
}

Criterion check_drift_exhaustiveness() {
    Criterion c;
    using Mutator = std::function<void(model::AgentDefinition&)>;
    const Timestamp t0{1773568200000000};

    model::AgentDefinition def;
    def.agent_key = "drift-probe";
    def.name = "Drift Probe";
    def.description = "baseline";
    def.system_prompt = "baseline";
    def.model = "gpt-4o";
    def.tools = {"read_things"};
    def.human_loop = model::HumanLoopMode::in_loop;
    def.provenance = model::Provenance::custom;
    def.model_trust = model::ModelTrust::enterprise;
    def.approval_status = model::ApprovalStatus::approved;
    def.owner = "platform-team";

    const std::vector<std::pair<std::string, Mutator>> identity = {
        {"agent_key", [](auto& d) { d.agent_key += "-2"; }},
        {"name", [](auto& d) { d.name += " v2"; }},
        {"description", [](auto& d) { d.description = "changed"; }},
        {"system_prompt", [](auto& d) { d.system_prompt = "changed"; }},
        {"model", [](auto& d) { d.model = "gpt-5"; }},
        {"tools", [](auto& d) { d.tools.push_back("write_things"); }},
        {"denied_tools", [](auto& d) { d.denied_tools.push_back("drop_table"); }},
        {"human_loop", [](auto& d) { d.human_loop = model::HumanLoopMode::none; }},
        {"access_level", [](auto& d) { d.access_level = model::AccessLevel::admin; }},
        {"can_override", [](auto& d) { d.can_override = true; }},
        {"can_revert", [](auto& d) { d.can_revert = true; }},
        {"can_delegate_to", [](auto& d) { d.can_delegate_to.push_back("helper"); }},
        {"required_roles", [](auto& d) { d.required_roles.push_back("admin"); }},
        {"extends", [](auto& d) { d.extends = "base"; }},
        {"data_classes", [](auto& d) { d.data_classes.insert(model::DataClass::pii); }},
        {"security_caps",
         [](auto& d) { d.security_caps.insert(model::SecurityCap::shell_access); }},
        {"provenance", [](auto& d) { d.provenance = model::Provenance::third_party; }},
        {"model_trust", [](auto& d) { d.model_trust = model::ModelTrust::self_hosted; }},
        {"compliance_scope", [](auto& d) { d.compliance_scope.insert("sox"); }},
    };
    const std::vector<Mutator> operational = {
        [](auto& d) { d.deployment_env = model::DeploymentEnv::enclave; },
        [](auto& d) { d.input_sources.insert(model::InputSource::web_fetch); },
        [](auto& d) { d.supply_chain.insert(model::SupplyChainKind::self_hosted_ext); },
        [](auto& d) { d.dependency_count = 12; },
        [](auto& d) { d.approval_status = model::ApprovalStatus::expired; },
        [t0](auto& d) { d.review_expires_at = t0; },
        [t0](auto& d) { d.created_at = t0; },
        [](auto& d) { d.version_count_30d = 40; },
        [](auto& d) { d.owner = "someone-else"; },
        [](auto& d) { d.monthly_cost_avg = 900.0; },
        [](auto& d) { d.hourly_cost_peak = 50.0; },
        [](auto& d) { d.blast_radius_components.push_back("multi_tenant"); },
        [](auto& d) { d.budget_exhausted = true; },
        [t0](auto& d) { d.trust_evidence.push_back({model::AuditKind::red_team, t0}); },
    };
    c.require(identity.size() == model::kHashedFields.size(),
              "identity mutation table is incomplete");
    c.require(identity.size() + operational.size() == 33, "case count is not 33");

    auto store = storage::Storage::in_memory();
    versioning::snapshot(store, "acme", def, t0, std::nullopt, "", t0);
    const auto declared = model::definition_hash_hex(def);

    int detected = 0;
    int clean = 0;
    for (const auto& [field, mutate] : identity) {
        auto live = def;
        mutate(live);
        const auto diff = versioning::detect_drift(store, "acme", declared, live, t0);
        if (diff && diff->changed_fields() == std::vector<std::string>{field})
            ++detected;
        else
            c.require(false, field + " drift missed or misnamed");
    }
    for (std::size_t i = 0; i < operational.size(); ++i) {
        auto live = def;
        operational[i](live);
        if (!versioning::detect_drift(store, "acme", declared, live, t0).has_value())
            ++clean;
        else
            c.require(false, "operational mutation " + std::to_string(i) + " misread as drift");
    }
    c.require(detected == 19 && clean == 14, "case totals off");
    if (c.ok) c.detail << "33/33 (19 detected by field, 14 operational clean)";
    return c;
}

Criterion check_trust_mechanics() {
    Criterion c;
    const Timestamp t0{1773568200000000};

    // Fresh principals start at 50.
    {
        auto store = storage::Storage::in_memory();
        const auto outcome = trust::record_principal_signal(store, "acme",
                                                            model::PrincipalKind::agent, "fresh",
                                                            model::SignalKind::rbac_refusal,
                                                            std::nullopt, {}, t0, "inv");
        c.require(outcome.principal.trust_score == trust::kStartingTrust - 2,
                  "starting trust is not 50");
    }

    // Bucket boundaries are exact at 75/40/15.
    c.require(trust::bucket_for_trust(75) == trust::TrustBucket::trusted, "75 not trusted");
    c.require(trust::bucket_for_trust(74) == trust::TrustBucket::neutral, "74 not neutral");
    c.require(trust::bucket_for_trust(40) == trust::TrustBucket::neutral, "40 not neutral");
    c.require(trust::bucket_for_trust(39) == trust::TrustBucket::risky, "39 not risky");
    c.require(trust::bucket_for_trust(15) == trust::TrustBucket::risky, "15 not risky");
    c.require(trust::bucket_for_trust(14) == trust::TrustBucket::blocked, "14 not blocked");

    // Clamped to [0, 100] under ten thousand random signals.
    {
        auto store = storage::Storage::in_memory();
        std::mt19937 rng(4242);
        const model::SignalKind kinds[] = {
            model::SignalKind::oos_tool,     model::SignalKind::rbac_refusal,
            model::SignalKind::governance_block, model::SignalKind::data_leak,
            model::SignalKind::cross_tenant, model::SignalKind::policy_violation,
        };
        bool in_range = true;
        for (int i = 0; i < 10000; ++i) {
            const auto outcome = trust::record_principal_signal(
                store, "acme", model::PrincipalKind::agent, "clamped", kinds[rng() % 6],
                std::nullopt, {}, Timestamp{t0.micros + i}, "inv");
            in_range = in_range && outcome.principal.trust_score >= 0 &&
                       outcome.principal.trust_score <= 100;
        }
        c.require(in_range, "trust escaped [0,100]");
    }

    // Actor attribution debits the acting principal by the same delta.
    {
        std::mt19937 rng(777);
        const model::SignalKind kinds[] = {
            model::SignalKind::oos_tool,     model::SignalKind::rbac_refusal,
            model::SignalKind::governance_block, model::SignalKind::data_leak,
            model::SignalKind::cross_tenant, model::SignalKind::policy_violation,
        };
        bool equal = true;
        for (int i = 0; i < 100; ++i) {
            auto store = storage::Storage::in_memory();
            const auto kind = kinds[rng() % 6];
            trust::record_principal_signal(store, "acme", model::PrincipalKind::agent, "emitter",
                                           kind, "orchestrator", {}, t0, "inv");
            const auto emitter =
                trust::get_principal(store, "acme", model::PrincipalKind::agent, "emitter");
            const auto actor =
                trust::get_principal(store, "acme", model::PrincipalKind::agent, "orchestrator");
            equal = equal && emitter && actor && emitter->trust_score == actor->trust_score;
        }
        c.require(equal, "actor debit diverged from emitter debit");
    }
    if (c.ok) c.detail << "start 50, bounds 75/40/15, 10^4 clamped, attribution equal";
    return c;
}

Criterion check_latency() {
    Criterion c;
    const auto median_of = [](std::vector<double>& samples) {
        std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
        return samples[samples.size() / 2];
    };

    {
        const auto def = fixtures::replit_style_autonomous();
        const auto registry = scoring::InteractionRegistry::defaults();
        std::vector<double> samples;
        samples.reserve(10000);
        for (int i = 0; i < 10000; ++i) {
            const auto start = Clock::now();
            const auto score = scoring::score_agent(def, {}, registry, {}, {});
            samples.push_back(elapsed_ms(start));
            if (score.final_score != 100) c.require(false, "scoring changed under timing");
        }
        const double median = median_of(samples);
        c.require(median < 1.0, "score median " + std::to_string(median) + " ms >= 1 ms");
        if (c.ok) c.detail << "score p50 " << median << " ms";
    }
    {
        auto store = storage::Storage::in_memory();
        std::vector<double> samples;
        samples.reserve(10000);
        for (int i = 0; i < 10000; ++i) {
            const auto start = Clock::now();
            trust::record_principal_signal(store, "acme", model::PrincipalKind::agent, "timed",
                                           model::SignalKind::rbac_refusal, std::nullopt, {},
                                           Timestamp{1773568200000000 + i}, "inv");
            samples.push_back(elapsed_ms(start));
        }
        const double median = median_of(samples);
        c.require(median < 5.0, "signal median " + std::to_string(median) + " ms >= 5 ms");
        if (c.ok) c.detail << ", signal p50 " << median << " ms";
    }
    return c;
}

Criterion check_breach_fanout() {
    Criterion c;
    const auto& reg = compliance::RegimeRegistry::builtin();
    const Timestamp now{1773568200000000};

    auto store = storage::Storage::in_memory();
    const auto first = compliance::emit_breach_notifications(
        store, reg, "acme", "incident-1", {"nydfs_part_500"}, {model::DataClass::pii}, now);
    c.require(first.size() == 2, "fan-out created " + std::to_string(first.size()) + " rows");
    if (first.size() == 2)
        c.require(first[0].regime == "gdpr" && first[1].regime == "nydfs_part_500",
                  "fan-out hit the wrong regimes");
    const auto replay = compliance::emit_breach_notifications(
        store, reg, "acme", "incident-1", {"nydfs_part_500"}, {model::DataClass::pii}, now);
    c.require(replay.empty() && store.size("breach_notifications") == 2,
              "re-emission duplicated notifications");

    // Retention floor equals the maximum over every applicable regime.
    std::mt19937 rng(20260817);
    std::vector<std::string> ids;
    for (const auto& r : reg.all()) ids.push_back(r.id);
    bool floors_hold = true;
    for (int trial = 0; trial < 500; ++trial) {
        std::set<std::string> declared;
        std::set<model::DataClass> classes;
        for (unsigned i = rng() % 4; i > 0; --i) declared.insert(ids[rng() % ids.size()]);
        for (unsigned i = rng() % 3; i > 0; --i)
            classes.insert(static_cast<model::DataClass>(rng() % 10));

        int expected = 0;
        for (const auto& id : declared)
            if (const auto* r = reg.find(id)) expected = std::max(expected, r->retention_years);
        for (const auto& id : reg.implied_regimes(classes, declared))
            expected = std::max(expected, reg.find(id)->retention_years);
        const int got = compliance::required_retention_years(reg, declared, classes);
        floors_hold = floors_hold && got == expected &&
                      compliance::retention_floor_micros(got) ==
                          static_cast<std::int64_t>(got) * 365 * kMicrosPerDay;
    }
    c.require(floors_hold, "a retention floor fell below an applicable regime");
    if (c.ok) c.detail << "2/2 notifications, idempotent; 500 floor trials";
    return c;
}

}  // namespace

int main() {
    // A pinned key keeps every chain in this run verifiable and silences the
    // ephemeral-key warning.
    setenv("KYA_EVIDENCE_SIGNING_KEY", "AQIDBAUGBwgJCgsMDQ4PEBESExQVFhcYGRobHB0eHyA=", 1);

    const std::vector<std::pair<std::string, std::function<Criterion()>>> criteria = {
        {"score ablation fixtures reproduce exactly", check_ablation_fixtures},
        {"topology attack crossings", check_topology_crossings},
        {"four-gate inbound determinism", check_four_gates},
        {"only-tighten override algebra", check_only_tighten},
        {"evidence chain tamper detection", check_evidence_tampering},
        {"definition drift exhaustiveness", check_drift_exhaustiveness},
        {"principal trust mechanics", check_trust_mechanics},
        {"latency budget", check_latency},
        {"breach fan-out and retention floors", check_breach_fanout},
    };

    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Criterion result;
        try {
            result = run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail << "unhandled exception: " << e.what();
        }
        const auto detail = result.detail.str();
        if (result.ok) {
            std::printf("PASS: %s%s%s\n", name.c_str(), detail.empty() ? "" : " — ",
                        detail.c_str());
        } else {
            std::printf("FAIL: %s — %s\n", name.c_str(), detail.c_str());
            ++failures;
        }
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
