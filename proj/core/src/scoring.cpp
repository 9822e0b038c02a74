#include "veldt/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace veldt::scoring {
namespace {

using model::AgentDefinition;

constexpr std::array<std::string_view, 20> kWritePrefixes = {
    "create_", "delete_", "update_",  "override_", "revert_", "ingest_", "execute_",
    "publish_", "ack_",    "suspend_", "remove_",   "write_",  "insert_", "upsert_",
    "modify_",  "set_",    "send_",    "post_",     "drop_",   "grant_",
};

// Privileged subset: authority-changing verbs.
constexpr std::array<std::string_view, 5> kAdminPrefixes = {
    "override_", "grant_", "revoke_", "suspend_", "terminate_",
};

constexpr int kDataSensitivityCap = 60;
constexpr int kSecurityCapsCap = 60;
constexpr int kProvenanceCap = 20;
constexpr int kModelTrustCap = 10;
constexpr int kBlastRadiusCap = 30;
constexpr int kDeploymentCap = 25;
constexpr int kDelegationDepthCap = 25;
constexpr int kSupplyChainCap = 35;
constexpr int kInputSourcesCap = 25;

constexpr std::int64_t kRecentReviewWindow = 7 * kMicrosPerDay;
constexpr std::int64_t kStaleAuditAge = 180 * kMicrosPerDay;
constexpr std::int64_t kChurnThreshold = 20;
constexpr std::int64_t kBreadthDependencyThreshold = 5;
constexpr std::size_t kBreadthSourceThreshold = 3;

// Severity elevation factors per declared compliance regime. Any other
// declared regime id elevates at the modest default.
double regime_severity_factor(const std::string& regime) {
    static const std::map<std::string, double> factors = {
        {"itar_ear", 1.10}, {"il5_il6", 1.10},       {"hipaa", 1.05},
        {"eu_ai_act", 1.03}, {"nydfs_part_500", 1.03}, {"dora", 1.03},
        {"gdpr", 1.02},     {"sox", 1.01},
    };
    const auto it = factors.find(regime);
    return it == factors.end() ? 1.02 : it->second;
}

int wv(const weights::WeightView& view, std::string_view key) {
    return round_half_even(view.factor_weight(key));
}

bool has_classified_data(const AgentDefinition& def) {
    using model::DataClass;
    return def.data_classes.count(DataClass::us_classified) ||
           def.data_classes.count(DataClass::us_secret) ||
           def.data_classes.count(DataClass::us_top_secret);
}

int count_write_tools(const AgentDefinition& def) {
    int n = 0;
    for (const auto& tool : def.tools) n += is_write_tool(tool) ? 1 : 0;
    return n;
}

int count_admin_tools(const AgentDefinition& def) {
    int n = 0;
    for (const auto& tool : def.tools) n += is_admin_gated_tool(tool) ? 1 : 0;
    return n;
}

struct DepthBudget {
    int nodes_expanded = 0;
    int paths_completed = 0;
    bool exhausted = false;
};

constexpr int kMaxNodes = 5000;
constexpr int kMaxHops = 50;
constexpr int kMaxPaths = 50;

void explore(const std::map<std::string, std::vector<std::string>>& graph, const std::string& node,
             int depth, std::set<std::string>& on_path, DepthResult& result, DepthBudget& budget) {
    if (budget.exhausted) return;
    if (++budget.nodes_expanded > kMaxNodes) {
        budget.exhausted = result.truncated = true;
        return;
    }
    result.depth = std::max(result.depth, depth);
    if (depth >= kMaxHops) {
        result.truncated = true;
        return;
    }
    const auto it = graph.find(node);
    const bool leaf = it == graph.end() || it->second.empty();
    if (leaf) {
        if (++budget.paths_completed >= kMaxPaths) budget.exhausted = result.truncated = true;
        return;
    }
    for (const auto& next : it->second) {
        if (budget.exhausted) return;
        if (on_path.count(next)) {
            // Cycle edge: the chain length is ill-defined past this point.
            result.truncated = true;
            continue;
        }
        on_path.insert(next);
        explore(graph, next, depth + 1, on_path, result, budget);
        on_path.erase(next);
    }
}

}  // namespace

std::string_view to_string(Bucket b) {
    switch (b) {
        case Bucket::low: return "low";
        case Bucket::medium: return "medium";
        case Bucket::high: return "high";
        case Bucket::critical: return "critical";
    }
    return "?";
}

std::optional<Bucket> parse_bucket(std::string_view s) {
    for (const auto b : {Bucket::low, Bucket::medium, Bucket::high, Bucket::critical})
        if (s == to_string(b)) return b;
    return std::nullopt;
}

std::string_view to_string(RuleSeverity s) {
    return s == RuleSeverity::critical ? "critical" : "warning";
}

int round_half_even(double x) {
    const double floor = std::floor(x);
    const double frac = x - floor;
    if (frac > 0.5) return static_cast<int>(floor) + 1;
    if (frac < 0.5) return static_cast<int>(floor);
    const auto low = static_cast<long long>(floor);
    return static_cast<int>(low % 2 == 0 ? low : low + 1);
}

bool is_write_tool(std::string_view tool) {
    for (const auto prefix : kWritePrefixes)
        if (tool.substr(0, prefix.size()) == prefix) return true;
    return false;
}

bool is_admin_gated_tool(std::string_view tool) {
    for (const auto prefix : kAdminPrefixes)
        if (tool.substr(0, prefix.size()) == prefix) return true;
    return false;
}

void InteractionRegistry::register_rule(InteractionRule rule) {
    if (rule.multiplier < 1.0)
        throw MultiplierBelowOne("interaction multiplier must be >= 1.0 (got " +
                                 std::to_string(rule.multiplier) +
                                 "); use credit factors for downward deltas");
    if (find(rule.code))
        throw DuplicateCode("interaction code already registered: " + rule.code);
    rules_.push_back(std::move(rule));
}

const InteractionRule* InteractionRegistry::find(std::string_view code) const {
    for (const auto& rule : rules_)
        if (rule.code == code) return &rule;
    return nullptr;
}

InteractionRegistry InteractionRegistry::defaults() {
    using model::ApprovalStatus;
    using model::DataClass;
    using model::DeploymentEnv;
    using model::HumanLoopMode;
    using model::ModelTrust;
    using model::Provenance;
    using model::SecurityCap;

    InteractionRegistry registry;
    const auto add = [&](std::string code, std::string name,
                         std::function<bool(const InteractionInput&)> condition, double multiplier,
                         std::string description, RuleSeverity severity) {
        registry.register_rule({std::move(code), std::move(name), std::move(condition), multiplier,
                                std::move(description), severity});
    };

    add("autonomous_writer_in_prod", "Autonomous writer in production",
        [](const InteractionInput& in) {
            return in.def.human_loop == HumanLoopMode::none && in.write_tool_count >= 1 &&
                   in.def.deployment_env == DeploymentEnv::prod;
        },
        1.3, "No human oversight, write capability, production blast radius.",
        RuleSeverity::critical);

    add("code_exec_with_user_input", "Code execution fed by user input",
        [](const InteractionInput& in) {
            return in.def.security_caps.count(SecurityCap::code_execution) &&
                   in.def.input_sources.count(model::InputSource::user_upload);
        },
        1.5,
        "Classic RCE-via-prompt-injection setup; treat as if the attacker controls code "
        "execution on the host.",
        RuleSeverity::critical);

    add("classified_autonomous", "Classified data without oversight",
        [](const InteractionInput& in) {
            return has_classified_data(in.def) && in.def.human_loop == HumanLoopMode::none;
        },
        1.4, "Classification regimes require effective human oversight.", RuleSeverity::critical);

    add("untrusted_chain", "Marketplace agent with wide fan-out",
        [](const InteractionInput& in) {
            return in.def.provenance == Provenance::marketplace &&
                   in.def.can_delegate_to.size() >= 3;
        },
        1.2, "Marketplace-sourced agent delegating to three or more sub-agents.",
        RuleSeverity::warning);

    add("unaudited_classified", "Classified data with no audit evidence",
        [](const InteractionInput& in) {
            return has_classified_data(in.def) && in.def.trust_evidence.empty();
        },
        1.25, "Classified data handled with no red-team, bias, or fairness evidence on file.",
        RuleSeverity::critical);

    add("rejected_in_prod", "Rejected review status in production",
        [](const InteractionInput& in) {
            return in.def.approval_status == ApprovalStatus::rejected &&
                   in.def.deployment_env == DeploymentEnv::prod;
        },
        1.4, "Security review rejected the agent, yet it runs in production.",
        RuleSeverity::critical);

    add("orphan_writer_in_prod", "Unowned writer in production",
        [](const InteractionInput& in) {
            return !in.def.owner && in.write_tool_count >= 1 &&
                   in.def.deployment_env == DeploymentEnv::prod;
        },
        1.2, "Write capability in production with no accountable owner.", RuleSeverity::warning);

    add("prod_marketplace_writer", "Marketplace writer in production",
        [](const InteractionInput& in) {
            return in.def.provenance == Provenance::marketplace && in.write_tool_count >= 1 &&
                   in.def.deployment_env == DeploymentEnv::prod;
        },
        1.2, "Marketplace provenance combined with production write capability.",
        RuleSeverity::warning);

    add("self_hosted_with_pii", "Self-hosted model handling PII",
        [](const InteractionInput& in) {
            return in.def.model_trust == ModelTrust::self_hosted &&
                   in.def.data_classes.count(DataClass::pii);
        },
        1.2, "Unvetted self-hosted weights processing personal data.", RuleSeverity::warning);

    add("unowned_high_risk", "High additive risk with no owner",
        [](const InteractionInput& in) { return !in.def.owner && in.additive >= 60; },
        1.15, "High-scoring agent with no accountable owner.", RuleSeverity::warning);

    return registry;
}

DepthResult delegation_depth(const std::map<std::string, std::vector<std::string>>& graph,
                             const std::string& agent_key) {
    DepthResult result;
    DepthBudget budget;
    std::set<std::string> on_path{agent_key};
    explore(graph, agent_key, 0, on_path, result, budget);
    return result;
}

RiskFactor data_sensitivity_delta(const std::set<model::DataClass>& classes,
                                  const weights::WeightView& view) {
    int delta = 0;
    for (const auto dc : classes)
        delta = std::max(delta, wv(view, "data_class." + std::string(model::to_string(dc))));
    return {"data_sensitivity", "Data sensitivity", std::min(delta, kDataSensitivityCap)};
}

RiskFactor security_caps_delta(const std::set<model::SecurityCap>& caps,
                               const weights::WeightView& view) {
    int delta = 0;
    for (const auto cap : caps)
        delta += wv(view, "security_cap." + std::string(model::to_string(cap)));
    return {"security_capabilities", "Security capabilities", std::min(delta, kSecurityCapsCap)};
}

RiskFactor delegation_trust_premium(const std::vector<DelegateObservation>& delegates,
                                    const weights::WeightView& view) {
    int delta = 0;
    for (const auto& d : delegates) {
        if (d.observation_count < kObservationGate) continue;  // cold-start safety
        if (d.bucket == Bucket::critical)
            delta += wv(view, "delegation.premium_critical");
        else if (d.bucket == Bucket::high)
            delta += wv(view, "delegation.premium_high");
    }
    return {"delegation_trust_premium", "Delegation-trust premium",
            std::min(delta, kDelegationPremiumCap)};
}

std::pair<int, double> apply_interactions(int additive, const std::vector<double>& multipliers) {
    double product = 1.0;
    for (const auto m : multipliers) product *= m;
    const double applied = std::min(kMaxMultiplier, product);
    const int final_score =
        std::clamp(round_half_even(static_cast<double>(additive) * applied), 0, 100);
    return {final_score, applied};
}

AgentRiskScore score_agent(const model::AgentDefinition& def, const weights::WeightView& view,
                           const InteractionRegistry& registry, const ScoreOptions& options,
                           const ScoringContext& context) {
    AgentRiskScore score;
    auto& factors = score.factors;
    const auto push = [&](std::string name, std::string label, int delta) {
        if (delta != 0) factors.push_back({std::move(name), std::move(label), delta});
    };

    factors.push_back({"base", "Base score", wv(view, "base")});

    const int write_tools = count_write_tools(def);
    push("write_tools", "Write-tool count", write_tools * wv(view, "tools.write"));
    push("admin_gated_tools", "Admin-gated tools",
         count_admin_tools(def) * wv(view, "tools.admin_gated"));
    push("governance_mode", "Governance mode",
         wv(view, "governance." + std::string(model::to_string(def.human_loop))));
    if (def.can_override)
        push("can_override", "Override authority", wv(view, "authority.can_override"));
    if (def.can_revert) push("can_revert", "Revert authority", wv(view, "authority.can_revert"));
    push("access_level", "Access level",
         wv(view, "access." + std::string(model::to_string(def.access_level))));

    push("data_sensitivity", "Data sensitivity", data_sensitivity_delta(def.data_classes, view).delta);
    push("security_capabilities", "Security capabilities",
         security_caps_delta(def.security_caps, view).delta);
    push("provenance", "Provenance",
         std::min(wv(view, "provenance." + std::string(model::to_string(def.provenance))),
                  kProvenanceCap));
    push("model_trust", "Model trust",
         std::min(wv(view, "model_trust." + std::string(model::to_string(def.model_trust))),
                  kModelTrustCap));

    {
        int blast = 0;
        for (const auto& component : def.blast_radius_components) {
            if (component == "multi_tenant")
                blast += wv(view, "blast_radius.multi_tenant");
            else if (component.rfind("downstream_write", 0) == 0)
                blast += wv(view, "blast_radius.downstream_write");
        }
        push("blast_radius", "Blast radius", std::min(blast, kBlastRadiusCap));
    }

    push("deployment_env", "Deployment environment",
         std::min(wv(view, "deployment." + std::string(model::to_string(def.deployment_env))),
                  kDeploymentCap));

    {
        DepthResult depth;
        if (context.delegation_graph) {
            depth = delegation_depth(*context.delegation_graph, def.agent_key);
        } else {
            std::map<std::string, std::vector<std::string>> local{
                {def.agent_key, def.can_delegate_to}};
            depth = delegation_depth(local, def.agent_key);
        }
        push("delegation_depth", "Delegation depth",
             std::min(depth.depth * wv(view, "delegation.per_hop"), kDelegationDepthCap));
        if (depth.truncated)
            factors.push_back(
                {"delegation_truncated", "Delegation graph traversal truncated", 0});
    }

    {
        int chain = 0;
        for (const auto kind : def.supply_chain)
            chain += wv(view, "supply_chain." + std::string(model::to_string(kind)));
        if (def.dependency_count > kBreadthDependencyThreshold)
            chain += wv(view, "supply_chain.breadth");
        push("supply_chain", "Supply chain", std::min(chain, kSupplyChainCap));
    }

    {
        int inputs = 0;
        for (const auto src : def.input_sources)
            inputs += wv(view, "input_source." + std::string(model::to_string(src)));
        if (def.input_sources.size() >= kBreadthSourceThreshold)
            inputs += wv(view, "input_source.breadth");
        push("input_sources", "Input sources", std::min(inputs, kInputSourcesCap));
    }

    {
        auto approval = def.approval_status;
        if (approval == model::ApprovalStatus::approved && def.review_expires_at &&
            def.review_expires_at->micros < context.now.micros)
            approval = model::ApprovalStatus::expired;  // stale review auto-degrades
        int lifecycle = wv(view, "lifecycle." + std::string(model::to_string(approval)));
        if (def.created_at && context.now.micros - def.created_at->micros < kRecentReviewWindow)
            lifecycle += wv(view, "lifecycle.recent_review");
        if (def.version_count_30d >= kChurnThreshold)
            lifecycle += wv(view, "lifecycle.version_churn");
        if (!def.owner) lifecycle += wv(view, "lifecycle.unowned");
        push("lifecycle", "Lifecycle", lifecycle);
    }

    {
        int credit = 0;
        for (const auto& entry : def.trust_evidence) {
            int magnitude =
                wv(view, "trust_credit." + std::string(model::to_string(entry.kind)));
            if (context.now.micros - entry.recorded_at.micros > kStaleAuditAge)
                magnitude /= 2;  // stale audits decay to half weight
            credit += magnitude;
        }
        push("trust_signals", "Trust-signal credits", -credit);
    }

    {
        int cost = 0;
        if (def.monthly_cost_avg > 0 &&
            def.hourly_cost_peak > 5.0 * (def.monthly_cost_avg / 720.0))
            cost += wv(view, "cost.burst");
        if (def.budget_exhausted) cost += wv(view, "cost.budget_exhausted");
        push("cost_burn", "Cost burn", cost);
    }

    push("delegation_trust_premium", "Delegation-trust premium",
         delegation_trust_premium(context.delegates, view).delta);

    for (const auto& extra : context.extra_factors) factors.push_back(extra);

    int additive = 0;
    for (const auto& f : factors) additive += f.delta;

    if (!def.compliance_scope.empty()) {
        double max_factor = 1.0;
        for (const auto& regime : def.compliance_scope)
            max_factor = std::max(max_factor, regime_severity_factor(regime));
        const int elevation = round_half_even(additive * (max_factor - 1.0));
        push("compliance_scope", "Compliance-scope severity", elevation);
        additive += elevation;
    }

    score.additive = additive;

    std::vector<double> multipliers;
    if (!options.disable_interactions) {
        const InteractionInput input{def, additive, factors, write_tools};
        for (const auto& rule : registry.rules()) {
            if (rule.condition && rule.condition(input)) {
                score.fired_codes.push_back(rule.code);
                multipliers.push_back(rule.multiplier);
            }
        }
    }
    const auto [final_score, applied] = apply_interactions(additive, multipliers);
    score.final_score = final_score;
    score.applied_multiplier = applied;
    score.bucket = bucket_for_score(score.final_score, view);
    return score;
}

Bucket bucket_for_score(int score, const weights::WeightView& view) {
    const auto t = view.bucket_thresholds();
    if (score >= t.critical) return Bucket::critical;
    if (score >= t.high) return Bucket::high;
    if (score >= t.medium) return Bucket::medium;
    return Bucket::low;
}

nlohmann::json to_json(const AgentRiskScore& score) {
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& f : score.factors)
        factors.push_back({{"name", f.name}, {"label", f.label}, {"delta", f.delta}});
    return {
        {"additive", score.additive},
        {"fired_codes", score.fired_codes},
        {"applied_multiplier", score.applied_multiplier},
        {"final", score.final_score},
        {"bucket", std::string(to_string(score.bucket))},
        {"factors", factors},
    };
}

}  // namespace veldt::scoring
