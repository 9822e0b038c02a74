#include "veldt/attacksim.hpp"

namespace veldt::attacksim {
namespace {

constexpr std::string_view kInvocation = "attack-sim";

model::AgentDefinition base_agent(std::string_view key, std::string_view name,
                                  std::string_view description) {
    model::AgentDefinition def;
    def.agent_key = std::string(key);
    def.name = std::string(name);
    def.description = std::string(description);
    def.model = "gpt-4o";
    def.model_trust = model::ModelTrust::enterprise;
    def.provenance = model::Provenance::builtin;
    def.deployment_env = model::DeploymentEnv::prod;
    def.approval_status = model::ApprovalStatus::approved;
    def.owner = "lending-platform";
    return def;
}

int current_trust(const storage::Storage& store, std::string_view tenant, std::string_view key) {
    const auto record = trust::get_principal(store, tenant, model::PrincipalKind::agent, key);
    return record ? record->trust_score : trust::kStartingTrust;
}

Trajectory replay(storage::Storage& store, const FleetScenario& scenario,
                  std::optional<model::SignalKind> signal, const weights::WeightView& view,
                  Timestamp start) {
    Trajectory out;
    out.subject_agent_key = scenario.orchestrator.agent_key;
    for (int n = 1; n <= scenario.invocations; ++n) {
        const Timestamp at{start.micros + static_cast<std::int64_t>(n) * kMicrosPerSecond};
        if (signal) {
            std::optional<std::string> actor;
            if (scenario.attribution_enabled) actor = scenario.orchestrator.agent_key;
            trust::record_principal_signal(store, scenario.tenant_id, model::PrincipalKind::agent,
                                           scenario.compromised_agent_key, *signal, actor, view, at,
                                           kInvocation);
        }
        TrajectoryPoint point;
        point.invocation_no = n;
        point.trust = current_trust(store, scenario.tenant_id, out.subject_agent_key);
        point.bucket = trust::bucket_for_trust(point.trust);
        if (!out.first_risky &&
            (point.bucket == trust::TrustBucket::risky || point.bucket == trust::TrustBucket::blocked))
            out.first_risky = n;
        if (!out.first_blocked && point.bucket == trust::TrustBucket::blocked) out.first_blocked = n;
        out.points.push_back(point);
    }
    return out;
}

}  // namespace

FleetScenario loan_fleet(std::string_view tenant) {
    FleetScenario scenario;
    scenario.tenant_id = std::string(tenant);

    auto triage = base_agent("loan-triage", "Loan Triage Agent",
                             "Coordinates application intake and delegates verification, "
                             "screening, and risk review.");
    triage.tools = {"fetch_application", "route_application"};
    triage.human_loop = model::HumanLoopMode::on_loop;
    triage.can_delegate_to = {"doc-verify", "ofac-screening", "risk-review"};
    triage.data_classes = {model::DataClass::pii, model::DataClass::financial};
    triage.input_sources = {model::InputSource::user_upload};
    triage.compliance_scope = {"nydfs_part_500"};
    scenario.orchestrator = triage;

    auto doc_verify = base_agent("doc-verify", "Document Verification Sub-Agent",
                                 "OCR and identity matching for uploaded KYC documents.");
    doc_verify.tools = {"extract_document_text", "match_identity"};
    doc_verify.human_loop = model::HumanLoopMode::in_loop;
    doc_verify.data_classes = {model::DataClass::pii};
    doc_verify.security_caps = {model::SecurityCap::fs_read};
    doc_verify.provenance = model::Provenance::imported;
    doc_verify.input_sources = {model::InputSource::user_upload};
    scenario.sub_agents.push_back(doc_verify);

    auto ofac = base_agent("ofac-screening", "Sanctions Screening Sub-Agent",
                           "Checks applicants against the sanctions list.");
    ofac.tools = {"lookup_sanctions_list"};
    ofac.human_loop = model::HumanLoopMode::in_loop;
    ofac.data_classes = {model::DataClass::pii};
    scenario.sub_agents.push_back(ofac);

    auto risk = base_agent("risk-review", "Risk Review Agent",
                           "Credit-policy reasoner that can flag applications for human "
                           "underwriter review.");
    risk.tools = {"read_credit_policy", "flag_application", "override_decision"};
    risk.human_loop = model::HumanLoopMode::hybrid;
    risk.access_level = model::AccessLevel::write;
    risk.can_override = true;
    risk.data_classes = {model::DataClass::financial};
    scenario.sub_agents.push_back(risk);

    scenario.compromised_agent_key = "doc-verify";
    return scenario;
}

nlohmann::json to_json(const Trajectory& t) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : t.points) {
        points.push_back({{"invocation_no", p.invocation_no},
                          {"trust", p.trust},
                          {"bucket", trust::to_string(p.bucket)}});
    }
    nlohmann::json doc{{"subject_agent_key", t.subject_agent_key}, {"trajectory", points}};
    doc["first_risky"] = t.first_risky ? nlohmann::json(*t.first_risky) : nlohmann::json(nullptr);
    doc["first_blocked"] = t.first_blocked ? nlohmann::json(*t.first_blocked) : nlohmann::json(nullptr);
    return doc;
}

std::optional<int> predicted_crossing(int start, int delta, int threshold) {
    if (delta >= 0) return std::nullopt;
    if (start < threshold) return 1;
    // Smallest n with start + n*delta < threshold under integer arithmetic.
    const int step = -delta;
    return (start - threshold) / step + 1;
}

Trajectory run_topology_attack(storage::Storage& store, const FleetScenario& scenario,
                               model::SignalKind signal, const weights::WeightView& view,
                               Timestamp start) {
    return replay(store, scenario, signal, view, start);
}

Trajectory run_matched_control(storage::Storage& store, const FleetScenario& scenario,
                               const weights::WeightView& view, Timestamp start) {
    return replay(store, scenario, std::nullopt, view, start);
}

}  // namespace veldt::attacksim
