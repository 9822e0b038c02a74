#pragma once

// Six scenario definitions spanning the multiplier ablation space, shared by
// the unit suite and the acceptance gate. Each is built from the seeded
// factor schedule so the additive score, fired rules, applied multiplier,
// final score, and both buckets are exact.

#include <string>
#include <vector>

#include <veldt/core_model.hpp>
#include <veldt/scoring.hpp>

namespace fixtures {

inline veldt::model::AgentDefinition owned_agent(std::string key) {
    using namespace veldt;
    model::AgentDefinition def;
    def.agent_key = std::move(key);
    def.name = def.agent_key;
    def.model = "gpt-4o";
    def.human_loop = model::HumanLoopMode::in_loop;
    def.access_level = model::AccessLevel::read;
    def.provenance = model::Provenance::builtin;
    def.model_trust = model::ModelTrust::enterprise;
    def.deployment_env = model::DeploymentEnv::dev;
    def.approval_status = model::ApprovalStatus::approved;
    def.owner = "platform-team";
    return def;
}

// additive 86: 5 base + 8 writes + 30 ungoverned + 15 prod + 15 pii
//            + 5 custom + 8 open-weights model
inline veldt::model::AgentDefinition autonomous_writer_in_prod() {
    using namespace veldt;
    auto def = owned_agent("autonomous-writer");
    def.tools = {"update_record", "send_notification"};
    def.human_loop = model::HumanLoopMode::none;
    def.deployment_env = model::DeploymentEnv::prod;
    def.data_classes = {model::DataClass::pii};
    def.provenance = model::Provenance::custom;
    def.model_trust = model::ModelTrust::open_model;
    return def;
}

// additive 63: 5 base + 20 code-exec + 15 user-upload + 15 prod
//            + 3 frontier + 5 custom
inline veldt::model::AgentDefinition code_exec_user_input_hil() {
    using namespace veldt;
    auto def = owned_agent("code-exec-notebook");
    def.tools = {"fetch_report"};
    def.security_caps = {model::SecurityCap::code_execution};
    def.input_sources = {model::InputSource::user_upload};
    def.deployment_env = model::DeploymentEnv::prod;
    def.model_trust = model::ModelTrust::frontier;
    def.provenance = model::Provenance::custom;
    return def;
}

// additive 64: 5 base + 4 write + 10 self-hosted + 15 pii + 15 prod
//            + 10 egress + 5 custom
inline veldt::model::AgentDefinition self_hosted_pii_hil() {
    using namespace veldt;
    auto def = owned_agent("self-hosted-profiler");
    def.tools = {"update_profile"};
    def.model_trust = model::ModelTrust::self_hosted;
    def.data_classes = {model::DataClass::pii};
    def.deployment_env = model::DeploymentEnv::prod;
    def.security_caps = {model::SecurityCap::network_egress};
    def.provenance = model::Provenance::custom;
    return def;
}

// additive 57: 5 base + 4 write + 15 marketplace + 20 financial + 5 staging
//            + 3 frontier + 5 one-hop delegation
inline veldt::model::AgentDefinition untrusted_chain_hil() {
    using namespace veldt;
    auto def = owned_agent("marketplace-router");
    def.tools = {"update_ledger"};
    def.provenance = model::Provenance::marketplace;
    def.data_classes = {model::DataClass::financial};
    def.deployment_env = model::DeploymentEnv::staging;
    def.model_trust = model::ModelTrust::frontier;
    def.can_delegate_to = {"helper-a", "helper-b", "helper-c"};
    return def;
}

// additive 100: 5 base + 12 writes + 30 ungoverned + 15 prod + 20 code-exec
//             + 15 user-upload + 3 frontier
inline veldt::model::AgentDefinition replit_style_autonomous() {
    using namespace veldt;
    auto def = owned_agent("autonomous-devbox");
    def.tools = {"execute_script", "write_file", "delete_branch"};
    def.human_loop = model::HumanLoopMode::none;
    def.deployment_env = model::DeploymentEnv::prod;
    def.security_caps = {model::SecurityCap::code_execution};
    def.input_sources = {model::InputSource::user_upload};
    def.model_trust = model::ModelTrust::frontier;
    return def;
}

// additive 34: 5 base + 15 pii + 8 external-api + 5 custom
//            + 1 scope elevation (33 * 0.02 rounds to 1)
inline veldt::model::AgentDefinition benign_readonly_hil() {
    using namespace veldt;
    auto def = owned_agent("policy-reader");
    def.tools = {"read_policy"};
    def.data_classes = {model::DataClass::pii};
    def.input_sources = {model::InputSource::external_api};
    def.provenance = model::Provenance::custom;
    def.compliance_scope = {"gdpr"};
    return def;
}

struct ExpectedScore {
    veldt::model::AgentDefinition def;
    int additive;
    veldt::scoring::Bucket additive_bucket;
    int final_score;
    veldt::scoring::Bucket final_bucket;
    double multiplier;
    std::vector<std::string> fired;
};

inline std::vector<ExpectedScore> ablation_cases() {
    using veldt::scoring::Bucket;
    return {
        {autonomous_writer_in_prod(), 86, Bucket::critical, 100, Bucket::critical, 1.30,
         {"autonomous_writer_in_prod"}},
        {code_exec_user_input_hil(), 63, Bucket::high, 94, Bucket::critical, 1.50,
         {"code_exec_with_user_input"}},
        {self_hosted_pii_hil(), 64, Bucket::high, 77, Bucket::high, 1.20,
         {"self_hosted_with_pii"}},
        {untrusted_chain_hil(), 57, Bucket::medium, 68, Bucket::high, 1.20,
         {"untrusted_chain"}},
        {replit_style_autonomous(), 100, Bucket::critical, 100, Bucket::critical, 1.95,
         {"autonomous_writer_in_prod", "code_exec_with_user_input"}},
        {benign_readonly_hil(), 34, Bucket::medium, 34, Bucket::medium, 1.00, {}},
    };
}

}  // namespace fixtures
