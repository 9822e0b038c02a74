#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/canonical.hpp"
#include "veldt/crypto.hpp"
#include "veldt/timeutil.hpp"

namespace veldt::model {

enum class HumanLoopMode { in_loop, on_loop, hybrid, none };
enum class AccessLevel { read, write, admin };
enum class Provenance { builtin, custom, imported, marketplace, third_party };
enum class ModelTrust { enterprise, frontier, open_model, self_hosted };
enum class DeploymentEnv { dev, staging, prod, enclave };
enum class DataClass {
    public_,
    pii,
    financial,
    us_classified,
    phi,
    phi_genetic,
    cui,
    itar,
    us_secret,
    us_top_secret,
};
enum class SecurityCap { fs_read, network_egress, code_execution, shell_access, container_exec };
enum class InputSource { internal, external_api, web_fetch, user_upload, unknown };
enum class SupplyChainKind { first_party, marketplace, self_hosted_ext };
enum class ApprovalStatus { approved, pending, rejected, expired, unknown };
enum class SignalKind { oos_tool, rbac_refusal, governance_block, data_leak, cross_tenant, policy_violation };
enum class QualitySignal { hallucination, qa_irrelevance, prompt_injection };
enum class EvidenceKind {
    prompt,
    response,
    tool_call,
    tool_result,
    delegation_message,
    hil_decision,
    system_message,
};
enum class PrincipalKind { user, agent, service_account };
enum class AuditKind { red_team, fairness_audit, citation_audit };

std::string_view to_string(HumanLoopMode);
std::string_view to_string(AccessLevel);
std::string_view to_string(Provenance);
std::string_view to_string(ModelTrust);
std::string_view to_string(DeploymentEnv);
std::string_view to_string(DataClass);
std::string_view to_string(SecurityCap);
std::string_view to_string(InputSource);
std::string_view to_string(SupplyChainKind);
std::string_view to_string(ApprovalStatus);
std::string_view to_string(SignalKind);
std::string_view to_string(QualitySignal);
std::string_view to_string(EvidenceKind);
std::string_view to_string(PrincipalKind);
std::string_view to_string(AuditKind);

std::optional<HumanLoopMode> parse_human_loop(std::string_view);
std::optional<AccessLevel> parse_access_level(std::string_view);
std::optional<Provenance> parse_provenance(std::string_view);
std::optional<ModelTrust> parse_model_trust(std::string_view);
std::optional<DeploymentEnv> parse_deployment_env(std::string_view);
std::optional<DataClass> parse_data_class(std::string_view);
std::optional<SecurityCap> parse_security_cap(std::string_view);
// Unrecognized sources map to InputSource::unknown (explicit unknown bucket).
InputSource parse_input_source(std::string_view);
std::optional<SupplyChainKind> parse_supply_chain_kind(std::string_view);
// Unrecognized statuses map to ApprovalStatus::unknown.
ApprovalStatus parse_approval_status(std::string_view);
std::optional<SignalKind> parse_signal_kind(std::string_view);
std::optional<QualitySignal> parse_quality_signal(std::string_view);
std::optional<EvidenceKind> parse_evidence_kind(std::string_view);
std::optional<PrincipalKind> parse_principal_kind(std::string_view);
std::optional<AuditKind> parse_audit_kind(std::string_view);

struct TrustEvidenceEntry {
    AuditKind kind = AuditKind::red_team;
    Timestamp recorded_at;
    friend bool operator==(const TrustEvidenceEntry&, const TrustEvidenceEntry&) = default;
};

// The identity-bearing fields (exactly the hash allowlist) come first; the
// rest is operational state that may change without constituting drift.
struct AgentDefinition {
    // -- hashed identity fields -------------------------------------------
    std::string agent_key;
    std::string name;
    std::string description;
    std::string system_prompt;
    std::string model;
    std::vector<std::string> tools;
    std::vector<std::string> denied_tools;
    HumanLoopMode human_loop = HumanLoopMode::none;
    AccessLevel access_level = AccessLevel::read;
    bool can_override = false;
    bool can_revert = false;
    std::vector<std::string> can_delegate_to;
    std::vector<std::string> required_roles;
    std::optional<std::string> extends;
    std::set<DataClass> data_classes;
    std::set<SecurityCap> security_caps;
    Provenance provenance = Provenance::custom;
    ModelTrust model_trust = ModelTrust::open_model;
    std::set<std::string> compliance_scope;

    // -- operational fields (never hashed, never drift) -------------------
    DeploymentEnv deployment_env = DeploymentEnv::dev;
    std::set<InputSource> input_sources;
    std::set<SupplyChainKind> supply_chain;
    std::int64_t dependency_count = 0;
    ApprovalStatus approval_status = ApprovalStatus::unknown;
    std::optional<Timestamp> review_expires_at;
    std::optional<Timestamp> created_at;
    std::int64_t version_count_30d = 0;
    std::optional<std::string> owner;
    double monthly_cost_avg = 0.0;
    double hourly_cost_peak = 0.0;
    std::vector<std::string> blast_radius_components;
    bool budget_exhausted = false;
    std::vector<TrustEvidenceEntry> trust_evidence;
};

// Hash allowlist, in projection order.
inline constexpr std::array<std::string_view, 19> kHashedFields = {
    "agent_key",     "name",          "description",   "system_prompt", "model",
    "tools",         "denied_tools",  "human_loop",    "access_level",  "can_override",
    "can_revert",    "can_delegate_to", "required_roles", "extends",     "data_classes",
    "security_caps", "provenance",    "model_trust",   "compliance_scope",
};

struct Violation {
    std::string code;     // MissingRequiredField, UnknownEnumValue, DuplicateTool, ...
    std::string field;
    std::string message;
};

struct ValidationResult {
    std::optional<AgentDefinition> definition;
    std::vector<Violation> violations;
    bool ok() const { return definition.has_value() && violations.empty(); }
};

// Validates a raw JSON document into a definition. agent_key is the only
// required field; everything else has a (pessimistic) default. All
// violations are collected, not just the first.
ValidationResult validate_definition(const nlohmann::json& raw);

nlohmann::json definition_to_json(const AgentDefinition& def);

// The canonical projection of the allowlisted fields; input to hashing.
canonical::ValueMap hash_projection(const AgentDefinition& def);

crypto::Hash256 definition_hash(const AgentDefinition& def);
std::string definition_hash_hex(const AgentDefinition& def);

}  // namespace veldt::model
