#include "veldt/core_model.hpp"

#include <algorithm>
#include <unordered_set>

namespace veldt::model {
namespace {

template <class Enum, std::size_t N>
std::optional<Enum> parse_from(const std::array<std::pair<std::string_view, Enum>, N>& table,
                               std::string_view s) {
    for (const auto& [name, value] : table)
        if (name == s) return value;
    return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, HumanLoopMode>, 4> kHumanLoop{{
    {"in_loop", HumanLoopMode::in_loop},
    {"on_loop", HumanLoopMode::on_loop},
    {"hybrid", HumanLoopMode::hybrid},
    {"none", HumanLoopMode::none},
}};
constexpr std::array<std::pair<std::string_view, AccessLevel>, 3> kAccess{{
    {"read", AccessLevel::read},
    {"write", AccessLevel::write},
    {"admin", AccessLevel::admin},
}};
constexpr std::array<std::pair<std::string_view, Provenance>, 5> kProvenance{{
    {"builtin", Provenance::builtin},
    {"custom", Provenance::custom},
    {"imported", Provenance::imported},
    {"marketplace", Provenance::marketplace},
    {"third_party", Provenance::third_party},
}};
constexpr std::array<std::pair<std::string_view, ModelTrust>, 4> kModelTrust{{
    {"enterprise", ModelTrust::enterprise},
    {"frontier", ModelTrust::frontier},
    {"open", ModelTrust::open_model},
    {"self_hosted", ModelTrust::self_hosted},
}};
constexpr std::array<std::pair<std::string_view, DeploymentEnv>, 4> kDeployment{{
    {"dev", DeploymentEnv::dev},
    {"staging", DeploymentEnv::staging},
    {"prod", DeploymentEnv::prod},
    {"enclave", DeploymentEnv::enclave},
}};
constexpr std::array<std::pair<std::string_view, DataClass>, 10> kDataClass{{
    {"public", DataClass::public_},
    {"pii", DataClass::pii},
    {"financial", DataClass::financial},
    {"us_classified", DataClass::us_classified},
    {"phi", DataClass::phi},
    {"phi_genetic", DataClass::phi_genetic},
    {"cui", DataClass::cui},
    {"itar", DataClass::itar},
    {"us_secret", DataClass::us_secret},
    {"us_top_secret", DataClass::us_top_secret},
}};
constexpr std::array<std::pair<std::string_view, SecurityCap>, 5> kSecurityCap{{
    {"fs_read", SecurityCap::fs_read},
    {"network_egress", SecurityCap::network_egress},
    {"code_execution", SecurityCap::code_execution},
    {"shell_access", SecurityCap::shell_access},
    {"container_exec", SecurityCap::container_exec},
}};
constexpr std::array<std::pair<std::string_view, InputSource>, 5> kInputSource{{
    {"internal", InputSource::internal},
    {"external_api", InputSource::external_api},
    {"web_fetch", InputSource::web_fetch},
    {"user_upload", InputSource::user_upload},
    {"unknown", InputSource::unknown},
}};
constexpr std::array<std::pair<std::string_view, SupplyChainKind>, 3> kSupplyChain{{
    {"first_party", SupplyChainKind::first_party},
    {"marketplace", SupplyChainKind::marketplace},
    {"self_hosted_ext", SupplyChainKind::self_hosted_ext},
}};
constexpr std::array<std::pair<std::string_view, ApprovalStatus>, 5> kApproval{{
    {"approved", ApprovalStatus::approved},
    {"pending", ApprovalStatus::pending},
    {"rejected", ApprovalStatus::rejected},
    {"expired", ApprovalStatus::expired},
    {"unknown", ApprovalStatus::unknown},
}};
constexpr std::array<std::pair<std::string_view, SignalKind>, 6> kSignalKind{{
    {"oos_tool", SignalKind::oos_tool},
    {"rbac_refusal", SignalKind::rbac_refusal},
    {"governance_block", SignalKind::governance_block},
    {"data_leak", SignalKind::data_leak},
    {"cross_tenant", SignalKind::cross_tenant},
    {"policy_violation", SignalKind::policy_violation},
}};
constexpr std::array<std::pair<std::string_view, QualitySignal>, 3> kQualitySignal{{
    {"hallucination", QualitySignal::hallucination},
    {"qa_irrelevance", QualitySignal::qa_irrelevance},
    {"prompt_injection_attempt", QualitySignal::prompt_injection},
}};
constexpr std::array<std::pair<std::string_view, EvidenceKind>, 7> kEvidenceKind{{
    {"prompt", EvidenceKind::prompt},
    {"response", EvidenceKind::response},
    {"tool_call", EvidenceKind::tool_call},
    {"tool_result", EvidenceKind::tool_result},
    {"delegation_message", EvidenceKind::delegation_message},
    {"hil_decision", EvidenceKind::hil_decision},
    {"system_message", EvidenceKind::system_message},
}};
constexpr std::array<std::pair<std::string_view, PrincipalKind>, 3> kPrincipalKind{{
    {"user", PrincipalKind::user},
    {"agent", PrincipalKind::agent},
    {"service_account", PrincipalKind::service_account},
}};
constexpr std::array<std::pair<std::string_view, AuditKind>, 3> kAuditKind{{
    {"red_team", AuditKind::red_team},
    {"fairness_audit", AuditKind::fairness_audit},
    {"citation_audit", AuditKind::citation_audit},
}};

template <class Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<std::string_view, Enum>, N>& table, Enum v) {
    for (const auto& [name, value] : table)
        if (value == v) return name;
    return "?";
}

}  // namespace

std::string_view to_string(HumanLoopMode v) { return name_of(kHumanLoop, v); }
std::string_view to_string(AccessLevel v) { return name_of(kAccess, v); }
std::string_view to_string(Provenance v) { return name_of(kProvenance, v); }
std::string_view to_string(ModelTrust v) { return name_of(kModelTrust, v); }
std::string_view to_string(DeploymentEnv v) { return name_of(kDeployment, v); }
std::string_view to_string(DataClass v) { return name_of(kDataClass, v); }
std::string_view to_string(SecurityCap v) { return name_of(kSecurityCap, v); }
std::string_view to_string(InputSource v) { return name_of(kInputSource, v); }
std::string_view to_string(SupplyChainKind v) { return name_of(kSupplyChain, v); }
std::string_view to_string(ApprovalStatus v) { return name_of(kApproval, v); }
std::string_view to_string(SignalKind v) { return name_of(kSignalKind, v); }
std::string_view to_string(QualitySignal v) { return name_of(kQualitySignal, v); }
std::string_view to_string(EvidenceKind v) { return name_of(kEvidenceKind, v); }
std::string_view to_string(PrincipalKind v) { return name_of(kPrincipalKind, v); }
std::string_view to_string(AuditKind v) { return name_of(kAuditKind, v); }

std::optional<HumanLoopMode> parse_human_loop(std::string_view s) { return parse_from(kHumanLoop, s); }
std::optional<AccessLevel> parse_access_level(std::string_view s) { return parse_from(kAccess, s); }
std::optional<Provenance> parse_provenance(std::string_view s) { return parse_from(kProvenance, s); }
std::optional<ModelTrust> parse_model_trust(std::string_view s) { return parse_from(kModelTrust, s); }
std::optional<DeploymentEnv> parse_deployment_env(std::string_view s) { return parse_from(kDeployment, s); }
std::optional<DataClass> parse_data_class(std::string_view s) { return parse_from(kDataClass, s); }
std::optional<SecurityCap> parse_security_cap(std::string_view s) { return parse_from(kSecurityCap, s); }
InputSource parse_input_source(std::string_view s) {
    return parse_from(kInputSource, s).value_or(InputSource::unknown);
}
std::optional<SupplyChainKind> parse_supply_chain_kind(std::string_view s) {
    return parse_from(kSupplyChain, s);
}
ApprovalStatus parse_approval_status(std::string_view s) {
    return parse_from(kApproval, s).value_or(ApprovalStatus::unknown);
}
std::optional<SignalKind> parse_signal_kind(std::string_view s) { return parse_from(kSignalKind, s); }
std::optional<QualitySignal> parse_quality_signal(std::string_view s) {
    return parse_from(kQualitySignal, s);
}
std::optional<EvidenceKind> parse_evidence_kind(std::string_view s) {
    return parse_from(kEvidenceKind, s);
}
std::optional<PrincipalKind> parse_principal_kind(std::string_view s) {
    return parse_from(kPrincipalKind, s);
}
std::optional<AuditKind> parse_audit_kind(std::string_view s) { return parse_from(kAuditKind, s); }

namespace {

class Validator {
public:
    explicit Validator(const nlohmann::json& raw) : raw_(raw) {}

    ValidationResult run() {
        if (!raw_.is_object()) {
            add("TypeMismatch", "", "definition must be a JSON object");
            return {std::nullopt, std::move(violations_)};
        }
        for (const auto& [key, _] : raw_.items()) {
            if (!kKnownFields.contains(key))
                add("UnknownField", key, "unrecognized definition field");
        }

        AgentDefinition def;
        def.agent_key = str("agent_key", "");
        if (def.agent_key.empty())
            add("MissingRequiredField", "agent_key", "agent_key is required and must be non-empty");
        def.name = str("name", "");
        def.description = str("description", "");
        def.system_prompt = str("system_prompt", "");
        def.model = str("model", "");
        def.tools = str_list("tools");
        def.denied_tools = str_list("denied_tools");

        std::unordered_set<std::string> tool_set(def.tools.begin(), def.tools.end());
        for (const auto& t : def.denied_tools)
            if (tool_set.contains(t))
                add("DuplicateTool", "denied_tools", "tool both granted and denied: " + t);

        def.human_loop = enum_field("human_loop", parse_human_loop, HumanLoopMode::none);
        def.access_level = enum_field("access_level", parse_access_level, AccessLevel::read);
        def.can_override = boolean("can_override", false);
        def.can_revert = boolean("can_revert", false);
        def.can_delegate_to = str_list("can_delegate_to");
        def.required_roles = str_list("required_roles");
        if (raw_.contains("extends") && !raw_["extends"].is_null()) {
            if (raw_["extends"].is_string())
                def.extends = raw_["extends"].get<std::string>();
            else
                add("TypeMismatch", "extends", "expected string or null");
        }
        for (const auto& s : str_list("data_classes")) {
            if (auto dc = parse_data_class(s))
                def.data_classes.insert(*dc);
            else
                add("UnknownEnumValue", "data_classes", "unknown data class: " + s);
        }
        for (const auto& s : str_list("security_caps")) {
            if (auto cap = parse_security_cap(s))
                def.security_caps.insert(*cap);
            else
                add("UnknownEnumValue", "security_caps", "unknown security cap: " + s);
        }
        def.provenance = enum_field("provenance", parse_provenance, Provenance::custom);
        def.model_trust = enum_field("model_trust", parse_model_trust, ModelTrust::open_model);
        for (const auto& s : str_list("compliance_scope")) def.compliance_scope.insert(s);

        def.deployment_env = enum_field("deployment_env", parse_deployment_env, DeploymentEnv::dev);
        for (const auto& s : str_list("input_sources")) def.input_sources.insert(parse_input_source(s));
        for (const auto& s : str_list("supply_chain")) {
            if (auto k = parse_supply_chain_kind(s))
                def.supply_chain.insert(*k);
            else
                add("UnknownEnumValue", "supply_chain", "unknown supply chain kind: " + s);
        }
        def.dependency_count = integer("dependency_count", 0);
        if (def.dependency_count < 0)
            add("OutOfRange", "dependency_count", "must be nonnegative");
        if (raw_.contains("approval_status")) {
            if (raw_["approval_status"].is_string())
                def.approval_status = parse_approval_status(raw_["approval_status"].get<std::string>());
            else
                add("TypeMismatch", "approval_status", "expected string");
        }
        def.review_expires_at = timestamp("review_expires_at");
        def.created_at = timestamp("created_at");
        def.version_count_30d = integer("version_count_30d", 0);
        if (def.version_count_30d < 0)
            add("OutOfRange", "version_count_30d", "must be nonnegative");
        if (raw_.contains("owner") && !raw_["owner"].is_null()) {
            if (raw_["owner"].is_string())
                def.owner = raw_["owner"].get<std::string>();
            else
                add("TypeMismatch", "owner", "expected string or null");
        }
        def.monthly_cost_avg = decimal("monthly_cost_avg");
        def.hourly_cost_peak = decimal("hourly_cost_peak");
        def.blast_radius_components = str_list("blast_radius_components");
        def.budget_exhausted = boolean("budget_exhausted", false);
        if (raw_.contains("trust_evidence")) {
            if (!raw_["trust_evidence"].is_array()) {
                add("TypeMismatch", "trust_evidence", "expected array");
            } else {
                for (const auto& item : raw_["trust_evidence"]) {
                    if (!item.is_object() || !item.contains("kind") || !item.contains("recorded_at")) {
                        add("TypeMismatch", "trust_evidence", "entries need kind and recorded_at");
                        continue;
                    }
                    const auto kind = parse_audit_kind(item["kind"].get<std::string>());
                    const auto at = item["recorded_at"].is_string()
                                        ? parse_iso8601(item["recorded_at"].get<std::string>())
                                        : std::nullopt;
                    if (!kind) {
                        add("UnknownEnumValue", "trust_evidence", "unknown audit kind");
                        continue;
                    }
                    if (!at) {
                        add("TypeMismatch", "trust_evidence", "recorded_at must be ISO-8601");
                        continue;
                    }
                    def.trust_evidence.push_back({*kind, *at});
                }
            }
        }

        if (!violations_.empty()) return {std::nullopt, std::move(violations_)};
        return {std::move(def), {}};
    }

private:
    inline static const std::unordered_set<std::string> kKnownFields = {
        "agent_key", "name", "description", "system_prompt", "model", "tools", "denied_tools",
        "human_loop", "access_level", "can_override", "can_revert", "can_delegate_to",
        "required_roles", "extends", "data_classes", "security_caps", "provenance", "model_trust",
        "compliance_scope", "deployment_env", "input_sources", "supply_chain", "dependency_count",
        "approval_status", "review_expires_at", "created_at", "version_count_30d", "owner",
        "monthly_cost_avg", "hourly_cost_peak", "blast_radius_components", "budget_exhausted",
        "trust_evidence",
    };

    void add(std::string code, std::string field, std::string message) {
        violations_.push_back({std::move(code), std::move(field), std::move(message)});
    }

    std::string str(const char* field, std::string fallback) {
        if (!raw_.contains(field)) return fallback;
        if (!raw_[field].is_string()) {
            add("TypeMismatch", field, "expected string");
            return fallback;
        }
        return raw_[field].get<std::string>();
    }

    bool boolean(const char* field, bool fallback) {
        if (!raw_.contains(field)) return fallback;
        if (!raw_[field].is_boolean()) {
            add("TypeMismatch", field, "expected boolean");
            return fallback;
        }
        return raw_[field].get<bool>();
    }

    std::int64_t integer(const char* field, std::int64_t fallback) {
        if (!raw_.contains(field)) return fallback;
        if (!raw_[field].is_number_integer() && !raw_[field].is_number_unsigned()) {
            add("TypeMismatch", field, "expected integer");
            return fallback;
        }
        return raw_[field].get<std::int64_t>();
    }

    double decimal(const char* field) {
        if (!raw_.contains(field)) return 0.0;
        if (!raw_[field].is_number()) {
            add("TypeMismatch", field, "expected number");
            return 0.0;
        }
        const double v = raw_[field].get<double>();
        if (v < 0) add("OutOfRange", field, "must be nonnegative");
        return v;
    }

    std::vector<std::string> str_list(const char* field) {
        std::vector<std::string> out;
        if (!raw_.contains(field)) return out;
        if (!raw_[field].is_array()) {
            add("TypeMismatch", field, "expected array of strings");
            return out;
        }
        for (const auto& item : raw_[field]) {
            if (!item.is_string()) {
                add("TypeMismatch", field, "expected array of strings");
                return out;
            }
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    std::optional<Timestamp> timestamp(const char* field) {
        if (!raw_.contains(field) || raw_[field].is_null()) return std::nullopt;
        if (!raw_[field].is_string()) {
            add("TypeMismatch", field, "expected ISO-8601 string");
            return std::nullopt;
        }
        const auto t = parse_iso8601(raw_[field].get<std::string>());
        if (!t) add("TypeMismatch", field, "expected ISO-8601 string");
        return t;
    }

    template <class Enum>
    Enum enum_field(const char* field, std::optional<Enum> (*parse)(std::string_view), Enum fallback) {
        if (!raw_.contains(field)) return fallback;
        if (!raw_[field].is_string()) {
            add("TypeMismatch", field, "expected string");
            return fallback;
        }
        const auto s = raw_[field].get<std::string>();
        if (auto v = parse(s)) return *v;
        add("UnknownEnumValue", field, "unknown value: " + s);
        return fallback;
    }

    const nlohmann::json& raw_;
    std::vector<Violation> violations_;
};

template <class T>
nlohmann::json names_of(const std::set<T>& items) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& item : items) arr.push_back(std::string(to_string(item)));
    return arr;
}

}  // namespace

ValidationResult validate_definition(const nlohmann::json& raw) { return Validator(raw).run(); }

nlohmann::json definition_to_json(const AgentDefinition& def) {
    nlohmann::json j;
    j["agent_key"] = def.agent_key;
    j["name"] = def.name;
    j["description"] = def.description;
    j["system_prompt"] = def.system_prompt;
    j["model"] = def.model;
    j["tools"] = def.tools;
    j["denied_tools"] = def.denied_tools;
    j["human_loop"] = std::string(to_string(def.human_loop));
    j["access_level"] = std::string(to_string(def.access_level));
    j["can_override"] = def.can_override;
    j["can_revert"] = def.can_revert;
    j["can_delegate_to"] = def.can_delegate_to;
    j["required_roles"] = def.required_roles;
    j["extends"] = def.extends ? nlohmann::json(*def.extends) : nlohmann::json(nullptr);
    j["data_classes"] = names_of(def.data_classes);
    j["security_caps"] = names_of(def.security_caps);
    j["provenance"] = std::string(to_string(def.provenance));
    j["model_trust"] = std::string(to_string(def.model_trust));
    nlohmann::json scope = nlohmann::json::array();
    for (const auto& s : def.compliance_scope) scope.push_back(s);
    j["compliance_scope"] = scope;

    j["deployment_env"] = std::string(to_string(def.deployment_env));
    nlohmann::json sources = nlohmann::json::array();
    for (const auto& s : def.input_sources) sources.push_back(std::string(to_string(s)));
    j["input_sources"] = sources;
    nlohmann::json chain = nlohmann::json::array();
    for (const auto& s : def.supply_chain) chain.push_back(std::string(to_string(s)));
    j["supply_chain"] = chain;
    j["dependency_count"] = def.dependency_count;
    j["approval_status"] = std::string(to_string(def.approval_status));
    j["review_expires_at"] =
        def.review_expires_at ? nlohmann::json(format_iso8601(*def.review_expires_at)) : nlohmann::json(nullptr);
    j["created_at"] = def.created_at ? nlohmann::json(format_iso8601(*def.created_at)) : nlohmann::json(nullptr);
    j["version_count_30d"] = def.version_count_30d;
    j["owner"] = def.owner ? nlohmann::json(*def.owner) : nlohmann::json(nullptr);
    j["monthly_cost_avg"] = def.monthly_cost_avg;
    j["hourly_cost_peak"] = def.hourly_cost_peak;
    j["blast_radius_components"] = def.blast_radius_components;
    j["budget_exhausted"] = def.budget_exhausted;
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& e : def.trust_evidence)
        evidence.push_back({{"kind", std::string(to_string(e.kind))},
                            {"recorded_at", format_iso8601(e.recorded_at)}});
    j["trust_evidence"] = evidence;
    return j;
}

canonical::ValueMap hash_projection(const AgentDefinition& def) {
    using canonical::Value;
    canonical::ValueMap m;

    auto list_of = [](const std::vector<std::string>& items) {
        canonical::ValueList out;
        out.reserve(items.size());
        for (const auto& s : items) out.emplace_back(s);
        return out;
    };

    m.emplace("agent_key", def.agent_key);
    m.emplace("name", def.name);
    m.emplace("description", def.description);
    m.emplace("system_prompt", def.system_prompt);
    m.emplace("model", def.model);
    m.emplace("tools", list_of(def.tools));
    m.emplace("denied_tools", list_of(def.denied_tools));
    m.emplace("human_loop", std::string(to_string(def.human_loop)));
    m.emplace("access_level", std::string(to_string(def.access_level)));
    m.emplace("can_override", def.can_override);
    m.emplace("can_revert", def.can_revert);
    m.emplace("can_delegate_to", list_of(def.can_delegate_to));
    m.emplace("required_roles", list_of(def.required_roles));
    // Absent optionals canonicalize as null.
    m.emplace("extends", def.extends ? Value(*def.extends) : Value(nullptr));

    std::vector<std::string> classes, caps, scope;
    for (const auto& c : def.data_classes) classes.emplace_back(to_string(c));
    for (const auto& c : def.security_caps) caps.emplace_back(to_string(c));
    scope.assign(def.compliance_scope.begin(), def.compliance_scope.end());
    m.emplace("data_classes", canonical::string_set(classes));
    m.emplace("security_caps", canonical::string_set(caps));
    m.emplace("provenance", std::string(to_string(def.provenance)));
    m.emplace("model_trust", std::string(to_string(def.model_trust)));
    m.emplace("compliance_scope", canonical::string_set(scope));
    return m;
}

crypto::Hash256 definition_hash(const AgentDefinition& def) {
    return canonical::hash_of(canonical::Value(hash_projection(def)));
}

std::string definition_hash_hex(const AgentDefinition& def) {
    const auto h = definition_hash(def);
    return crypto::to_hex(h);
}

}  // namespace veldt::model
