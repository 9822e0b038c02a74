#include "veldt/weights.hpp"

#include <atomic>
#include <cmath>
#include <utility>

#include "veldt/canonical.hpp"
#include "veldt/crypto.hpp"
#include "veldt/evidence.hpp"

namespace veldt::weights {
namespace {

constexpr std::string_view kOverrideStore = "weight_overrides";
constexpr std::string_view kChangeStore = "weight_changes";
constexpr std::string_view kAuditInvocation = "weights-audit";

std::string table_key(Scope scope, std::string_view key) {
    std::string out(to_string(scope));
    out.push_back('\x1f');
    out += key;
    return out;
}

// Seeded platform defaults. Additive factor weights carry the published
// schedule values; signal deltas are stored as positive magnitudes; the
// data-class multipliers start neutral so only overrides move them.
const std::map<std::string, double>& seeded_table() {
    static const std::map<std::string, double> table = [] {
        std::map<std::string, double> t;
        const auto fw = [&](std::string_view key, double v) {
            t.emplace(table_key(Scope::factor_weight, key), v);
        };
        fw("base", 5);
        fw("tools.write", 4);
        fw("tools.admin_gated", 8);
        fw("governance.none", 30);
        fw("governance.on_loop", 15);
        fw("governance.hybrid", 10);
        fw("governance.in_loop", 0);
        fw("authority.can_override", 12);
        fw("authority.can_revert", 8);
        fw("access.read", 0);
        fw("access.write", 6);
        fw("access.admin", 10);
        fw("data_class.public", 0);
        fw("data_class.pii", 15);
        fw("data_class.financial", 20);
        fw("data_class.us_classified", 25);
        fw("data_class.phi", 30);
        fw("data_class.phi_genetic", 32);
        fw("data_class.cui", 35);
        fw("data_class.itar", 50);
        fw("data_class.us_secret", 55);
        fw("data_class.us_top_secret", 60);
        fw("security_cap.fs_read", 5);
        fw("security_cap.network_egress", 10);
        fw("security_cap.code_execution", 20);
        fw("security_cap.shell_access", 25);
        fw("security_cap.container_exec", 30);
        fw("provenance.builtin", 0);
        fw("provenance.custom", 5);
        fw("provenance.imported", 10);
        fw("provenance.marketplace", 15);
        fw("provenance.third_party", 20);
        fw("model_trust.enterprise", 0);
        fw("model_trust.frontier", 3);
        fw("model_trust.open", 8);
        fw("model_trust.self_hosted", 10);
        fw("deployment.dev", 0);
        fw("deployment.staging", 5);
        fw("deployment.prod", 15);
        fw("deployment.enclave", 25);
        fw("blast_radius.multi_tenant", 10);
        fw("blast_radius.downstream_write", 5);
        fw("delegation.per_hop", 5);
        fw("delegation.premium_high", 8);
        fw("delegation.premium_critical", 12);
        fw("supply_chain.first_party", 0);
        fw("supply_chain.marketplace", 5);
        fw("supply_chain.self_hosted_ext", 10);
        fw("supply_chain.breadth", 5);
        fw("input_source.internal", 0);
        fw("input_source.external_api", 8);
        fw("input_source.web_fetch", 15);
        fw("input_source.user_upload", 15);
        fw("input_source.unknown", 10);
        fw("input_source.breadth", 5);
        fw("lifecycle.approved", 0);
        fw("lifecycle.pending", 10);
        fw("lifecycle.expired", 20);
        fw("lifecycle.rejected", 30);
        fw("lifecycle.unknown", 15);
        fw("lifecycle.recent_review", 8);
        fw("lifecycle.version_churn", 10);
        fw("lifecycle.unowned", 5);
        fw("trust_credit.red_team", 5);
        fw("trust_credit.fairness_audit", 3);
        fw("trust_credit.citation_audit", 2);
        fw("cost.burst", 6);
        fw("cost.budget_exhausted", 4);

        const auto sd = [&](std::string_view key, double v) {
            t.emplace(table_key(Scope::signal_delta, key), v);
        };
        sd("oos_tool", 3);
        sd("rbac_refusal", 2);
        sd("governance_block", 2);
        sd("data_leak", 10);
        sd("cross_tenant", 15);
        sd("policy_violation", 4);

        const auto bt = [&](std::string_view key, double v) {
            t.emplace(table_key(Scope::bucket_threshold, key), v);
        };
        bt("medium", 30);
        bt("high", 60);
        bt("critical", 85);

        for (const auto dc : {"public", "pii", "financial", "us_classified", "phi", "phi_genetic",
                              "cui", "itar", "us_secret", "us_top_secret"})
            t.emplace(table_key(Scope::data_class_multiplier, dc), 1.0);
        return t;
    }();
    return table;
}

std::string override_key(std::string_view tenant, Scope scope, std::string_view key) {
    return storage::make_key({tenant, to_string(scope), key});
}

// Validates the (scope, key, value) triple before any write is attempted.
void check_write(Scope scope, std::string_view key, double value) {
    if (key.empty()) throw InvalidWeightWrite("weight key must be non-empty");
    if (!std::isfinite(value)) throw InvalidWeightWrite("weight value must be finite");
    switch (scope) {
        case Scope::factor_weight:
            if (!seeded_table().count(table_key(scope, key)))
                throw InvalidWeightWrite("unknown factor weight key: " + std::string(key));
            if (value < 0) throw InvalidWeightWrite("factor weights are non-negative");
            break;
        case Scope::signal_delta:
            if (!model::parse_signal_kind(key))
                throw InvalidWeightWrite("unknown signal kind: " + std::string(key));
            if (value < 0)
                throw InvalidWeightWrite("signal deltas are stored as positive magnitudes");
            break;
        case Scope::bucket_threshold:
            if (key != "medium" && key != "high" && key != "critical")
                throw InvalidWeightWrite("unknown bucket threshold: " + std::string(key));
            if (value < 0 || value > 100)
                throw InvalidWeightWrite("bucket thresholds live in [0, 100]");
            break;
        case Scope::data_class_multiplier:
            if (!model::parse_data_class(key))
                throw InvalidWeightWrite("unknown data class: " + std::string(key));
            if (value < 1.0) throw InvalidWeightWrite("multipliers never drop below 1.0");
            break;
        case Scope::tool_multiplier:
            if (value < 1.0) throw InvalidWeightWrite("multipliers never drop below 1.0");
            break;
    }
}

const char* channel_field(Channel channel) {
    switch (channel) {
        case Channel::platform: return "platform";
        case Channel::tenant: return "tenant";
        case Channel::recommendation: return "recommendation";
    }
    return "?";
}

std::optional<double> channel_value(const storage::Storage& store, std::string_view tenant,
                                    Scope scope, std::string_view key, Channel channel) {
    const auto row = store.get(kOverrideStore, override_key(tenant, scope, key));
    if (!row) return std::nullopt;
    const auto& channels = row->at("channels");
    const auto it = channels.find(channel_field(channel));
    if (it == channels.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

std::string fresh_change_key(std::string_view tenant, Scope scope, std::string_view key,
                             Timestamp now) {
    static std::atomic<std::uint64_t> counter{0};
    const auto n = counter.fetch_add(1, std::memory_order_relaxed);
    return storage::make_key({tenant, to_string(scope), key, std::to_string(now.micros),
                              std::to_string(n), crypto::to_hex(crypto::random_bytes(4))});
}

}  // namespace

std::string_view to_string(Scope s) {
    switch (s) {
        case Scope::factor_weight: return "factor_weight";
        case Scope::signal_delta: return "signal_delta";
        case Scope::bucket_threshold: return "bucket_threshold";
        case Scope::data_class_multiplier: return "data_class_multiplier";
        case Scope::tool_multiplier: return "tool_multiplier";
    }
    return "?";
}

std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::platform: return "platform";
        case Channel::tenant: return "tenant";
        case Channel::recommendation: return "recommendation";
    }
    return "?";
}

std::optional<Scope> parse_scope(std::string_view s) {
    for (const auto scope : {Scope::factor_weight, Scope::signal_delta, Scope::bucket_threshold,
                             Scope::data_class_multiplier, Scope::tool_multiplier})
        if (s == to_string(scope)) return scope;
    return std::nullopt;
}

std::optional<Channel> parse_channel(std::string_view s) {
    for (const auto c : {Channel::platform, Channel::tenant, Channel::recommendation})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

bool lower_is_tighter(Scope scope) { return scope == Scope::bucket_threshold; }

bool dominates(Scope scope, double candidate, double incumbent) {
    return lower_is_tighter(scope) ? candidate <= incumbent : candidate >= incumbent;
}

double tightest(Scope scope, double a, double b) {
    return lower_is_tighter(scope) ? std::min(a, b) : std::max(a, b);
}

std::optional<double> seeded_default(Scope scope, std::string_view key) {
    const auto& table = seeded_table();
    const auto it = table.find(table_key(scope, key));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

double scope_fallback(Scope scope) {
    switch (scope) {
        case Scope::data_class_multiplier:
        case Scope::tool_multiplier: return 1.0;
        default: return 0.0;
    }
}

double platform_default(const storage::Storage& store, Scope scope, std::string_view key) {
    if (const auto v = channel_value(store, "", scope, key, Channel::platform)) return *v;
    if (const auto v = seeded_default(scope, key)) return *v;
    return scope_fallback(scope);
}

WeightChange set_override(storage::Storage& store, std::string_view tenant, Scope scope,
                          std::string_view key, double value, Channel channel,
                          std::string_view actor, Timestamp now) {
    check_write(scope, key, value);
    if (channel == Channel::platform && !tenant.empty())
        throw InvalidWeightWrite("platform-channel writes carry no tenant");
    if (channel != Channel::platform && tenant.empty())
        throw InvalidWeightWrite("tenant and recommendation channels require a tenant");

    // Platform admins may move their own default either direction; tenant
    // and recommendation values must dominate the committed platform
    // default at write time.
    if (channel != Channel::platform) {
        const double platform = platform_default(store, scope, key);
        if (!dominates(scope, value, platform))
            throw OverrideLoosensError("override loosens below platform default (platform=" +
                                       std::to_string(platform) +
                                       ", attempted=" + std::to_string(value) + ")");
    }

    const auto row_key = override_key(tenant, scope, key);
    const std::string field = channel_field(channel);
    store.upsert(kOverrideStore, row_key, [&](std::optional<nlohmann::json> existing) {
        nlohmann::json row = existing.value_or(nlohmann::json{
            {"tenant_id", std::string(tenant)},
            {"scope", std::string(to_string(scope))},
            {"key", std::string(key)},
            {"channels", nlohmann::json::object()},
        });
        double next = value;
        if (channel != Channel::platform) {
            // Accepted values merge as the running tightest, so the channel
            // row (and with it the effective weight) is monotone.
            const auto it = row["channels"].find(field);
            if (it != row["channels"].end() && !it->is_null())
                next = tightest(scope, it->get<double>(), value);
        }
        row["channels"][field] = next;
        row["applied_at"] = format_iso8601(now);
        row["applied_by"] = std::string(actor);
        return row;
    });

    WeightChange change;
    change.tenant_id = std::string(tenant);
    change.scope = scope;
    change.key = std::string(key);
    change.value = value;
    change.channel = channel;
    change.actor = std::string(actor);
    change.at = now;
    change.effective_after = channel == Channel::platform
                                 ? platform_default(store, scope, key)
                                 : effective_weight(store, tenant, scope, key);

    store.put(kChangeStore, fresh_change_key(tenant, scope, key, now), to_json(change));

    canonical::ValueMap payload;
    payload.emplace("action", std::string("set_override"));
    payload.emplace("scope", std::string(to_string(scope)));
    payload.emplace("key", std::string(key));
    payload.emplace("value", value);
    payload.emplace("channel", std::string(to_string(channel)));
    payload.emplace("effective_after", change.effective_after);
    evidence::append_event(store, tenant, kAuditInvocation, model::EvidenceKind::system_message,
                           canonical::Value(std::move(payload)), now, {},
                           std::string(actor));
    return change;
}

double effective_weight(const storage::Storage& store, std::string_view tenant, Scope scope,
                        std::string_view key) {
    double value = platform_default(store, scope, key);
    if (const auto v = channel_value(store, tenant, scope, key, Channel::tenant))
        value = tightest(scope, value, *v);
    if (const auto v = channel_value(store, tenant, scope, key, Channel::recommendation))
        value = tightest(scope, value, *v);
    return value;
}

WeightView WeightView::resolve(const storage::Storage& store, std::string_view tenant) {
    WeightView view;
    const auto note = [&](const nlohmann::json& row) {
        const auto scope = parse_scope(row.at("scope").get<std::string>());
        if (!scope) return;
        const auto key = row.at("key").get<std::string>();
        view.resolved_[{std::string(to_string(*scope)), key}] =
            effective_weight(store, tenant, *scope, key);
    };
    for (const auto& [k, row] : store.scan_prefix(kOverrideStore, "\x1f")) note(row);
    if (!tenant.empty())
        for (const auto& [k, row] :
             store.scan_prefix(kOverrideStore, std::string(tenant) + '\x1f'))
            note(row);
    return view;
}

double WeightView::value(Scope scope, std::string_view key) const {
    const auto it = resolved_.find({std::string(to_string(scope)), std::string(key)});
    if (it != resolved_.end()) return it->second;
    if (const auto v = seeded_default(scope, key)) return *v;
    return scope_fallback(scope);
}

int WeightView::signal_delta(model::SignalKind kind) const {
    return -static_cast<int>(std::llround(value(Scope::signal_delta, model::to_string(kind))));
}

WeightView::Thresholds WeightView::bucket_thresholds() const {
    Thresholds t;
    t.medium = static_cast<int>(std::llround(value(Scope::bucket_threshold, "medium")));
    t.high = static_cast<int>(std::llround(value(Scope::bucket_threshold, "high")));
    t.critical = static_cast<int>(std::llround(value(Scope::bucket_threshold, "critical")));
    return t;
}

nlohmann::json to_json(const WeightChange& c) {
    return {
        {"tenant_id", c.tenant_id},
        {"scope", std::string(to_string(c.scope))},
        {"key", c.key},
        {"value", c.value},
        {"channel", std::string(to_string(c.channel))},
        {"actor", c.actor},
        {"at", format_iso8601(c.at)},
        {"effective_after", c.effective_after},
    };
}

std::vector<WeightRow> list_weights(const storage::Storage& store, std::string_view tenant) {
    std::map<std::pair<std::string, std::string>, WeightRow> rows;
    const auto ensure = [&](Scope scope, const std::string& key) -> WeightRow& {
        auto& row = rows[{std::string(to_string(scope)), key}];
        row.scope = scope;
        row.key = key;
        return row;
    };

    for (const auto& [tk, v] : seeded_table()) {
        const auto sep = tk.find('\x1f');
        const auto scope = parse_scope(tk.substr(0, sep));
        if (scope) ensure(*scope, tk.substr(sep + 1));
    }
    const auto collect = [&](std::string_view prefix) {
        for (const auto& [k, row] : store.scan_prefix(kOverrideStore, prefix)) {
            const auto scope = parse_scope(row.at("scope").get<std::string>());
            if (scope) ensure(*scope, row.at("key").get<std::string>());
        }
    };
    collect("\x1f");
    if (!tenant.empty()) collect(std::string(tenant) + '\x1f');

    std::vector<WeightRow> out;
    out.reserve(rows.size());
    for (auto& [id, row] : rows) {
        row.platform = platform_default(store, row.scope, row.key);
        row.tenant_override = channel_value(store, tenant, row.scope, row.key, Channel::tenant);
        row.recommendation_override =
            channel_value(store, tenant, row.scope, row.key, Channel::recommendation);
        row.effective = effective_weight(store, tenant, row.scope, row.key);
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace veldt::weights
