#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/core_model.hpp"
#include "veldt/storage.hpp"
#include "veldt/timeutil.hpp"

namespace veldt::weights {

enum class Scope { factor_weight, signal_delta, bucket_threshold, data_class_multiplier, tool_multiplier };
enum class Channel { platform, tenant, recommendation };

std::string_view to_string(Scope);
std::string_view to_string(Channel);
std::optional<Scope> parse_scope(std::string_view);
std::optional<Channel> parse_channel(std::string_view);

// bucket_threshold: lowering a threshold classifies more agents into the
// severe bucket, so lower is tighter. Every other scope is higher-is-tighter
// (signal deltas are stored as positive magnitudes and applied negated).
bool lower_is_tighter(Scope scope);

// True when candidate is at least as tight as incumbent under the scope's
// polarity.
bool dominates(Scope scope, double candidate, double incumbent);
double tightest(Scope scope, double a, double b);

struct OverrideLoosensError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidWeightWrite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Seeded platform defaults (factor weights per the published schedules,
// signal-delta magnitudes, bucket thresholds). Multiplier scopes default to
// 1.0 per key unless overridden.
std::optional<double> seeded_default(Scope scope, std::string_view key);
double scope_fallback(Scope scope);

struct WeightChange {
    std::string tenant_id;  // empty = platform
    Scope scope = Scope::factor_weight;
    std::string key;
    double value = 0;
    Channel channel = Channel::platform;
    std::string actor;
    Timestamp at;
    double effective_after = 0;
};

// Applies one weight write.
//  - platform channel: tenant must be empty; sets the platform default with
//    no dominance check (platform may loosen its own default).
//  - tenant / recommendation channels: tenant required; the value must
//    dominate the current platform default or OverrideLoosensError is
//    thrown. Accepted values merge as the running tightest per channel, so
//    the effective weight is monotone in tightness.
// Every accepted write appends a weight_changes audit row and an evidence
// event on the tenant's "weights-audit" chain.
WeightChange set_override(storage::Storage& store, std::string_view tenant, Scope scope,
                          std::string_view key, double value, Channel channel,
                          std::string_view actor, Timestamp now);

double platform_default(const storage::Storage& store, Scope scope, std::string_view key);
double effective_weight(const storage::Storage& store, std::string_view tenant, Scope scope,
                        std::string_view key);

// Immutable per-tenant resolution snapshot consumed by scoring and trust.
class WeightView {
public:
    WeightView() = default;  // seeded defaults only
    static WeightView resolve(const storage::Storage& store, std::string_view tenant);

    double value(Scope scope, std::string_view key) const;
    double factor_weight(std::string_view key) const { return value(Scope::factor_weight, key); }
    // Negative delta applied to trust on this signal.
    int signal_delta(model::SignalKind kind) const;
    struct Thresholds {
        int medium = 30;
        int high = 60;
        int critical = 85;
    };
    Thresholds bucket_thresholds() const;

private:
    std::map<std::pair<std::string, std::string>, double> resolved_;
};

nlohmann::json to_json(const WeightChange& c);

// Rows for operator listing: every key with a non-default resolution plus
// the seeded defaults.
struct WeightRow {
    Scope scope;
    std::string key;
    double platform = 0;
    std::optional<double> tenant_override;
    std::optional<double> recommendation_override;
    double effective = 0;
};
std::vector<WeightRow> list_weights(const storage::Storage& store, std::string_view tenant);

}  // namespace veldt::weights
