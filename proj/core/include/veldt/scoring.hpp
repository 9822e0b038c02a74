#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "veldt/core_model.hpp"
#include "veldt/timeutil.hpp"
#include "veldt/weights.hpp"

namespace veldt::scoring {

enum class Bucket { low, medium, high, critical };
std::string_view to_string(Bucket);
std::optional<Bucket> parse_bucket(std::string_view);

// Banker's rounding to the nearest integer; used everywhere a fractional
// score is collapsed so results are reproducible across platforms.
int round_half_even(double x);

struct RiskFactor {
    std::string name;   // machine id
    std::string label;  // display string
    int delta = 0;
};

enum class RuleSeverity { warning, critical };
std::string_view to_string(RuleSeverity);

// What interaction predicates may inspect: the definition, the finished
// additive decomposition, and the derived write-tool count.
struct InteractionInput {
    const model::AgentDefinition& def;
    int additive;
    const std::vector<RiskFactor>& factors;
    int write_tool_count;
};

struct InteractionRule {
    std::string code;
    std::string name;
    std::function<bool(const InteractionInput&)> condition;
    double multiplier = 1.0;
    std::string description;
    RuleSeverity severity = RuleSeverity::warning;
};

struct MultiplierBelowOne : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DuplicateCode : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Amplify-only rule registry. Multipliers below 1.0 are rejected at
// registration: downward adjustments belong to credit factors, not rules.
class InteractionRegistry {
public:
    static InteractionRegistry defaults();  // the ten built-in rules
    static InteractionRegistry empty() { return InteractionRegistry{}; }

    void register_rule(InteractionRule rule);
    const std::vector<InteractionRule>& rules() const { return rules_; }
    const InteractionRule* find(std::string_view code) const;

private:
    std::vector<InteractionRule> rules_;
};

// Prefix classifiers. The write list has 20 entries; the admin-gated list
// is the privileged subset, so a tool like override_decision counts as both
// a write tool (+4) and an admin-gated tool (+8).
bool is_write_tool(std::string_view tool);
bool is_admin_gated_tool(std::string_view tool);

struct DelegateObservation {
    std::string agent_key;
    Bucket bucket = Bucket::low;
    std::int64_t observation_count = 0;
};

struct DepthResult {
    int depth = 0;      // longest simple chain, in hops
    bool truncated = false;
};

// Longest delegation chain reachable from agent_key. Cycle-safe and bounded
// by a hard exploration budget (5000 nodes, 50 hops, 50 completed paths);
// exceeding any bound returns the depth found so far with truncated set.
DepthResult delegation_depth(const std::map<std::string, std::vector<std::string>>& graph,
                             const std::string& agent_key);

// Runtime surroundings of a definition that the definition itself cannot
// carry: the fleet delegation graph, observed delegate risk, transient
// factors injected by other modules (lineage elevation), and the clock.
struct ScoringContext {
    std::optional<std::map<std::string, std::vector<std::string>>> delegation_graph;
    std::vector<DelegateObservation> delegates;
    std::vector<RiskFactor> extra_factors;
    Timestamp now = now_utc();
};

struct ScoreOptions {
    bool disable_interactions = false;
};

struct AgentRiskScore {
    int additive = 0;
    std::vector<std::string> fired_codes;  // registry order
    double applied_multiplier = 1.0;       // capped product
    int final_score = 0;
    Bucket bucket = Bucket::low;
    std::vector<RiskFactor> factors;
};

// Individual factor functions exposed for direct use and testing. Each
// consults the weight view so tenant tightenings apply.
RiskFactor data_sensitivity_delta(const std::set<model::DataClass>& classes,
                                  const weights::WeightView& view = {});
RiskFactor security_caps_delta(const std::set<model::SecurityCap>& caps,
                               const weights::WeightView& view = {});
RiskFactor delegation_trust_premium(const std::vector<DelegateObservation>& delegates,
                                    const weights::WeightView& view = {});

// Capped-product amplification: min(100, additive * min(2.0, product)),
// rounded half-to-even. Returns (final, applied multiplier).
std::pair<int, double> apply_interactions(int additive, const std::vector<double>& multipliers);

AgentRiskScore score_agent(const model::AgentDefinition& def, const weights::WeightView& view,
                           const InteractionRegistry& registry, const ScoreOptions& options = {},
                           const ScoringContext& context = {});

// Threshold order is checked tightest-first so a tenant lowering any
// threshold always classifies more severely, never less.
Bucket bucket_for_score(int score, const weights::WeightView& view = {});

nlohmann::json to_json(const AgentRiskScore& score);

inline constexpr double kMaxMultiplier = 2.0;
inline constexpr int kObservationGate = 10;
inline constexpr int kDelegationPremiumCap = 25;

}  // namespace veldt::scoring
