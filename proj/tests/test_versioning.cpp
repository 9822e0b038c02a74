#include <doctest.h>

#include <functional>
#include <string>
#include <vector>

#include <veldt/crypto.hpp>
#include <veldt/evidence.hpp>
#include <veldt/storage.hpp>
#include <veldt/versioning.hpp>

using namespace veldt;

namespace {

const Timestamp kT0{1773568200000000};

model::AgentDefinition baseline_def() {
    model::AgentDefinition def;
    def.agent_key = "loan-officer";
    def.name = "Loan Officer";
    def.description = "Reviews applications";
    def.system_prompt = "You review loan applications.";
    def.model = "gpt-4o";
    def.tools = {"read_application"};
    def.human_loop = model::HumanLoopMode::in_loop;
    def.access_level = model::AccessLevel::read;
    def.provenance = model::Provenance::custom;
    def.model_trust = model::ModelTrust::enterprise;
    def.deployment_env = model::DeploymentEnv::dev;
    def.approval_status = model::ApprovalStatus::approved;
    def.owner = "platform-team";
    def.created_at = Timestamp{kT0.micros - 30 * kMicrosPerDay};
    return def;
}

}  // namespace

TEST_CASE("snapshots append and number monotonically") {
    auto store = storage::Storage::in_memory();
    auto def = baseline_def();

    const auto v1 = versioning::snapshot(store, "acme", def, kT0, std::nullopt, "initial", kT0);
    CHECK(v1.version_no == 1);
    CHECK(v1.definition_hash == model::definition_hash_hex(def));
    CHECK(v1.note == "initial");

    def.tools.push_back("approve_loan");
    const auto v2 = versioning::snapshot(store, "acme", def, Timestamp{kT0.micros + 1000000},
                                         std::nullopt, "", Timestamp{kT0.micros + 2000000});
    CHECK(v2.version_no == 2);
    CHECK(v2.definition_hash != v1.definition_hash);
    // Both clocks survive independently: change time vs ingest time.
    CHECK(v2.occurred_at.micros == kT0.micros + 1000000);
    CHECK(v2.created_at.micros == kT0.micros + 2000000);

    const auto hist = versioning::history(store, "acme", "loan-officer");
    REQUIRE(hist.size() == 2);
    CHECK(hist[0].version_no == 1);
    CHECK(hist[1].version_no == 2);
    CHECK(versioning::latest_version(store, "acme", "loan-officer")->version_no == 2);
    CHECK(versioning::find_version(store, "acme", "loan-officer", 1)->definition.tools.size() == 1);
    CHECK_FALSE(versioning::find_version(store, "acme", "loan-officer", 3).has_value());
    CHECK_FALSE(versioning::latest_version(store, "acme", "ghost").has_value());
}

TEST_CASE("rollback appends a new version carrying the old definition") {
    auto store = storage::Storage::in_memory();
    auto def = baseline_def();
    versioning::snapshot(store, "acme", def, kT0, std::nullopt, "", kT0);
    def.access_level = model::AccessLevel::write;
    versioning::snapshot(store, "acme", def, kT0, std::nullopt, "", kT0);

    const auto v3 = versioning::rollback_to(store, "acme", "loan-officer", 1, kT0);
    CHECK(v3.version_no == 3);
    CHECK(v3.definition.access_level == model::AccessLevel::read);
    CHECK(v3.note == "rollback to v1");
    CHECK(v3.definition_hash ==
          versioning::find_version(store, "acme", "loan-officer", 1)->definition_hash);
    CHECK(versioning::history(store, "acme", "loan-officer").size() == 3);

    CHECK_THROWS_AS(versioning::rollback_to(store, "acme", "loan-officer", 9, kT0),
                    versioning::VersionNotFound);
}

TEST_CASE("hash lookup returns the newest snapshot sharing the hash") {
    auto store = storage::Storage::in_memory();
    const auto def = baseline_def();
    versioning::snapshot(store, "acme", def, kT0, std::nullopt, "", kT0);
    versioning::snapshot(store, "acme", def, kT0, std::nullopt, "",
                         Timestamp{kT0.micros + 1000000});

    const auto found = versioning::find_by_hash(store, "acme", model::definition_hash_hex(def));
    REQUIRE(found.has_value());
    CHECK(found->version_no == 2);
    CHECK_FALSE(versioning::find_by_hash(store, "other", model::definition_hash_hex(def)));
    CHECK_FALSE(versioning::find_by_hash(store, "acme", "deadbeef").has_value());
}

TEST_CASE("drift detection is exhaustive over the field split") {
    using Mutator = std::function<void(model::AgentDefinition&)>;
    const std::vector<std::pair<std::string, Mutator>> identity_mutations = {
        {"agent_key", [](auto& d) { d.agent_key = "loan-officer-2"; }},
        {"name", [](auto& d) { d.name += " v2"; }},
        {"description", [](auto& d) { d.description = "Approves applications"; }},
        {"system_prompt", [](auto& d) { d.system_prompt += " Be fast."; }},
        {"model", [](auto& d) { d.model = "gpt-5"; }},
        {"tools", [](auto& d) { d.tools.push_back("approve_loan"); }},
        {"denied_tools", [](auto& d) { d.denied_tools.push_back("drop_table"); }},
        {"human_loop", [](auto& d) { d.human_loop = model::HumanLoopMode::on_loop; }},
        {"access_level", [](auto& d) { d.access_level = model::AccessLevel::write; }},
        {"can_override", [](auto& d) { d.can_override = true; }},
        {"can_revert", [](auto& d) { d.can_revert = true; }},
        {"can_delegate_to", [](auto& d) { d.can_delegate_to.push_back("helper"); }},
        {"required_roles", [](auto& d) { d.required_roles.push_back("underwriter"); }},
        {"extends", [](auto& d) { d.extends = "base-agent"; }},
        {"data_classes", [](auto& d) { d.data_classes.insert(model::DataClass::financial); }},
        {"security_caps",
         [](auto& d) { d.security_caps.insert(model::SecurityCap::network_egress); }},
        {"provenance", [](auto& d) { d.provenance = model::Provenance::marketplace; }},
        {"model_trust", [](auto& d) { d.model_trust = model::ModelTrust::frontier; }},
        {"compliance_scope", [](auto& d) { d.compliance_scope.insert("gdpr"); }},
    };
    const std::vector<std::pair<std::string, Mutator>> operational_mutations = {
        {"deployment_env", [](auto& d) { d.deployment_env = model::DeploymentEnv::prod; }},
        {"input_sources", [](auto& d) { d.input_sources.insert(model::InputSource::web_fetch); }},
        {"supply_chain",
         [](auto& d) { d.supply_chain.insert(model::SupplyChainKind::marketplace); }},
        {"dependency_count", [](auto& d) { d.dependency_count = 9; }},
        {"approval_status", [](auto& d) { d.approval_status = model::ApprovalStatus::pending; }},
        {"review_expires_at", [](auto& d) { d.review_expires_at = kT0; }},
        {"created_at", [](auto& d) { d.created_at = kT0; }},
        {"version_count_30d", [](auto& d) { d.version_count_30d = 25; }},
        {"owner", [](auto& d) { d.owner = "ops-team"; }},
        {"monthly_cost_avg", [](auto& d) { d.monthly_cost_avg = 120.0; }},
        {"hourly_cost_peak", [](auto& d) { d.hourly_cost_peak = 9.0; }},
        {"blast_radius_components",
         [](auto& d) { d.blast_radius_components.push_back("multi_tenant"); }},
        {"budget_exhausted", [](auto& d) { d.budget_exhausted = true; }},
        {"trust_evidence",
         [](auto& d) { d.trust_evidence.push_back({model::AuditKind::red_team, kT0}); }},
    };
    // Identity-vs-operational split covers the whole definition.
    REQUIRE(identity_mutations.size() == model::kHashedFields.size());
    REQUIRE(identity_mutations.size() + operational_mutations.size() == 33);

    auto store = storage::Storage::in_memory();
    const auto def = baseline_def();
    versioning::snapshot(store, "acme", def, kT0, std::nullopt, "", kT0);
    const auto declared = model::definition_hash_hex(def);

    for (const auto& [field, mutate] : identity_mutations) {
        CAPTURE(field);
        auto live = def;
        mutate(live);
        const auto diff = versioning::detect_drift(store, "acme", declared, live, kT0);
        REQUIRE(diff.has_value());
        CHECK(diff->changed_fields() == std::vector<std::string>{field});
    }
    for (const auto& [field, mutate] : operational_mutations) {
        CAPTURE(field);
        auto live = def;
        mutate(live);
        CHECK_FALSE(versioning::detect_drift(store, "acme", declared, live, kT0).has_value());
    }

    // Every detection (and only detections) hit the audit chain.
    CHECK(evidence::load_chain(store, "acme", "drift-audit").size() == identity_mutations.size());
    CHECK(evidence::verify_chain(store, "acme", "drift-audit").status ==
          evidence::ChainStatus::valid);
}

TEST_CASE("drift diffs carry old and new values per field") {
    auto store = storage::Storage::in_memory();
    const auto def = baseline_def();
    versioning::snapshot(store, "acme", def, kT0, std::nullopt, "", kT0);

    auto live = def;
    live.access_level = model::AccessLevel::admin;
    live.tools.push_back("approve_loan");
    const auto diff =
        versioning::detect_drift(store, "acme", model::definition_hash_hex(def), live, kT0);
    REQUIRE(diff.has_value());
    REQUIRE(diff->changes.size() == 2);
    // The diff lists fields in projection order: tools precedes access_level.
    CHECK(diff->changed_fields() == std::vector<std::string>{"tools", "access_level"});
    const auto& access = diff->changes[1];
    CHECK(access.old_value == nlohmann::json("read"));
    CHECK(access.new_value == nlohmann::json("admin"));

    const auto doc = versioning::to_json(*diff);
    CHECK(doc.at("drift") == true);
    CHECK(doc.at("changed_fields").size() == 2);

    CHECK_THROWS_AS(versioning::detect_drift(store, "acme", "0000dead", live, kT0),
                    versioning::DeclaredHashUnknown);
}

TEST_CASE("lineage elevation decays by generation") {
    const auto make = [](std::string key, std::optional<std::string> extends) {
        auto def = baseline_def();
        def.agent_key = std::move(key);
        def.extends = std::move(extends);
        return def;
    };
    const std::vector<model::AgentDefinition> fleet = {
        make("root", std::nullopt),    make("child-a", "root"),  make("child-b", "root"),
        make("grand-a", "child-a"),    make("great-a", "grand-a"), make("deep-a", "great-a"),
        make("deeper-a", "deep-a"),
    };
    const auto adjacency = versioning::lineage_adjacency(fleet);
    REQUIRE(adjacency.at("root").size() == 2);

    const auto elevated = versioning::propagate_lineage_elevation(adjacency, "root");
    const std::map<std::string, int> got(elevated.begin(), elevated.end());
    CHECK(got.at("child-a") == 8);
    CHECK(got.at("child-b") == 8);
    CHECK(got.at("grand-a") == 4);
    CHECK(got.at("great-a") == 2);
    CHECK(got.at("deep-a") == 1);
    CHECK(got.at("deeper-a") == 1);
    CHECK(versioning::propagate_lineage_elevation(adjacency, "deeper-a").empty());

    // Cycles and diamonds resolve to the first (closest) generation.
    const std::map<std::string, std::vector<std::string>> cyclic = {
        {"a", {"b"}}, {"b", {"a", "c"}}, {"c", {"b"}}};
    const auto safe = versioning::propagate_lineage_elevation(cyclic, "a");
    const std::map<std::string, int> cyc(safe.begin(), safe.end());
    CHECK(cyc.size() == 2);
    CHECK(cyc.at("b") == 8);
    CHECK(cyc.at("c") == 4);
}

TEST_CASE("invocation ledger counts and exposes the mode gap") {
    auto store = storage::Storage::in_memory();
    using Mode = model::HumanLoopMode;

    for (int i = 0; i < 19; ++i)
        versioning::record_invocation(store, "acme", "loan-officer", Mode::in_loop, Mode::none,
                                      Timestamp{kT0.micros + i});
    CHECK(versioning::count_invocations(store, "acme", "loan-officer") == 19);

    // Below the floor nothing is flagged no matter how wide the gap is.
    auto dist = versioning::mode_distribution(store, "acme", "loan-officer", Mode::in_loop);
    CHECK(dist.total == 19);
    CHECK(dist.configured_share == 0.0);
    CHECK_FALSE(dist.gap_flag);

    const auto rec = versioning::record_invocation(store, "acme", "loan-officer", Mode::in_loop,
                                                   Mode::none, Timestamp{kT0.micros + 19});
    CHECK(rec.invocation_no == 20);
    dist = versioning::mode_distribution(store, "acme", "loan-officer", Mode::in_loop);
    CHECK(dist.total == 20);
    CHECK(dist.gap_flag);
    CHECK(dist.exercised_counts.at(Mode::none) == 20);

    // An agent that mostly honors its configured mode is clean.
    for (int i = 0; i < 30; ++i)
        versioning::record_invocation(store, "acme", "teller", Mode::in_loop,
                                      i < 18 ? Mode::in_loop : Mode::none,
                                      Timestamp{kT0.micros + i});
    dist = versioning::mode_distribution(store, "acme", "teller", Mode::in_loop);
    CHECK(dist.total == 30);
    CHECK(dist.configured_share == doctest::Approx(0.6));
    CHECK_FALSE(dist.gap_flag);

    CHECK(versioning::count_invocations(store, "acme", "ghost") == 0);
}

TEST_CASE("definition signatures verify over the identity hash") {
    auto store = storage::Storage::in_memory();
    const auto def = baseline_def();
    const auto kp = crypto::ed25519_generate();
    const auto hash = model::definition_hash(def);
    const auto signature =
        crypto::ed25519_sign(kp.private_key, crypto::Bytes(hash.begin(), hash.end()));

    CHECK(versioning::verify_definition_signature(store, "acme", def, signature, kp.public_key,
                                                  kT0));
    CHECK(evidence::load_chain(store, "acme", "drift-audit").size() == 1);

    // A different definition, or a different signer, fails without a trace.
    auto other = def;
    other.tools.push_back("approve_loan");
    CHECK_FALSE(versioning::verify_definition_signature(store, "acme", other, signature,
                                                        kp.public_key, kT0));
    const auto stranger = crypto::ed25519_generate();
    CHECK_FALSE(versioning::verify_definition_signature(store, "acme", def, signature,
                                                        stranger.public_key, kT0));
    CHECK(evidence::load_chain(store, "acme", "drift-audit").size() == 1);

    CHECK_THROWS_AS(versioning::verify_definition_signature(store, "acme", def,
                                                            crypto::Bytes(10, 0), kp.public_key,
                                                            kT0),
                    versioning::MalformedSignature);
    CHECK_THROWS_AS(versioning::verify_definition_signature(store, "acme", def, signature,
                                                            crypto::Bytes(8, 0), kT0),
                    versioning::MalformedSignature);
}

TEST_CASE("snapshots survive a serialization round trip") {
    auto store = storage::Storage::in_memory();
    auto def = baseline_def();
    def.extends = "base-agent";
    const auto v1 = versioning::snapshot(store, "acme", def, kT0, "base-agent", "fork", kT0);

    const auto back = versioning::snapshot_from_json(versioning::to_json(v1));
    CHECK(back.tenant_id == "acme");
    CHECK(back.agent_key == "loan-officer");
    CHECK(back.version_no == 1);
    CHECK(back.definition_hash == v1.definition_hash);
    CHECK(back.parent_agent_key == "base-agent");
    CHECK(back.note == "fork");
    CHECK(back.occurred_at.micros == kT0.micros);
    CHECK(model::definition_hash_hex(back.definition) == v1.definition_hash);
}
