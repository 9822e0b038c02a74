#include <doctest.h>

#include <random>

#include <veldt/compliance.hpp>
#include <veldt/storage.hpp>

using namespace veldt;
using model::DataClass;

TEST_CASE("the builtin registry carries the full regime table") {
    const auto& reg = compliance::RegimeRegistry::builtin();
    CHECK(reg.all().size() == 32);

    const auto* gdpr = reg.find("gdpr");
    REQUIRE(gdpr != nullptr);
    CHECK(gdpr->retention_years == 6);
    CHECK(gdpr->breach_sla_hours == 72);
    CHECK(gdpr->breach_format == "EDPB");

    const auto* hipaa = reg.find("hipaa");
    REQUIRE(hipaa != nullptr);
    CHECK(hipaa->retention_years == 6);
    CHECK(hipaa->breach_sla_hours == 1440);

    const auto* ai_act = reg.find("eu_ai_act");
    REQUIRE(ai_act != nullptr);
    CHECK(ai_act->retention_years == 10);
    CHECK_FALSE(ai_act->breach_sla_hours.has_value());

    const auto* nydfs = reg.find("nydfs_part_500");
    REQUIRE(nydfs != nullptr);
    CHECK(nydfs->retention_years == 5);
    CHECK(nydfs->breach_sla_hours == 72);

    const auto* dora = reg.find("dora");
    REQUIRE(dora != nullptr);
    CHECK(dora->breach_sla_hours == 24);

    CHECK(reg.find("sox")->retention_years == 7);
    CHECK(reg.find("il5_il6")->retention_years == 25);
    CHECK(reg.find("nato")->retention_years == 25);
    CHECK(reg.find("pci_dss")->retention_years == 1);
    CHECK(reg.find("made_up_regime") == nullptr);
}

TEST_CASE("data classes imply regimes, conditionally for financial") {
    const auto& reg = compliance::RegimeRegistry::builtin();

    CHECK(reg.implied_regimes({DataClass::phi}, {}) == std::set<std::string>{"hipaa"});
    CHECK(reg.implied_regimes({DataClass::phi_genetic}, {}) == std::set<std::string>{"hipaa"});
    CHECK(reg.implied_regimes({DataClass::pii}, {}) == std::set<std::string>{"gdpr"});
    CHECK(reg.implied_regimes({DataClass::itar}, {}) == std::set<std::string>{"itar_ear"});
    CHECK(reg.implied_regimes({DataClass::cui}, {}) == std::set<std::string>{"nist_800_171_53"});
    for (const auto classified :
         {DataClass::us_classified, DataClass::us_secret, DataClass::us_top_secret})
        CHECK(reg.implied_regimes({classified}, {}) == std::set<std::string>{"il5_il6"});

    // financial only reaches NYDFS when the tenant has declared it.
    CHECK(reg.implied_regimes({DataClass::financial}, {}).empty());
    CHECK(reg.implied_regimes({DataClass::financial}, {"nydfs_part_500"}) ==
          std::set<std::string>{"nydfs_part_500"});
    CHECK(reg.implied_regimes({DataClass::financial}, {"gdpr"}).empty());

    CHECK(reg.implied_regimes({DataClass::public_}, {}).empty());
    CHECK(reg.implied_regimes({DataClass::pii, DataClass::phi}, {}) ==
          std::set<std::string>{"gdpr", "hipaa"});
}

TEST_CASE("the governing retention floor is the maximum applicable") {
    const auto& reg = compliance::RegimeRegistry::builtin();

    CHECK(compliance::required_retention_years(reg, {}, {}) == 0);
    CHECK(compliance::required_retention_years(reg, {"gdpr"}, {}) == 6);
    CHECK(compliance::required_retention_years(reg, {"gdpr", "sox"}, {}) == 7);
    CHECK(compliance::required_retention_years(reg, {"pci_dss"}, {}) == 1);
    // Implications join declared scope before the max is taken.
    CHECK(compliance::required_retention_years(reg, {}, {DataClass::pii}) == 6);
    CHECK(compliance::required_retention_years(reg, {"eu_ai_act"}, {DataClass::pii}) == 10);
    CHECK(compliance::required_retention_years(reg, {"gdpr"}, {DataClass::us_secret}) == 25);
    // Unknown declared ids contribute nothing rather than failing closed.
    CHECK(compliance::required_retention_years(reg, {"not_a_regime"}, {}) == 0);

    CHECK(compliance::retention_floor_micros(0) == 0);
    CHECK(compliance::retention_floor_micros(1) == 365LL * kMicrosPerDay);
    CHECK(compliance::retention_floor_micros(25) == 25LL * 365 * kMicrosPerDay);

    // Property: adding a regime or class never lowers the floor.
    std::mt19937 rng(20260817);
    std::vector<std::string> ids;
    for (const auto& r : reg.all()) ids.push_back(r.id);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<std::string> declared;
        std::set<DataClass> classes;
        const int picks = static_cast<int>(rng() % 5);
        for (int i = 0; i < picks; ++i) declared.insert(ids[rng() % ids.size()]);
        if (rng() % 2) classes.insert(static_cast<DataClass>(rng() % 10));

        const int base = compliance::required_retention_years(reg, declared, classes);
        int expected = 0;
        for (const auto& id : declared)
            if (const auto* r = reg.find(id)) expected = std::max(expected, r->retention_years);
        for (const auto& id : reg.implied_regimes(classes, declared))
            expected = std::max(expected, reg.find(id)->retention_years);
        CHECK(base == expected);

        auto wider = declared;
        wider.insert("il5_il6");
        CHECK(compliance::required_retention_years(reg, wider, classes) >= base);
        auto more_classes = classes;
        more_classes.insert(DataClass::phi);
        CHECK(compliance::required_retention_years(reg, declared, more_classes) >= base);
    }
}

TEST_CASE("agent summaries aggregate obligations in id order") {
    const auto& reg = compliance::RegimeRegistry::builtin();
    model::AgentDefinition def;
    def.agent_key = "loan-officer";
    def.compliance_scope = {"sox", "gdpr"};
    def.data_classes = {DataClass::phi};

    const auto summary = compliance::summary_for(reg, def);
    CHECK(summary.agent_key == "loan-officer");
    REQUIRE(summary.obligations.size() == 3);
    CHECK(summary.obligations[0].regime == "gdpr");
    CHECK(summary.obligations[1].regime == "hipaa");
    CHECK(summary.obligations[2].regime == "sox");
    CHECK(summary.governing_retention_years == 7);

    const auto doc = compliance::to_json(summary);
    CHECK(doc.at("agent_key") == "loan-officer");
    CHECK(doc.at("governing_retention_years") == 7);
    CHECK(doc.at("obligations").size() == 3);
}

TEST_CASE("breach fan-out hits exactly the SLA-bearing regimes") {
    const auto& reg = compliance::RegimeRegistry::builtin();
    auto store = storage::Storage::in_memory();
    const Timestamp now{1773568200000000};

    // PII incident at a tenant under NYDFS: GDPR (implied) + NYDFS, nothing else.
    const auto created = compliance::emit_breach_notifications(
        store, reg, "acme", "incident-1", {"nydfs_part_500"}, {DataClass::pii}, now);
    REQUIRE(created.size() == 2);
    CHECK(created[0].regime == "gdpr");
    CHECK(created[0].format == "EDPB");
    REQUIRE(created[0].due_at.has_value());
    CHECK(created[0].due_at->micros == now.micros + 72LL * kMicrosPerHour);
    CHECK(created[1].regime == "nydfs_part_500");
    CHECK(created[1].due_at->micros == now.micros + 72LL * kMicrosPerHour);
    CHECK(store.size("breach_notifications") == 2);

    SUBCASE("re-emission is idempotent") {
        const auto replay = compliance::emit_breach_notifications(
            store, reg, "acme", "incident-1", {"nydfs_part_500"}, {DataClass::pii}, now);
        CHECK(replay.empty());
        CHECK(store.size("breach_notifications") == 2);

        // Widening the same incident creates only the new rows.
        const auto widened = compliance::emit_breach_notifications(
            store, reg, "acme", "incident-1", {"nydfs_part_500"},
            {DataClass::pii, DataClass::phi}, now);
        REQUIRE(widened.size() == 1);
        CHECK(widened[0].regime == "hipaa");
        CHECK(widened[0].due_at->micros == now.micros + 1440LL * kMicrosPerHour);
        CHECK(store.size("breach_notifications") == 3);
    }

    SUBCASE("regimes without an SLA stay silent") {
        const auto none = compliance::emit_breach_notifications(
            store, reg, "acme", "incident-2", {"eu_ai_act", "sox"}, {}, now);
        CHECK(none.empty());
    }

    SUBCASE("tenants and incidents do not collide") {
        const auto other_tenant = compliance::emit_breach_notifications(
            store, reg, "globex", "incident-1", {}, {DataClass::pii}, now);
        CHECK(other_tenant.size() == 1);
        const auto other_incident = compliance::emit_breach_notifications(
            store, reg, "acme", "incident-2", {}, {DataClass::pii}, now);
        CHECK(other_incident.size() == 1);
    }

    SUBCASE("notifications serialize with their deadline") {
        const auto doc = compliance::to_json(created[0]);
        CHECK(doc.at("tenant_id") == "acme");
        CHECK(doc.at("incident_id") == "incident-1");
        CHECK(doc.at("regime") == "gdpr");
        CHECK(doc.at("format") == "EDPB");
        CHECK(doc.contains("due_at"));
    }
}

TEST_CASE("dora's tighter clock produces an earlier deadline") {
    const auto& reg = compliance::RegimeRegistry::builtin();
    auto store = storage::Storage::in_memory();
    const Timestamp now{1773568200000000};

    const auto created = compliance::emit_breach_notifications(store, reg, "acme", "incident-3",
                                                               {"dora", "gdpr"}, {}, now);
    REQUIRE(created.size() == 2);
    CHECK(created[0].regime == "dora");
    CHECK(created[0].due_at->micros == now.micros + 24LL * kMicrosPerHour);
    CHECK(created[1].regime == "gdpr");
    CHECK(created[1].due_at->micros == now.micros + 72LL * kMicrosPerHour);
}

TEST_CASE("a custom registry document overrides the builtin table") {
    nlohmann::json doc;
    doc["regimes"] = nlohmann::json::array({{{"id", "local_rule"},
                                             {"display", "Local Rule"},
                                             {"retention_years", 3},
                                             {"breach_sla_hours", 48},
                                             {"breach_format", "LOCAL"}}});
    doc["class_implications"]["pii"] = nlohmann::json::array({"local_rule"});
    doc["conditional_implications"] = nlohmann::json::object();
    const auto reg = compliance::RegimeRegistry::from_json(doc);
    CHECK(reg.all().size() == 1);
    CHECK(reg.find("gdpr") == nullptr);
    CHECK(reg.implied_regimes({DataClass::pii}, {}) == std::set<std::string>{"local_rule"});
    CHECK(compliance::required_retention_years(reg, {}, {DataClass::pii}) == 3);
}
