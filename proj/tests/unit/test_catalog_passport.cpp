#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "tsp/catalog.hpp"
#include "tsp/error.hpp"
#include "tsp/passport.hpp"
#include "tsp/profiling.hpp"

namespace tsp {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::Internal;
}

ordered_json fixture_catalog_json() { return ordered_json::parse(test::read_file(test::fixture_dir() / "catalog.json")); }

TEST(Catalog, ParsesFixture) {
    const auto cat = test::fixture_catalog();
    EXPECT_EQ(cat.version(), "fixture-2025.1");
    EXPECT_EQ(cat.controls().size(), 14u);
    const auto& ac2 = cat.get_control("AC-2");
    EXPECT_EQ(ac2.family, "AC");
    ASSERT_EQ(ac2.min_params.size(), 1u);
    EXPECT_EQ(ac2.min_params[0].value_kind, ValueKind::Duration);
    EXPECT_EQ(ac2.enhancements, std::vector<std::string>{"AC-2(5)"});
    EXPECT_DOUBLE_EQ(ac2.mitigation_weight(ContextTag::PrivilegedAccess), 0.5);
    EXPECT_DOUBLE_EQ(ac2.mitigation_weight(ContextTag::Mobile), 0.0);
    EXPECT_TRUE(cat.get_control("AC-2(5)").is_enhancement());
    EXPECT_EQ(code_of([&] { cat.get_control("ZZ-1"); }), ErrorCode::UnknownControl);
}

TEST(Catalog, BaselinesAreNestedAndInFileOrder) {
    const auto cat = test::fixture_catalog();
    auto ids = [&](Category c) {
        std::vector<std::string> out;
        for (const auto& ctl : cat.baseline_for(c)) out.push_back(ctl.id);
        return out;
    };
    EXPECT_EQ(ids(Category::Low), (std::vector<std::string>{"AC-2", "AC-7", "IR-6", "AC-17"}));
    const auto mod = ids(Category::Moderate);
    EXPECT_EQ(mod.size(), 6u);
    EXPECT_EQ(ids(Category::High).size(), 9u);
}

TEST(Catalog, DanglingEnhancementIsRejected) {
    const auto raw = test::read_file(test::fixture_dir() / "catalog_dangling.json");
    try {
        catalog::parse_catalog(raw);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DanglingReference);
        EXPECT_EQ(e.details().value("control_id", ""), "AC-2(99)");
    }
}

TEST(Catalog, DanglingBaselineEntryIsRejected) {
    auto j = fixture_catalog_json();
    j["baselines"]["Low"].push_back("ZZ-9");
    EXPECT_EQ(code_of([&] { catalog::parse_catalog(j.dump()); }), ErrorCode::DanglingReference);
}

TEST(Catalog, NonMonotoneBaselinesAreRejected) {
    auto j = fixture_catalog_json();
    j["baselines"]["Low"].push_back("CP-2");
    try {
        catalog::parse_catalog(j.dump());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BaselineNotMonotone);
        EXPECT_EQ(e.details().value("control_id", ""), "CP-2");
    }
}

TEST(Catalog, StrictSchema) {
    {
        auto j = fixture_catalog_json();
        j["controls"][0]["colour"] = "red";
        try {
            catalog::parse_catalog(j.dump());
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::SchemaError);
            EXPECT_NE(std::string(e.what()).find("$.controls[0]"), std::string::npos);
        }
    }
    {
        auto j = fixture_catalog_json();
        j["controls"][0]["min_params"][0]["baseline_value"] = "promptly";
        EXPECT_EQ(code_of([&] { catalog::parse_catalog(j.dump()); }), ErrorCode::SchemaError);
    }
    {
        auto j = fixture_catalog_json();
        j["controls"][0]["id"] = "ac2";
        EXPECT_EQ(code_of([&] { catalog::parse_catalog(j.dump()); }), ErrorCode::SchemaError);
    }
    {
        auto j = fixture_catalog_json();
        j["controls"][0]["mitigation_tags"][0]["weight"] = 1.5;
        EXPECT_EQ(code_of([&] { catalog::parse_catalog(j.dump()); }), ErrorCode::SchemaError);
    }
    {
        auto j = fixture_catalog_json();
        j["controls"].push_back(j["controls"][0]);
        EXPECT_EQ(code_of([&] { catalog::parse_catalog(j.dump()); }), ErrorCode::SchemaError);
    }
    EXPECT_EQ(code_of([&] { catalog::parse_catalog("{not json"); }), ErrorCode::SchemaError);
}

TEST(Catalog, SerializationRoundTrips) {
    const auto cat = test::fixture_catalog();
    const auto again = catalog::parse_catalog(catalog::serialize_catalog(cat));
    EXPECT_EQ(cat, again);
    EXPECT_EQ(catalog::serialize_catalog(cat), catalog::serialize_catalog(again));
}

TEST(Catalog, FamilyProfilesFallBackToDefaults) {
    const auto cat = test::fixture_catalog();
    EXPECT_EQ(cat.family_profile("SC").owner_keywords, std::vector<std::string>{"network"});
    EXPECT_EQ(cat.family_profile("AC"), catalog::default_family_profile("AC"));
    EXPECT_EQ(catalog::family_of("AC-17(3)"), "AC");
    EXPECT_TRUE(catalog::is_valid_control_id("AC-17(3)"));
    EXPECT_FALSE(catalog::is_valid_control_id("AC-17()"));
    EXPECT_FALSE(catalog::is_valid_control_id("A-1"));
}

TEST(Passport, DerivesContextTags) {
    const auto m = test::fixture_passport();
    const std::set<ContextTag> expected{ContextTag::PrivilegedAccess, ContextTag::RemoteAccess,
                                        ContextTag::ExternalInterconnect, ContextTag::Mobile,
                                        ContextTag::HighAvailabilityMission};
    EXPECT_EQ(m.context_tags, expected);
    EXPECT_EQ(passport::derive_context_tags(m), expected);
}

TEST(Passport, PublicServiceImpliesPublicFacing) {
    auto j = ordered_json::parse(test::read_file(test::fixture_dir() / "passport.json"));
    j["external_services"][0]["audience"] = "public";
    EXPECT_TRUE(passport::parse_passport(j.dump()).has_tag(ContextTag::PublicFacing));
}

TEST(Passport, FlagsAreLimitedToExplicitTags) {
    const auto mt = test::fixture_passport("passport_multitenant.json");
    EXPECT_TRUE(mt.has_tag(ContextTag::MultiTenant));
    auto j = ordered_json::parse(test::read_file(test::fixture_dir() / "passport.json"));
    j["deployment"]["flags"] = {"mobile"};
    EXPECT_EQ(code_of([&] { passport::parse_passport(j.dump()); }), ErrorCode::SchemaError);
}

TEST(Passport, EmptyDataCategoriesIsItsOwnError) {
    auto j = ordered_json::parse(test::read_file(test::fixture_dir() / "passport.json"));
    j["data_categories"] = json::array();
    EXPECT_EQ(code_of([&] { passport::parse_passport(j.dump()); }), ErrorCode::EmptyDataCategories);
    j.erase("data_categories");
    EXPECT_EQ(code_of([&] { passport::parse_passport(j.dump()); }), ErrorCode::EmptyDataCategories);
}

TEST(Passport, StrictSchema) {
    auto j = ordered_json::parse(test::read_file(test::fixture_dir() / "passport.json"));
    j["budget"] = 12;
    EXPECT_EQ(code_of([&] { passport::parse_passport(j.dump()); }), ErrorCode::SchemaError);
    j.erase("budget");
    j["data_categories"][0]["sensitivity"]["integrity"] = "Severe";
    EXPECT_EQ(code_of([&] { passport::parse_passport(j.dump()); }), ErrorCode::SchemaError);
}

TEST(Passport, RoundTripAndDigest) {
    const auto m = test::fixture_passport();
    const auto again = passport::parse_passport(passport::serialize_passport(m));
    EXPECT_EQ(m, again);
    EXPECT_EQ(passport::passport_digest(m), passport::passport_digest(again));
    EXPECT_EQ(passport::passport_digest(m).size(), 64u);
    EXPECT_NE(passport::passport_digest(m), passport::passport_digest(test::fixture_passport("passport_gaps.json")));
}

TEST(Passport, CompletenessAndGaps) {
    const auto cat = test::fixture_catalog();
    const auto full = passport::completeness(test::fixture_passport(), cat);
    EXPECT_DOUBLE_EQ(full.score, 1.0);
    EXPECT_TRUE(full.missing_fields.empty());
    EXPECT_FALSE(full.per_control_gaps.contains("AC-2"));

    const auto gaps = test::fixture_passport("passport_gaps.json");
    const auto report = passport::completeness(gaps, cat);
    ASSERT_TRUE(report.per_control_gaps.contains("AC-2"));
    EXPECT_EQ(report.per_control_gaps.at("AC-2"), std::vector<std::string>{"procedures.account_termination"});
    EXPECT_TRUE(passport::field_is_filled(gaps, "admin_roles"));
    EXPECT_FALSE(passport::field_is_filled(gaps, "procedures.account_termination"));
}

TEST(Profiling, CategoryIsHighWaterMark) {
    auto m = test::fixture_passport();
    EXPECT_EQ(profiling::categorize(m), Category::Moderate);
    m.data_categories[1].sensitivity.availability = Category::High;
    EXPECT_EQ(profiling::categorize(m), Category::High);
}

TEST(Profiling, RequirementsCoverEveryDeclaredNeed) {
    const auto m = test::fixture_passport();
    const auto q = profiling::derive_requirements(m);
    for (auto o : {Objective::Confidentiality, Objective::Integrity, Objective::Availability,
                   Objective::Accountability, Objective::Privacy, Objective::Continuity}) {
        EXPECT_TRUE(q.covers(o)) << to_string(o);
    }
    for (const auto& r : q.requirements()) EXPECT_FALSE(r.source_fields.empty()) << r.statement;
    // Duplicate (objective, statement) pairs merge instead of growing the set.
    profiling::RequirementSet s;
    EXPECT_TRUE(s.add({Objective::Integrity, "x", {"a"}}));
    EXPECT_FALSE(s.add({Objective::Integrity, "x", {"b"}}));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.requirements()[0].source_fields, (std::vector<std::string>{"a", "b"}));
}

TEST(Profiling, SelectsBaselineForCategory) {
    const auto cat = test::fixture_catalog();
    const auto base = profiling::select_baseline(test::fixture_passport(), cat);
    EXPECT_EQ(base.size(), cat.baselines().at(Category::Moderate).size());
}

} // namespace
} // namespace tsp
