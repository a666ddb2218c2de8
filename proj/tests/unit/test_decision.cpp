#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "tsp/decision.hpp"
#include "tsp/error.hpp"
#include "tsp/gateway/pipeline.hpp"
#include "tsp/matrix.hpp"

namespace tsp {
namespace {

using decision::Decision;
using nlohmann::ordered_json;

gateway::DeriveResult rule_derive(const std::string& passport_file) {
    gateway::DeriveOptions opts;
    opts.timestamp = test::kFixedTimestamp;
    return gateway::derive(test::fixture_passport(passport_file), test::fixture_catalog(), opts);
}

const decision::TargetControlRecord& record(const decision::TargetProfile& p, const std::string& id) {
    const auto* r = p.find(id);
    if (!r) throw std::runtime_error("missing record " + id);
    return *r;
}

matrix::MatrixRow synthetic_row(double rho, matrix::Adequacy alpha, double risk, bool infeasible, bool has_enh) {
    matrix::MatrixRow row;
    row.control.id = "AC-1";
    row.relevance = rho;
    row.adequacy = alpha;
    row.risk = risk;
    row.infeasible = infeasible;
    if (has_enh) row.candidate_enhancements = {"AC-1(1)"};
    return row;
}

TEST(Decision, TruthTableMatchesCaseEvaluator) {
    const matrix::Thresholds t;
    int cases = 0;
    for (double rho : {0.0, 0.4, 0.5, 0.6, 1.0}) {
        for (auto [alpha, oalpha] : {std::pair{matrix::Adequacy::Sufficient, oracle::Alpha::Sufficient},
                                     std::pair{matrix::Adequacy::Insufficient, oracle::Alpha::Insufficient},
                                     std::pair{matrix::Adequacy::Unknown, oracle::Alpha::Unknown}}) {
            for (double risk : {0.5, 0.7, 0.71, 1.0}) {
                for (bool inf : {false, true}) {
                    for (bool enh : {false, true}) {
                        const auto got = decision::decide(synthetic_row(rho, alpha, risk, inf, enh), t);
                        EXPECT_EQ(decision::to_string(got),
                                  oracle::expected_decision(rho, oalpha, risk, inf, enh, t.relevance, t.risk))
                            << "rho=" << rho << " risk=" << risk << " inf=" << inf << " enh=" << enh;
                        ++cases;
                    }
                }
            }
        }
    }
    EXPECT_EQ(cases, 240);
}

TEST(Decision, ThresholdBoundariesAreInclusiveForRelevanceExclusiveForRisk) {
    const matrix::Thresholds t;
    EXPECT_EQ(decision::decide(synthetic_row(0.5, matrix::Adequacy::Insufficient, 0.1, false, false), t),
              Decision::Refine);
    EXPECT_EQ(decision::decide(synthetic_row(0.49, matrix::Adequacy::Insufficient, 0.1, false, false), t),
              Decision::Keep);
    EXPECT_EQ(decision::decide(synthetic_row(1.0, matrix::Adequacy::Sufficient, 0.7, false, true), t),
              Decision::Keep);
    EXPECT_EQ(decision::decide(synthetic_row(1.0, matrix::Adequacy::Sufficient, 0.8, false, true), t),
              Decision::Enhance);
}

TEST(Decision, FixtureRuleDraft) {
    const auto r = rule_derive("passport.json");
    const auto& p = r.profile;
    EXPECT_EQ(p.category, Category::Moderate);

    const auto& ac2 = record(p, "AC-2");
    EXPECT_EQ(ac2.decision, Decision::Refine);
    EXPECT_EQ(*decision::find_param(ac2.target_params, "account_disable"), "Within 8 hours after termination");
    EXPECT_EQ(ac2.enhancements, std::vector<std::string>{"AC-2(5)"});

    const auto& ir6 = record(p, "IR-6");
    EXPECT_EQ(ir6.decision, Decision::Keep);
    EXPECT_EQ(*decision::find_param(ir6.target_params, "reporting_time"), "2 hours");

    const auto& ir3 = record(p, "IR-3");
    EXPECT_EQ(ir3.decision, Decision::Keep);
    EXPECT_EQ(*decision::find_param(ir3.target_params, "test_frequency"), "At least annually");

    const auto& ac17 = record(p, "AC-17");
    EXPECT_EQ(ac17.decision, Decision::Enhance);
    EXPECT_EQ(ac17.enhancements, (std::vector<std::string>{"AC-17(3)", "AC-17(4)"}));

    // The baseline leaves external interconnection at 0.2 + 0.3 = 0.5 < 0.8; SC-7 (0.9) closes it.
    ASSERT_EQ(p.residual_gap.uncovered_tags.size(), 1u);
    EXPECT_EQ(p.residual_gap.uncovered_tags[0].tag, ContextTag::ExternalInterconnect);
    EXPECT_NEAR(p.residual_gap.uncovered_tags[0].coverage, 0.5, 1e-12);
    EXPECT_EQ(p.added_controls, std::vector<std::string>{"SC-7"});
    const auto& sc7 = record(p, "SC-7");
    EXPECT_EQ(sc7.decision, Decision::Add);
    EXPECT_EQ(sc7.owner, "Network Engineer");
    EXPECT_EQ(sc7.artifacts, (std::vector<std::string>{"network-diagram", "configuration-snapshot"}));
}

TEST(Decision, OneRecordPerBaselineControlThenAdds) {
    const auto r = rule_derive("passport.json");
    const auto& rows = r.matrix.rows;
    const auto& recs = r.profile.records;
    ASSERT_GE(recs.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(recs[i].control_id, rows[i].control.id);
    for (std::size_t i = rows.size(); i < recs.size(); ++i) {
        EXPECT_EQ(recs[i].decision, Decision::Add);
        if (i > rows.size()) EXPECT_LT(recs[i - 1].control_id, recs[i].control_id);
    }
    for (const auto& rec : recs) EXPECT_FALSE(rec.rationale.empty());
}

TEST(Decision, MissingPassportFieldLeavesBaselineAndFlagsGap) {
    const auto r = rule_derive("passport_gaps.json");
    const auto& ac2 = record(r.profile, "AC-2");
    ASSERT_TRUE(ac2.insufficiency.has_value());
    EXPECT_EQ(*ac2.insufficiency, std::vector<std::string>{"procedures.account_termination"});
    // The rule that needs the missing procedure does not fire.
    EXPECT_EQ(*decision::find_param(ac2.target_params, "account_disable"), "End of user working day");
    EXPECT_NE(ac2.rationale.find("insufficient-information"), std::string::npos)
        << "unknown adequacy must be explained: " << ac2.rationale;
}

TEST(Decision, InfeasibleControlIsCompensated) {
    const auto r = rule_derive("passport_infeasible.json");
    const auto& rec = record(r.profile, "AC-19(5)");
    EXPECT_EQ(rec.decision, Decision::Compensate);
    ASSERT_TRUE(rec.compensation.has_value());
    // Declared measure covers mobile with 0.7 of the control's 0.9.
    EXPECT_NEAR(rec.compensation->coverage, 0.7 / 0.9, 1e-12);
    EXPECT_FALSE(rec.compensation->acceptable);
    EXPECT_NEAR(rec.compensation->residual_risk, 0.6 * (1.0 - 0.7 / 0.9), 1e-12);
    EXPECT_TRUE(rec.needs_explicit_review());
    EXPECT_TRUE(rec.enhancements.empty());
    // The infeasible control no longer covers mobile, so the gap step adds AC-19.
    EXPECT_NE(r.profile.find("AC-19"), nullptr);
}

TEST(Decision, UncoverableRiskBecomesOpenItem) {
    const auto r = rule_derive("passport_multitenant.json");
    bool found = false;
    for (const auto& item : r.profile.open_items) {
        found = found || (item.kind == "NoCoveringControl" && item.subject == "multi-tenant");
    }
    EXPECT_TRUE(found);
}

TEST(Decision, NoAdminRolesStopsDerivation) {
    try {
        rule_derive("passport_no_admins.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoAdminRoles);
    }
}

TEST(Decision, RiskIsExactInTenths) {
    const auto cat = test::fixture_catalog();
    const auto m = test::fixture_passport();
    // AC-2 mitigates three active tags: 0.5 + 3 * 0.1.
    EXPECT_EQ(matrix::risk_score(cat.get_control("AC-2"), m, Category::Moderate), 0.8);
    EXPECT_EQ(matrix::risk_score(cat.get_control("IR-6"), m, Category::Moderate), 0.6);
    EXPECT_EQ(matrix::risk_score(cat.get_control("AC-2"), m, Category::High), 1.0);
    EXPECT_EQ(matrix::risk_score(cat.get_control("IR-6"), m, Category::Low), 0.4);
}

TEST(Decision, RelevanceIsShareOfApplicabilityTags) {
    const auto cat = test::fixture_catalog();
    auto m = test::fixture_passport();
    EXPECT_EQ(matrix::relevance(cat.get_control("IR-6"), m), 1.0);
    EXPECT_EQ(matrix::relevance(cat.get_control("AC-17(4)"), m), 1.0);
    m.context_tags.erase(ContextTag::PrivilegedAccess);
    EXPECT_EQ(matrix::relevance(cat.get_control("AC-17(4)"), m), 0.5);
    EXPECT_EQ(matrix::relevance(cat.get_control("AC-2"), m), 0.0);
}

catalog::Catalog tiny_catalog(const std::string& controls, const std::string& low) {
    return catalog::parse_catalog(R"({"version":"t","source_doc_id":"t","controls":[)" + controls +
                                  R"(],"baselines":{"Low":[)" + low + R"(],"Moderate":[)" + low +
                                  R"(],"High":[)" + low + "]}}");
}

TEST(Decision, AddPicksHighestWeightThenSmallestId) {
    const auto cat = tiny_catalog(
        R"J({"id":"AC-1","name":"a","mitigation_tags":[{"tag":"mobile","weight":0.1}]},
           {"id":"SC-9","name":"b","mitigation_tags":[{"tag":"mobile","weight":0.6}]},
           {"id":"SC-3","name":"c","mitigation_tags":[{"tag":"mobile","weight":0.6}]},
           {"id":"SC-3(1)","name":"d","mitigation_tags":[{"tag":"mobile","weight":0.9}]})J",
        R"("AC-1")");
    auto m = test::fixture_passport();
    m.context_tags = {ContextTag::Mobile};
    const auto gap = decision::risk_gap(m, {cat.get_control("AC-1")}, 0.8);
    ASSERT_EQ(gap.uncovered_tags.size(), 1u);
    EXPECT_NEAR(gap.value, 0.9, 1e-12);
    const auto extra = decision::add_extra_controls(gap, cat, {"AC-1"}, m);
    ASSERT_EQ(extra.records.size(), 1u);
    // Enhancements are never added on their own; equal weights fall to the smaller id.
    EXPECT_EQ(extra.records[0].control_id, "SC-3");
}

TEST(Decision, CoverageSaturatesAtOne) {
    auto m = test::fixture_passport();
    m.context_tags = {ContextTag::Mobile};
    catalog::Control a;
    a.mitigation_tags = {{ContextTag::Mobile, 0.7}};
    const auto gap = decision::risk_gap(m, {a, a}, 0.8);
    EXPECT_TRUE(gap.uncovered_tags.empty());
    EXPECT_EQ(gap.value, 0.0);
}

TEST(Decision, MitigationCoverageIsPerTagMinimum) {
    using catalog::MitigationTag;
    const std::vector<MitigationTag> orig{{ContextTag::Mobile, 0.6}, {ContextTag::RemoteAccess, 0.4}};
    EXPECT_NEAR(decision::mitigation_coverage(orig, {{ContextTag::Mobile, 0.9}}), 0.6, 1e-12);
    EXPECT_NEAR(decision::mitigation_coverage(orig, {{ContextTag::Mobile, 0.3}, {ContextTag::RemoteAccess, 0.4}}),
                0.7, 1e-12);
    EXPECT_EQ(decision::mitigation_coverage(orig, {}), 0.0);
    EXPECT_EQ(decision::mitigation_coverage({}, orig), 0.0);
}

TEST(Decision, RelaxingRuleIsRejected) {
    matrix::MatrixRow row = synthetic_row(1.0, matrix::Adequacy::Insufficient, 0.5, false, false);
    catalog::Parameter p;
    p.key = "reporting_time";
    p.baseline_value = "2 hours";
    p.value_kind = ValueKind::Duration;
    p.refinement_rules = {{ContextTag::Mobile, "1 day", {}}};
    row.min_params = {p};
    row.context.tags = {ContextTag::Mobile};
    try {
        decision::instantiate_params(row, Decision::Refine);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RelaxationRejected);
    }
    // Keep never consults the rules.
    EXPECT_EQ(decision::instantiate_params(row, Decision::Keep)[0].second, "2 hours");
    EXPECT_THROW(decision::instantiate_params(row, Decision::Add), Error);
}

TEST(Decision, ThresholdsOutsideUnitIntervalAreConfigErrors) {
    for (double bad : {0.0, 1.0, -0.1, 1.5}) {
        matrix::Thresholds t;
        t.risk = bad;
        try {
            t.validate();
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ConfigError);
        }
    }
}

TEST(Decision, ProfileSerializationRoundTrips) {
    for (const char* f : {"passport.json", "passport_infeasible.json", "passport_gaps.json"}) {
        const auto p = rule_derive(f).profile;
        const auto text = decision::serialize_profile(p);
        const auto again = decision::parse_profile(text);
        EXPECT_EQ(p, again) << f;
        EXPECT_EQ(decision::serialize_profile(again), text) << f;
    }
}

TEST(Decision, ProfileParseIsStrict) {
    auto j = ordered_json::parse(decision::serialize_profile(rule_derive("passport.json").profile));
    j["records"][0]["decision"] = "Drop";
    EXPECT_THROW(decision::profile_from_json(j), Error);
    j = ordered_json::parse(decision::serialize_profile(rule_derive("passport.json").profile));
    j["surprise"] = true;
    EXPECT_THROW(decision::profile_from_json(j), Error);
}

TEST(Decision, DerivationIsDeterministic) {
    const auto a = decision::serialize_profile(rule_derive("passport.json").profile);
    const auto b = decision::serialize_profile(rule_derive("passport.json").profile);
    EXPECT_EQ(a, b);
}

TEST(Decision, MarkdownReportComparesAgainstBaseline) {
    const auto p = rule_derive("passport.json").profile;
    const auto md = decision::render_markdown(p, test::fixture_catalog());
    EXPECT_NE(md.find("AC-2"), std::string::npos);
    EXPECT_NE(md.find("End of user working day"), std::string::npos);
    EXPECT_NE(md.find("Within 8 hours after termination"), std::string::npos);
    EXPECT_NE(md.find("SC-7"), std::string::npos);
}

} // namespace
} // namespace tsp
