#include <gtest/gtest.h>

#include <cstdlib>

#include "support.hpp"
#include "tsp/error.hpp"
#include "tsp/gateway/config.hpp"
#include "tsp/gateway/service.hpp"

namespace tsp {
namespace {

using gateway::HttpRequest;
using gateway::HttpResponse;
using nlohmann::json;

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::Internal;
}

TEST(HttpStatus, Table) {
    EXPECT_EQ(gateway::http_status(ErrorCode::SchemaError), 400);
    EXPECT_EQ(gateway::http_status(ErrorCode::Unauthorized), 401);
    EXPECT_EQ(gateway::http_status(ErrorCode::UnknownSession), 404);
    EXPECT_EQ(gateway::http_status(ErrorCode::ApprovalBlocked), 409);
    EXPECT_EQ(gateway::http_status(ErrorCode::InvalidTransition), 409);
    EXPECT_EQ(gateway::http_status(ErrorCode::RelaxationRejected), 422);
    EXPECT_EQ(gateway::http_status(ErrorCode::BudgetExceeded), 429);
    EXPECT_EQ(gateway::http_status(ErrorCode::BackendUnavailable), 502);
    EXPECT_EQ(gateway::http_status(ErrorCode::Timeout), 504);
}

TEST(HttpStatus, ProblemBody) {
    const auto r = gateway::problem(Error(ErrorCode::ApprovalBlocked, "blocked", {{"unresolved", {"AC-7"}}}));
    EXPECT_EQ(r.status, 409);
    EXPECT_EQ(r.content_type, "application/problem+json");
    const auto j = json::parse(r.body);
    EXPECT_EQ(j["code"], "ApprovalBlocked");
    EXPECT_EQ(j["status"], 409);
    EXPECT_EQ(j["detail"], "blocked");
    EXPECT_EQ(j["details"]["unresolved"], json::array({"AC-7"}));
}

// --- configuration ----------------------------------------------------------------------

TEST(Config, FixtureLoadsAndResolvesPaths) {
    const auto cfg = gateway::load_config(test::fixture_dir() / "config.json");
    EXPECT_EQ(cfg.catalog, test::fixture_dir() / "catalog.json");
    EXPECT_EQ(cfg.advisor.kind, "scripted");
    EXPECT_EQ(cfg.advisor.client.parallelism, 2u);
    EXPECT_EQ(cfg.prompt.top_k, 3);
    EXPECT_EQ(cfg.embedder.dimension, 256u);
}

TEST(Config, StrictKeys) {
    EXPECT_EQ(code_of([] { gateway::parse_config(R"({"catalog":"c.json","colour":"red"})", "."); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { gateway::parse_config(R"({"catalog":"c.json","advisor":{"kind":"oracle"}})", "."); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { gateway::parse_config("not json", "."); }), ErrorCode::ConfigError);
}

TEST(Config, RemoteBackendWithoutCredentialFailsEarly) {
    ::unsetenv("TSP_TEST_UNSET_CREDENTIAL");
    const auto cfg = gateway::load_config(test::fixture_dir() / "config_remote.json");
    EXPECT_EQ(code_of([&] { gateway::make_backend(cfg.advisor); }), ErrorCode::ConfigError);
}

TEST(Config, NoneBackendIsNull) {
    gateway::AdvisorConfig a;
    EXPECT_EQ(gateway::make_backend(a), nullptr);
}

// --- API --------------------------------------------------------------------------------

class Api : public ::testing::Test {
protected:
    test::TempDir dir;

    std::unique_ptr<gateway::Gateway> make(const std::string& token_env = {}) {
        gateway::Gateway::Deps deps;
        deps.config = test::fixture_config(dir.path());
        deps.config.server.bearer_token_env = token_env;
        deps.catalog = test::fixture_catalog();
        deps.embedder = gateway::make_embedder(deps.config.embedder);
        deps.index = std::make_unique<rag::VectorIndex>(test::fixture_index(*deps.embedder));
        deps.backend = gateway::make_backend(deps.config.advisor);
        deps.clock = [] { return std::string(test::kFixedTimestamp); };
        return std::make_unique<gateway::Gateway>(std::move(deps));
    }

    static HttpRequest get(const std::string& path) { return {"GET", path, "", {}}; }
    static HttpRequest post(const std::string& path, const json& body) { return {"POST", path, body.dump(), {}}; }

    static json passport_json(const std::string& name = "passport.json") {
        return json::parse(test::read_file(test::fixture_dir() / name));
    }

    // Runs a derive job to completion and returns the stored profile id.
    static std::string derive(gateway::Gateway& g, const json& body) {
        const auto r = g.handle(post("/v1/derive", body));
        EXPECT_EQ(r.status, 202) << r.body;
        const auto job_id = json::parse(r.body)["job_id"].get<std::string>();
        g.wait_idle();
        const auto job = json::parse(g.handle(get("/v1/jobs/" + job_id)).body);
        EXPECT_EQ(job["state"], "done") << job.dump();
        return job.value("profile_id", "");
    }
};

TEST_F(Api, DeriveMatchesGoldenProfile) {
    auto g = make();
    const auto pid = derive(*g, {{"passport", passport_json()}});
    const auto r = g->handle(get("/v1/profiles/" + pid));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(json::parse(r.body), json::parse(test::read_file(test::golden_dir() / "profile_scripted.json")));
    const auto report = g->handle(get("/v1/profiles/" + pid + "/report"));
    EXPECT_EQ(report.status, 200);
    EXPECT_NE(report.body.find("AC-2"), std::string::npos);
}

TEST_F(Api, JobRecordsInputs) {
    auto g = make();
    const auto r = g->handle(post("/v1/derive", {{"passport", passport_json()}, {"advisor", false}}));
    const auto j = json::parse(r.body);
    EXPECT_EQ(j["inputs"]["backend"], "none");
    EXPECT_EQ(j["inputs"]["catalog_version"], test::fixture_catalog().version());
    g->wait_idle();
}

TEST_F(Api, DeriveValidation) {
    auto g = make();
    EXPECT_EQ(g->handle(post("/v1/derive", json::object())).status, 400);
    EXPECT_EQ(g->handle(post("/v1/derive", {{"passport", passport_json()}, {"extra", 1}})).status, 400);
    EXPECT_EQ(g->handle(post("/v1/derive", {{"passport", passport_json()}, {"thresholds", {{"risk", 2.0}}}})).status,
              400);
    EXPECT_EQ(g->handle({"POST", "/v1/derive", "{not json", {}}).status, 400);
}

TEST_F(Api, FailedJobCarriesProblem) {
    auto g = make();
    auto p = passport_json();
    p["roles"] = json::array();
    const auto r = g->handle(post("/v1/derive", {{"passport", p}, {"advisor", false}}));
    if (r.status != 202) {
        // Passport validation rejected it up front.
        EXPECT_EQ(json::parse(r.body)["code"], "SchemaError");
        return;
    }
    g->wait_idle();
    const auto job = json::parse(g->handle(get("/v1/jobs/" + json::parse(r.body)["job_id"].get<std::string>())).body);
    EXPECT_EQ(job["state"], "failed");
    EXPECT_EQ(job["error"]["code"], "NoAdminRoles");
}

TEST_F(Api, NotFoundCases) {
    auto g = make();
    EXPECT_EQ(g->handle(get("/v1/jobs/j-9999")).status, 404);
    EXPECT_EQ(g->handle(get("/v1/profiles/p-9999")).status, 404);
    EXPECT_EQ(g->handle(get("/v1/profiles/..%2Fetc")).status, 404);
    EXPECT_EQ(g->handle(get("/v1/sessions/s-9999")).status, 404);
    EXPECT_EQ(json::parse(g->handle(get("/v1/sessions/s-9999")).body)["code"], "UnknownSession");
    EXPECT_EQ(g->handle(get("/v1/nowhere")).status, 404);
    EXPECT_EQ(g->handle(get("/v1/catalog/controls/ZZ-1")).status, 404);
    EXPECT_EQ(g->handle(get("/v1/evidence/chunks/nope")).status, 404);
}

TEST_F(Api, CatalogAndEvidence) {
    auto g = make();
    EXPECT_EQ(json::parse(g->handle(get("/v1/catalog/controls/AC-2")).body)["id"], "AC-2");
    EXPECT_EQ(g->handle(get("/v1/catalog")).status, 200);
    const auto pid = derive(*g, {{"passport", passport_json()}});
    const auto profile = json::parse(g->handle(get("/v1/profiles/" + pid)).body);
    const auto chunk_id = profile["records"][0]["citations"][0].get<std::string>();
    const auto chunk = g->handle(get("/v1/evidence/chunks/" + chunk_id));
    EXPECT_EQ(chunk.status, 200);
    EXPECT_EQ(json::parse(chunk.body)["chunk_id"], chunk_id);
}

TEST_F(Api, ReviewFlow) {
    auto g = make();
    const auto pid = derive(*g, {{"passport", passport_json("passport_infeasible.json")}, {"advisor", false}});
    auto r = g->handle(post("/v1/sessions", {{"profile_id", pid}, {"reviewer", "alice"}}));
    ASSERT_EQ(r.status, 201) << r.body;
    const auto sid = json::parse(r.body)["session_id"].get<std::string>();
    EXPECT_EQ(g->handle(post("/v1/sessions", {{"profile_id", pid}, {"reviewer", "bob"}})).status, 409);

    EXPECT_EQ(g->handle(post("/v1/sessions/" + sid + "/accept-all", json::object())).status, 200);
    r = g->handle(post("/v1/sessions/" + sid + "/approve", json::object()));
    ASSERT_EQ(r.status, 409);
    const auto blocked = json::parse(r.body);
    EXPECT_EQ(blocked["code"], "ApprovalBlocked");
    EXPECT_EQ(blocked["details"]["unresolved"], json::array({"AC-19(5)"}));

    r = g->handle(post("/v1/sessions/" + sid + "/controls/IR-6/action",
                       {{"action", "edit"}, {"payload", {{"target_params", {{"reporting_time", "3 days"}}}}}}));
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(json::parse(r.body)["code"], "RelaxationRejected");
    r = g->handle(post("/v1/sessions/" + sid + "/controls/AC-19(5)/action",
                       {{"action", "edit"}, {"payload", {{"rationale", "Residual risk accepted by the owner"}}}}));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_TRUE(json::parse(r.body)["approvable"].get<bool>());
    EXPECT_EQ(g->handle(post("/v1/sessions/" + sid + "/controls/IR-6/action", {{"action", "approve"}})).status, 409);

    r = g->handle(post("/v1/sessions/" + sid + "/approve", {{"reviewer", "lead"}}));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(json::parse(r.body)["status"], "approved");
    EXPECT_EQ(json::parse(g->handle(get("/v1/profiles/" + pid)).body)["status"], "approved");
    EXPECT_EQ(g->handle(post("/v1/sessions/" + sid + "/controls/IR-6/action",
                             {{"action", "add_note"}, {"payload", {{"note", "late"}}}}))
                  .status,
              409);

    EXPECT_EQ(g->handle(post("/v1/sessions/" + sid + "/reopen", json::object())).status, 422);
    r = g->handle(post("/v1/sessions/" + sid + "/reopen", {{"reason", "new regulation"}, {"controls", {"IR-6"}}}));
    ASSERT_EQ(r.status, 201) << r.body;
    const auto fork = json::parse(r.body);
    EXPECT_NE(fork["session_id"], sid);
    EXPECT_EQ(fork["prior_session_id"], sid);
    EXPECT_EQ(fork["round"], 2);
    EXPECT_EQ(fork["controls"]["IR-6"]["state"], "pending");
    const auto list = json::parse(g->handle(get("/v1/sessions")).body);
    EXPECT_EQ(list.size(), 2u);
}

TEST_F(Api, BearerToken) {
    ::setenv("TSP_TEST_API_TOKEN", "s3cret", 1);
    auto g = make("TSP_TEST_API_TOKEN");
    EXPECT_EQ(g->handle(get("/v1/catalog")).status, 401);
    auto req = get("/v1/catalog");
    req.headers["authorization"] = "Bearer wrong";
    EXPECT_EQ(g->handle(req).status, 401);
    req.headers["authorization"] = "Bearer s3cret";
    EXPECT_EQ(g->handle(req).status, 200);
    ::unsetenv("TSP_TEST_API_TOKEN");
    EXPECT_EQ(code_of([&] { make("TSP_TEST_API_TOKEN"); }), ErrorCode::ConfigError);
}

} // namespace
} // namespace tsp
