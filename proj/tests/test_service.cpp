#include <gtest/gtest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "fusion/serialization.hpp"
#include "fusion/service.hpp"
#include "store_check.hpp"
#include "support.hpp"

using namespace fusion;
using namespace fusion::testing;
using nlohmann::json;

namespace {

class ServiceTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() { analysis = analyze_docviewer().release(); }
    static void TearDownTestSuite() {
        delete analysis;
        analysis = nullptr;
    }

    void SetUp() override {
        store = std::make_unique<Store>(tmp.path());
        import_blobs(*store, *analysis);
        store->save_analysis(analysis->universe, analysis->graph);
        start();
    }

    void TearDown() override { stop(); }

    void start() {
        service = std::make_unique<ReportingService>(*store);
        server = std::make_unique<ApiServer>(*service);
        port = server->bind("127.0.0.1", 0);
        thread = std::thread([this] { server->run(); });
        server->wait_until_ready();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }

    void stop() {
        client.reset();
        if (server) server->stop();
        if (thread.joinable()) thread.join();
        server.reset();
        service.reset();
    }

    json get(const std::string& path, int expect = 200) {
        auto res = client->Get(path);
        EXPECT_TRUE(res) << path;
        if (!res) return {};
        EXPECT_EQ(res->status, expect) << path << " -> " << res->body;
        return json::parse(res->body);
    }
    json post(const std::string& path, const json& body, int expect) {
        auto res = client->Post(path, body.dump(), "application/json");
        EXPECT_TRUE(res) << path;
        if (!res) return {};
        EXPECT_EQ(res->status, expect) << path << " -> " << res->body;
        return json::parse(res->body);
    }

    std::string open_session() {
        const json md = {{"reporter_name", "Ann"}, {"device", "Nexus 5"}, {"orientation", "portrait"},
                         {"title", "Go To Page"}, {"description", "needs two entries"}};
        return post("/api/apps/docviewer/sessions", md, 201).at("session_id").get<std::string>();
    }

    // Picks a suggested component, fetches its confirmation and commits it.
    json commit(const std::string& sid, const std::string& action, const std::string& id, int index,
                std::optional<std::string> text = std::nullopt) {
        const json comps = get("/api/sessions/" + sid + "/components?action=" + action);
        const auto& list = comps.at("components");
        EXPECT_EQ(list.back().at("kind"), "not_in_list");
        EXPECT_EQ(list.back().at("label"), "Not in this list...");
        auto it = std::find_if(list.begin(), list.end(), [&](const json& c) {
            return c.at("kind") == "component" && c.at("instance").at("component_id") == id &&
                   c.at("instance").at("object_index") == index;
        });
        EXPECT_NE(it, list.end()) << id;
        const json conf =
            get("/api/sessions/" + sid + "/confirmations?component=" + id + "&index=" + std::to_string(index));
        const json& first = conf.at("confirmations").at(0);
        json act = {{"kind", action}};
        if (text) act["typed_text"] = *text;
        const json body = {{"action", act},
                           {"resolution",
                            {{"kind", "auto"},
                             {"screen_key", first.at("screen_key")},
                             {"instance", it->at("instance")},
                             {"confirmed_screenshot", first.at("screenshot")}}}};
        return post("/api/sessions/" + sid + "/steps", body, 201);
    }

    static Analyzed* analysis;
    TempDir tmp;
    std::unique_ptr<Store> store;
    std::unique_ptr<ReportingService> service;
    std::unique_ptr<ApiServer> server;
    std::unique_ptr<httplib::Client> client;
    std::thread thread;
    int port = 0;
};

Analyzed* ServiceTest::analysis = nullptr;

}  // namespace

TEST_F(ServiceTest, ListsApps) {
    const json apps = get("/api/apps").at("apps");
    ASSERT_EQ(apps.size(), 1u);
    EXPECT_EQ(apps[0].at("app_id"), "docviewer");
    EXPECT_EQ(apps[0].at("explored"), true);
    EXPECT_EQ(apps[0].at("screens"), 5);
}

TEST_F(ServiceTest, ManualFormOffersOnlyBundleTypes) {
    const json types = get("/api/apps/docviewer/component-types").at("types");
    EXPECT_EQ(types, json(analysis->universe.type_set));
    EXPECT_EQ(types.size(), 7u);
    EXPECT_EQ(get("/api/apps/nothing/component-types", 404).at("error").at("code"), "not_found");
}

TEST_F(ServiceTest, FullReportingFlow) {
    const std::string sid = open_session();
    EXPECT_EQ(get("/api/sessions/" + sid + "/actions").at("actions"), json::array({"click"}));
    commit(sid, "click", "ok", 0);
    commit(sid, "click", "doc_item", 0);
    commit(sid, "click", "goto_page", 0);
    const json steps = commit(sid, "type", "page_number", 0, "5");
    EXPECT_EQ(steps.at("steps").size(), 4u);

    const json fin = post("/api/sessions/" + sid + "/finalize", json::object(), 201);
    EXPECT_EQ(fin.at("report_id"), 1);
    EXPECT_EQ(fin.at("gap_free"), true);

    const json report = get("/api/apps/docviewer/reports/1");
    EXPECT_EQ(report.at("steps").size(), 4u);
    EXPECT_EQ(report.at("full_screenshots").size(), 4u);
    EXPECT_EQ(report.at("steps")[3].at("action").at("typed_text"), "5");

    auto html = client->Get("/api/apps/docviewer/reports/1/html");
    ASSERT_TRUE(html);
    EXPECT_EQ(html->status, 200);
    EXPECT_EQ(html->get_header_value("Content-Type"), "text/html; charset=utf-8");
    EXPECT_NE(html->body.find("<section id=\"screenshots\">"), std::string::npos);

    const std::string hash = report.at("full_screenshots")[0].at("hash");
    auto blob = client->Get("/api/blobs/" + hash);
    ASSERT_TRUE(blob);
    EXPECT_EQ(blob->status, 200);
    EXPECT_EQ(blob->get_header_value("Content-Type"), "image/png");
    EXPECT_NE(blob->get_header_value("Cache-Control").find("immutable"), std::string::npos);
    EXPECT_EQ(sha256_hex(blob->body), hash);

    // A finalized session accepts nothing more.
    const json again = post("/api/sessions/" + sid + "/finalize", json::object(), 409);
    EXPECT_EQ(again.at("error").at("code"), "conflict");
    const json late = post("/api/sessions/" + sid + "/steps",
                           {{"action", "click"},
                            {"resolution", {{"kind", "manual"}, {"component_type", "Button"}, {"relative_location", "center"}}}},
                           409);
    EXPECT_EQ(late.at("error").at("code"), "conflict");
}

TEST_F(ServiceTest, ResponsesEqualDirectCalls) {
    const std::string sid = open_session();
    commit(sid, "click", "ok", 0);
    const Session s = store->load_session(sid);
    const AutoCompleter ac(analysis->universe, analysis->graph);
    for (ActionKind k : kAllActionKinds) {
        const json api = get("/api/sessions/" + sid + "/components?action=" + std::string(to_string(k)));
        EXPECT_EQ(api.at("components"), json(ac.suggest_components(s, k))) << to_string(k);
    }
    json actions = json::array();
    for (ActionKind k : ac.suggest_actions(s)) actions.push_back(to_string(k));
    EXPECT_EQ(get("/api/sessions/" + sid + "/actions").at("actions"), actions);
    EXPECT_EQ(get("/api/sessions/" + sid + "/confirmations?component=doc_item&index=2").at("confirmations"),
              json(ac.confirmation_screenshots(s, InstanceRef{"doc_item", 2})));
}

TEST_F(ServiceTest, ManualStepAndUndo) {
    const std::string sid = open_session();
    const json body = {{"action", "click"},
                       {"resolution",
                        {{"kind", "manual"}, {"component_type", "Button"}, {"text", "Open Document"},
                         {"relative_location", "Top Center"}}},
                       {"user_note", "not offered"}};
    const json after = post("/api/sessions/" + sid + "/steps", body, 201);
    EXPECT_EQ(after.at("candidate_screens").size(), 5u);
    EXPECT_EQ(after.at("steps")[0].at("resolution").at("relative_location"), "top_center");

    auto res = client->Delete("/api/sessions/" + sid + "/steps/last");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body).at("steps").size(), 0u);
    res = client->Delete("/api/sessions/" + sid + "/steps/last");
    EXPECT_EQ(res->status, 400);

    const json bad_type = post("/api/sessions/" + sid + "/steps",
                               {{"action", "click"},
                                {"resolution", {{"kind", "manual"}, {"component_type", "Slider"}, {"relative_location", "center"}}}},
                               400);
    EXPECT_EQ(bad_type.at("error").at("code"), "validation");
}

TEST_F(ServiceTest, SessionsSurviveRestart) {
    const std::string sid = open_session();
    commit(sid, "click", "ok", 0);
    stop();
    start();
    const json s = get("/api/sessions/" + sid);
    EXPECT_EQ(s.at("steps").size(), 1u);
    commit(sid, "click", "doc_item", 1);
    EXPECT_EQ(post("/api/sessions/" + sid + "/finalize", json::object(), 201).at("report_id"), 1);
}

TEST_F(ServiceTest, ErrorEnvelopes) {
    EXPECT_EQ(get("/api/blobs/" + std::string(64, 'a'), 404).at("error").at("code"), "not_found");
    EXPECT_EQ(get("/api/blobs/nothex", 404).at("error").at("code"), "not_found");
    EXPECT_EQ(get("/api/sessions/6f1e7a40-0000-4000-8000-000000000000/actions", 404).at("error").at("code"), "not_found");
    EXPECT_EQ(get("/api/apps/docviewer/reports/7", 404).at("error").at("code"), "not_found");
    EXPECT_EQ(get("/api/apps/docviewer/reports/x", 400).at("error").at("code"), "validation");
    EXPECT_EQ(get("/api/nothing", 404).at("error").at("code"), "not_found");
    EXPECT_EQ(post("/api/apps/unknown/sessions", {{"reporter_name", "a"}, {"device", "b"}, {"title", "c"}, {"description", ""}}, 404)
                  .at("error")
                  .at("code"),
              "not_found");
    EXPECT_EQ(post("/api/apps/docviewer/sessions", {{"reporter_name", "a"}}, 400).at("error").at("code"), "validation");
    EXPECT_EQ(post("/api/apps/docviewer/sessions", {{"reporter_name", ""}, {"device", "b"}, {"title", "c"}, {"description", ""}}, 400)
                  .at("error")
                  .at("code"),
              "validation");

    auto res = client->Post("/api/apps/docviewer/sessions", "{oops", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    EXPECT_EQ(json::parse(res->body).at("error").at("code"), "validation");

    const std::string sid = open_session();
    EXPECT_EQ(get("/api/sessions/" + sid + "/components", 400).at("error").at("code"), "validation");
    EXPECT_EQ(get("/api/sessions/" + sid + "/components?action=pinch", 400).at("error").at("code"), "validation");
    EXPECT_EQ(get("/api/sessions/" + sid + "/confirmations?component=page_number", 409).at("error").at("code"), "conflict");
    EXPECT_EQ(post("/api/sessions/" + sid + "/finalize", json::object(), 400).at("error").at("code"), "validation");
}

TEST_F(ServiceTest, MessagesNeverLeakStorePaths) {
    const std::string root = tmp.path().string();
    const auto wrapped = to_api_error(std::make_exception_ptr(Error("cannot open " + root + "/docviewer/x.json")), tmp.path());
    EXPECT_EQ(wrapped.message.find(root), std::string::npos);
    EXPECT_NE(wrapped.message.find("<store>"), std::string::npos);
    const auto fs_error = to_api_error(std::make_exception_ptr(std::filesystem::filesystem_error(
        "boom", tmp.path() / "a", std::make_error_code(std::errc::permission_denied))));
    EXPECT_EQ(fs_error.message.find(root), std::string::npos);
    EXPECT_EQ(fs_error.code, ErrorCode::internal);

    // A corrupt document surfaces as an integrity error without its location.
    std::ofstream(tmp.path() / "docviewer" / "graph.json") << "{ broken";
    const json err = get("/api/apps/docviewer/reports/1/html", 404);
    EXPECT_EQ(err.dump().find(root), std::string::npos);
    const json open = post("/api/apps/docviewer/sessions",
                           {{"reporter_name", "a"}, {"device", "b"}, {"title", "c"}, {"description", ""}}, 500);
    EXPECT_EQ(open.at("error").at("code"), "integrity");
    EXPECT_EQ(open.dump().find(root), std::string::npos);
}

TEST(ApiErrors, StatusMapping) {
    EXPECT_EQ(http_status(ErrorCode::not_found), 404);
    EXPECT_EQ(http_status(ErrorCode::validation), 400);
    EXPECT_EQ(http_status(ErrorCode::conflict), 409);
    EXPECT_EQ(http_status(ErrorCode::integrity), 500);
    EXPECT_EQ(http_status(ErrorCode::internal), 500);
    EXPECT_EQ(to_api_error(std::make_exception_ptr(GapError({2, 4}))).detail.at("manual_steps"), json::array({2, 4}));
}
