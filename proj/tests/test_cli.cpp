#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fusion/serialization.hpp"
#include "store_check.hpp"
#include "support.hpp"

using namespace fusion;
using namespace fusion::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int status = -1;
    std::string out;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

CliRun fusion_cli(const std::vector<std::string>& args) {
    std::string cmd = quote(FUSION_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void analyze_into_store() {
        const std::string s = store_dir().string();
        CliRun r = fusion_cli({"prime", "--bundle", docviewer_bundle().string(), "--store", s});
        ASSERT_EQ(r.status, 0) << r.out;
        EXPECT_NE(r.out.find("14 components, 7 types"), std::string::npos) << r.out;
        r = fusion_cli({"explore", "--bundle", docviewer_bundle().string(), "--model", docviewer_model().string(),
                        "--store", s});
        ASSERT_EQ(r.status, 0) << r.out;
        EXPECT_NE(r.out.find("5 screens, 11 edges"), std::string::npos) << r.out;
    }

    fs::path store_dir() const { return tmp.path() / "store"; }
    TempDir tmp;
};

}  // namespace

TEST_F(CliTest, PrimeExploreAndList) {
    analyze_into_store();
    const CliRun r = fusion_cli({"apps", "--store", store_dir().string(), "--json"});
    ASSERT_EQ(r.status, 0) << r.out;
    const auto apps = nlohmann::json::parse(r.out).at("apps");
    ASSERT_EQ(apps.size(), 1u);
    EXPECT_EQ(apps[0].at("app_id"), "docviewer");
    EXPECT_EQ(apps[0].at("edges"), 11);
}

TEST_F(CliTest, ExploredGraphMatchesInProcessAnalysis) {
    analyze_into_store();
    const auto a = analyze_docviewer();
    Store store(store_dir());
    const auto loaded = store.load_analysis("docviewer");
    EXPECT_EQ(nlohmann::json(loaded.graph), nlohmann::json(a->graph));
}

TEST_F(CliTest, MalformedInputsExitWithValidationCode) {
    const fs::path bundle = tmp.path() / "bad";
    fs::create_directories(bundle);
    std::ofstream(bundle / "bundle.json") << "{\"app_id\": 3}";
    CliRun r = fusion_cli({"prime", "--bundle", bundle.string(), "--store", store_dir().string()});
    EXPECT_EQ(r.status, 2) << r.out;
    EXPECT_NE(r.out.find("app_id"), std::string::npos) << r.out;

    r = fusion_cli({"prime", "--store", store_dir().string()});
    EXPECT_EQ(r.status, 2) << r.out;

    const fs::path model = tmp.path() / "model.json";
    std::ofstream(model) << "{\"app_id\": \"docviewer\", \"screens\": 7}";
    r = fusion_cli({"explore", "--bundle", docviewer_bundle().string(), "--model", model.string(), "--store",
                    store_dir().string()});
    EXPECT_EQ(r.status, 2) << r.out;
    EXPECT_NE(r.out.find("$.entry_screen"), std::string::npos) << r.out;
}

TEST_F(CliTest, RenderAndReplay) {
    analyze_into_store();
    const auto a = analyze_docviewer();
    Store store(store_dir());
    const BugReport report = populate_docviewer(store, *a, "00000000-0000-4000-8000-000000000009");
    const std::string id = std::to_string(report.report_id);
    const std::string s = store_dir().string();

    const fs::path html = tmp.path() / "r.html";
    CliRun r = fusion_cli({"render", "--store", s, "--app", "docviewer", "--report", id, "--out", html.string()});
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(read_file(html), render_html(report, a->universe, a->graph, a->blobs));

    r = fusion_cli({"render", "--store", s, "--app", "docviewer", "--report", id, "--format", "text"});
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_NE(r.out.find("2. STEPS TO REPRODUCE"), std::string::npos);

    r = fusion_cli({"render", "--store", s, "--app", "docviewer", "--report", "99"});
    EXPECT_EQ(r.status, 4) << r.out;

    r = fusion_cli({"replay", "--store", s, "--app", "docviewer", "--report", id, "--model",
                    docviewer_model().string()});
    EXPECT_EQ(r.status, 0) << r.out;

    AppModel mutated = a->model;
    mutated.transitions.at({"document", ActionKind::click, {"goto_page", 0}}).target = "document_list";
    const fs::path bad_model = tmp.path() / "mutated.json";
    std::ofstream(bad_model) << serialize_app_model(mutated);
    r = fusion_cli({"replay", "--store", s, "--app", "docviewer", "--report", id, "--model", bad_model.string()});
    EXPECT_EQ(r.status, 3) << r.out;
    EXPECT_NE(r.out.find("step 4"), std::string::npos) << r.out;
}

TEST_F(CliTest, ServeAnswersApiRequests) {
    analyze_into_store();
    int fds[2];
    ASSERT_EQ(pipe(fds), 0);
    const std::string store = store_dir().string();
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        dup2(fds[1], STDOUT_FILENO);
        close(fds[0]);
        close(fds[1]);
        execl(FUSION_CLI_PATH, "fusion", "serve", "--store", store.c_str(), "--addr", "127.0.0.1:0", nullptr);
        _exit(127);
    }
    close(fds[1]);
    std::string line;
    char c;
    while (read(fds[0], &c, 1) == 1 && c != '\n') line += c;
    close(fds[0]);
    const auto colon = line.rfind(':');
    ASSERT_NE(colon, std::string::npos) << line;
    httplib::Client client("127.0.0.1", std::stoi(line.substr(colon + 1)));
    auto res = client.Get("/api/apps");
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(nlohmann::json::parse(res->body).at("apps").at(0).at("app_id"), "docviewer");
    EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
}
