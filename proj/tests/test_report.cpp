#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>

#include "fusion/errors.hpp"
#include "fusion/report.hpp"
#include "support.hpp"

using namespace fusion;
using namespace fusion::testing;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = haystack.find(needle); at != std::string::npos; at = haystack.find(needle, at + 1)) ++n;
    return n;
}

void check_golden(const std::string& name, const std::string& actual) {
    const fs::path path = golden_dir() / name;
    if (std::getenv("FUSION_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << actual;
        return;
    }
    ASSERT_TRUE(fs::exists(path)) << "missing golden file " << name << "; rerun with FUSION_UPDATE_GOLDEN=1";
    EXPECT_EQ(actual, read_file(path)) << "render differs from " << name;
}

class ReportTest : public ::testing::Test {
protected:
    void SetUp() override {
        a = analyze_docviewer();
        ac = std::make_unique<AutoCompleter>(a->universe, a->graph);
        report = build_report(docviewer_session(*ac, *a), 1, "2026-01-01T00:00:00Z");
    }

    BugReport with_manual_step(int at) const {
        Session s = ac->open_session("00000000-0000-4000-8000-000000000002", sample_metadata(), "t");
        for (int i = 1; i <= 3; ++i) {
            if (i == at) {
                ac->commit_step(s, Action::click(),
                                ManualResolution{"Button", "Open Document", RelativeLocation::top_center},
                                "The button was not offered.");
            } else {
                ac->commit_step(s, Action::click(), resolve(a->graph, a->graph.entry, {"more_options", 0}));
            }
        }
        return build_report(s, 2, "2026-01-01T00:00:00Z");
    }

    std::unique_ptr<Analyzed> a;
    std::unique_ptr<AutoCompleter> ac;
    BugReport report;
};

}  // namespace

TEST_F(ReportTest, BuildAlignsScreenshots) {
    EXPECT_TRUE(report.gap_free);
    ASSERT_EQ(report.full_screenshots.size(), 4u);
    EXPECT_EQ(report.full_screenshots[2]->hash,
              a->graph.screen(a->key("document"))->find({"goto_page", 0})->highlighted_screenshot);
    EXPECT_EQ(report.metadata, sample_metadata());

    const BugReport gap = with_manual_step(2);
    EXPECT_FALSE(gap.gap_free);
    EXPECT_FALSE(gap.full_screenshots[1].has_value());
    EXPECT_EQ(gap.manual_steps(), std::vector<int>{2});
}

TEST_F(ReportTest, HtmlHasThreeSectionsAndFullRows) {
    const std::string html = render_html(report, a->universe, a->graph, a->blobs);
    EXPECT_EQ(count(html, "<section id=\"preliminary\">"), 1u);
    EXPECT_EQ(count(html, "<section id=\"steps\">"), 1u);
    EXPECT_EQ(count(html, "<section id=\"screenshots\">"), 1u);
    EXPECT_LT(html.find("id=\"preliminary\""), html.find("id=\"steps\""));
    EXPECT_LT(html.find("id=\"steps\""), html.find("id=\"screenshots\""));
    EXPECT_NE(html.find("Go To Page needs two entries"), std::string::npos);
    EXPECT_NE(html.find("Nexus 5, Android 6.0"), std::string::npos);
    EXPECT_NE(html.find("only works on the second try"), std::string::npos);

    const std::regex row(R"re(<tr class="step" data-step="(\d)"><td>\d</td><td class="action">([^<]+)</td><td class="type">([^<]+)</td><td class="location">([^<]+)</td><td class="source"><code>([^<]+)</code></td><td class="component"><img src="/api/blobs/([0-9a-f]{64})")re");
    std::vector<std::smatch> rows;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), row); it != std::sregex_iterator(); ++it) rows.push_back(*it);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][2], "click");
    EXPECT_EQ(rows[0][3], "Button &quot;OK&quot;");
    EXPECT_EQ(rows[0][4], "Center");
    EXPECT_EQ(rows[0][5], "com.example.docviewer.MainActivity");
    EXPECT_EQ(rows[1][3], "TextView &quot;Report.pdf&quot; (Option #1)");
    EXPECT_EQ(rows[1][5], "com.example.docviewer.DocumentListAdapter");
    EXPECT_EQ(rows[2][4], "Bottom Left");
    EXPECT_EQ(rows[3][2], "type &ldquo;5&rdquo;");
    EXPECT_EQ(rows[3][5], "com.example.docviewer.GoToPageDialog");
    for (const auto& r : rows) EXPECT_TRUE(a->blobs.has_blob(r[6].str()));

    EXPECT_EQ(count(html, "<li class=\"shot\""), report.steps.size());
    EXPECT_NE(html.find("Nothing happens the first time."), std::string::npos);
}

TEST_F(ReportTest, InlineImagesEmbedPngData) {
    RenderOptions opts;
    opts.images = RenderOptions::Images::inline_data;
    const std::string html = render_html(report, a->universe, a->graph, a->blobs, opts);
    EXPECT_EQ(count(html, "src=\"data:image/png;base64,iVBORw0KGgo"), 8u);
    EXPECT_EQ(count(html, "/api/blobs/"), 0u);
}

TEST_F(ReportTest, ManualStepsAreMarked) {
    const BugReport gap = with_manual_step(2);
    const std::string html = render_html(gap, a->universe, a->graph, a->blobs);
    EXPECT_EQ(count(html, "not verified against app model"), 1u);
    EXPECT_NE(html.find("Button &quot;Open Document&quot;"), std::string::npos);
    EXPECT_NE(html.find("<td class=\"location\">Top Center</td><td class=\"source\"><code>unknown</code>"),
              std::string::npos);
    EXPECT_EQ(count(html, "<li class=\"shot\""), 3u);
    EXPECT_EQ(count(html, "no screenshot"), 1u);
    const std::string text = render_text(gap, a->universe, a->graph, a->blobs);
    EXPECT_NE(text.find("NOT VERIFIED AGAINST APP MODEL"), std::string::npos);
}

TEST_F(ReportTest, HtmlEscapesReporterText) {
    report.metadata.title = "<script>alert(1)</script> & more";
    const std::string html = render_html(report, a->universe, a->graph, a->blobs);
    EXPECT_EQ(html.find("<script>"), std::string::npos);
    EXPECT_NE(html.find("&lt;script&gt;alert(1)&lt;/script&gt; &amp; more"), std::string::npos);
}

TEST_F(ReportTest, MissingBlobIsIntegrityError) {
    MemoryBlobStore empty;
    EXPECT_THROW(render_html(report, a->universe, a->graph, empty), IntegrityError);
    EXPECT_THROW(render_text(report, a->universe, a->graph, empty), IntegrityError);
}

TEST_F(ReportTest, GoldenHtml) { check_golden("docviewer_report.html", render_html(report, a->universe, a->graph, a->blobs)); }

TEST_F(ReportTest, GoldenText) { check_golden("docviewer_report.txt", render_text(report, a->universe, a->graph, a->blobs)); }

TEST_F(ReportTest, ReplayScriptFromGapFreeReport) {
    const ReplayScript script = to_replay_script(report, &a->graph);
    ASSERT_EQ(script.entries.size(), 4u);
    EXPECT_EQ(script.app_id, "docviewer");
    EXPECT_EQ(script.entries[0].screen_key, a->key("main"));
    EXPECT_EQ(script.entries[1].instance, (InstanceRef{"doc_item", 0}));
    EXPECT_EQ(script.entries[3].action, Action::type("5"));
    EXPECT_FALSE(script.expected_final.has_value());

    SimulatedDevice device(a->model);
    const ReplayResult res = replay(script, device);
    EXPECT_TRUE(res.success);
    EXPECT_EQ(res.final_state, a->key("goto_dialog"));
}

TEST_F(ReportTest, GapReportsRejectedWithManualSteps) {
    try {
        to_replay_script(with_manual_step(3));
        FAIL() << "expected GapError";
    } catch (const GapError& e) {
        EXPECT_EQ(e.manual_steps(), std::vector<int>{3});
    }
}

TEST_F(ReportTest, ReplayDivergesOnMutatedModel) {
    const ReplayScript script = to_replay_script(report, &a->graph);
    AppModel mutated = a->model;
    mutated.transitions.at({"document", ActionKind::click, {"goto_page", 0}}).target = "document_list";
    mutated.transitions.at({"document", ActionKind::click, {"goto_page", 0}}).new_activity = true;
    SimulatedDevice device(mutated);
    const ReplayResult res = replay(script, device);
    EXPECT_FALSE(res.success);
    EXPECT_EQ(res.step_num, 4);
    EXPECT_EQ(res.expected, a->key("goto_dialog"));
    EXPECT_EQ(res.observed, a->key("document_list"));
}

TEST_F(ReportTest, ReplayHandlesLeavingTheApp) {
    Session s = ac->open_session("x", sample_metadata(), "t");
    ac->commit_step(s, Action::click(), resolve(a->graph, a->key("main"), {"help_link", 0}));
    ac->commit_step(s, Action::click(), resolve(a->graph, a->key("main"), {"ok", 0}));
    ac->commit_step(s, Action::click(), resolve(a->graph, a->key("document_list"), {"doc_item", 2}));
    ac->commit_step(s, Action::click(), resolve(a->graph, a->key("document"), {"rotate_button", 0}));
    ac->commit_step(s, Action::click(), resolve(a->graph, a->key("main"), {"more_options", 0}));
    const ReplayScript script = to_replay_script(build_report(s, 1, "t"), &a->graph);
    EXPECT_EQ(script.expected_final, a->key("main_menu"));
    SimulatedDevice device(a->model);
    const ReplayResult res = replay(script, device);
    EXPECT_TRUE(res.success) << res.step_num << " " << res.observed;
    EXPECT_EQ(res.final_state, a->key("main_menu"));
}

TEST_F(ReportTest, ReplayRejectsOtherApps) {
    ReplayScript script = to_replay_script(report, &a->graph);
    script.app_id = "other";
    SimulatedDevice device(a->model);
    EXPECT_THROW(replay(script, device), ValidationError);
    script.entries.clear();
    EXPECT_THROW(replay(script, device), ValidationError);
}
