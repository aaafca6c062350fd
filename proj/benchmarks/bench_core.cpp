#include <benchmark/benchmark.h>

#include <random>

#include "fusion/autocomplete.hpp"
#include "fusion/blob.hpp"
#include "fusion/explorer.hpp"
#include "fusion/geometry.hpp"
#include "fusion/image.hpp"
#include "fusion/primer.hpp"
#include "fusion/report.hpp"

using namespace fusion;

namespace {

const std::filesystem::path kFixtures = FUSION_FIXTURE_DIR;

struct Docviewer {
    ComponentUniverse universe = extract_components(parse_app_bundle(kFixtures / "docviewer" / "bundle"));
    AppModel model = load_app_model(kFixtures / "docviewer" / "model.json");
    MemoryBlobStore blobs;
    EventFlowGraph graph;

    Docviewer() {
        SimulatedDevice device(model);
        graph = explore(device, universe, blobs);
    }
};

const Docviewer& docviewer() {
    static const Docviewer d;
    return d;
}

AutoResolution resolve(const EventFlowGraph& g, const std::string& key, const InstanceRef& ref) {
    return {key, ref, {g.screen(key)->find(ref)->highlighted_screenshot, "image/png"}};
}

std::string key_of(const Docviewer& d, const char* id) { return fingerprint(*d.model.screen(id)); }

}  // namespace

static void BM_Fingerprint(benchmark::State& state) {
    const ScreenSpec& screen = *docviewer().model.screen("document_list");
    for (auto _ : state) benchmark::DoNotOptimize(fingerprint(screen));
}
BENCHMARK(BM_Fingerprint);

static void BM_RegionOf(benchmark::State& state) {
    std::mt19937 rng(1);
    std::vector<Rect> rects;
    for (int i = 0; i < 1024; ++i) {
        const int l = static_cast<int>(rng() % 1000), t = static_cast<int>(rng() % 1700);
        rects.push_back({l, t, l + 1 + static_cast<int>(rng() % 200), t + 1 + static_cast<int>(rng() % 200)});
    }
    const Viewport v{1200, 1920};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(region_of(rects[i++ & 1023], v));
}
BENCHMARK(BM_RegionOf);

static void BM_Sha256(benchmark::State& state) {
    const std::string data(static_cast<std::size_t>(state.range(0)), 'x');
    for (auto _ : state) benchmark::DoNotOptimize(sha256_hex(data));
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Range(1 << 10, 1 << 20);

static void BM_RenderAndEncodeScreen(benchmark::State& state) {
    const Docviewer& d = docviewer();
    const ScreenSpec& screen = *d.model.screen("main");
    const int downsample = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(encode_png(render_screen(screen, d.model.viewport, nullptr, downsample)));
}
BENCHMARK(BM_RenderAndEncodeScreen)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_ExploreDocviewer(benchmark::State& state) {
    const Docviewer& d = docviewer();
    AppModel model = d.model;
    model.screenshot_downsample = 4;
    for (auto _ : state) {
        SimulatedDevice device(model);
        MemoryBlobStore blobs;
        benchmark::DoNotOptimize(explore(device, d.universe, blobs));
    }
}
BENCHMARK(BM_ExploreDocviewer)->Unit(benchmark::kMillisecond);

static void BM_SuggestComponents(benchmark::State& state) {
    const Docviewer& d = docviewer();
    const AutoCompleter ac(d.universe, d.graph);
    Session s = ac.open_session("bench", {"a", "b", Orientation::portrait, "c", ""}, "t");
    ac.commit_step(s, Action::click(), ManualResolution{"Button", "", RelativeLocation::center});
    for (auto _ : state) benchmark::DoNotOptimize(ac.suggest_components(s, ActionKind::click));
}
BENCHMARK(BM_SuggestComponents);

static void BM_RenderReportHtml(benchmark::State& state) {
    const Docviewer& d = docviewer();
    const AutoCompleter ac(d.universe, d.graph);
    Session s = ac.open_session("bench", {"a", "b", Orientation::portrait, "c", ""}, "t");
    ac.commit_step(s, Action::click(), resolve(d.graph, key_of(d, "main"), {"ok", 0}));
    ac.commit_step(s, Action::click(), resolve(d.graph, key_of(d, "document_list"), {"doc_item", 0}));
    ac.commit_step(s, Action::click(), resolve(d.graph, key_of(d, "document"), {"goto_page", 0}));
    ac.commit_step(s, Action::type("5"), resolve(d.graph, key_of(d, "goto_dialog"), {"page_number", 0}));
    const BugReport report = build_report(s, 1, "t");
    for (auto _ : state) benchmark::DoNotOptimize(render_html(report, d.universe, d.graph, d.blobs));
}
BENCHMARK(BM_RenderReportHtml);

BENCHMARK_MAIN();
