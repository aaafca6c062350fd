#include "support.hpp"

#include <stdlib.h>

#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fusion::testing {

namespace fs = std::filesystem;

fs::path fixture_dir() { return FUSION_FIXTURE_DIR; }
fs::path docviewer_bundle() { return fixture_dir() / "docviewer" / "bundle"; }
fs::path docviewer_model() { return fixture_dir() / "docviewer" / "model.json"; }
fs::path golden_dir() { return FUSION_GOLDEN_DIR; }

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "fusion-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string Analyzed::key(const std::string& screen_id) const {
    const ScreenSpec* s = model.screen(screen_id);
    if (!s) throw std::out_of_range("no screen " + screen_id);
    return fingerprint(*s);
}

std::unique_ptr<Analyzed> analyze(ComponentUniverse universe, AppModel model, const ExploreConfig& config) {
    auto a = std::make_unique<Analyzed>();
    a->universe = std::move(universe);
    a->model = std::move(model);
    SimulatedDevice device(a->model);
    a->graph = explore(device, a->universe, a->blobs, config);
    return a;
}

std::unique_ptr<Analyzed> analyze_docviewer() {
    return analyze(extract_components(parse_app_bundle(docviewer_bundle())), load_app_model(docviewer_model()));
}

ReporterMetadata sample_metadata() {
    ReporterMetadata m;
    m.reporter_name = "Ann Reporter";
    m.device = "Nexus 5, Android 6.0";
    m.orientation = Orientation::portrait;
    m.title = "Go To Page needs two entries";
    m.description = "Typing a page number into the Go To Page dialog only works on the second try.";
    return m;
}

AutoResolution resolve(const EventFlowGraph& graph, const std::string& screen_key, const InstanceRef& ref) {
    const Screen* s = graph.screen(screen_key);
    if (!s) throw std::out_of_range("unknown screen " + screen_key);
    const ComponentInstance* inst = s->find(ref);
    if (!inst) throw std::out_of_range("unknown instance " + ref.component_id);
    return {screen_key, ref, {inst->highlighted_screenshot, "image/png"}};
}

Session docviewer_session(const AutoCompleter& ac, const Analyzed& a, const std::string& session_id) {
    Session s = ac.open_session(session_id.empty() ? "00000000-0000-4000-8000-000000000001" : session_id,
                                sample_metadata(), "2026-01-01T00:00:00Z");
    ac.commit_step(s, Action::click(), resolve(a.graph, a.key("main"), {"ok", 0}));
    ac.commit_step(s, Action::click(), resolve(a.graph, a.key("document_list"), {"doc_item", 0}));
    ac.commit_step(s, Action::click(), resolve(a.graph, a.key("document"), {"goto_page", 0}),
                   "The dialog opens with an empty field.");
    ac.commit_step(s, Action::type("5"), resolve(a.graph, a.key("goto_dialog"), {"page_number", 0}),
                   "Nothing happens the first time.");
    return s;
}

// ---------------------------------------------------------------------------

AppModel random_model(std::mt19937_64& rng, const RandomModelOptions& options) {
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    AppModel m;
    m.app_id = "gen";
    m.viewport = {1200, 1920};
    m.screenshot_downsample = options.downsample;
    const int n = uniform(1, options.max_screens);

    std::vector<int> parent(n, -1);
    std::vector<std::vector<int>> children(n);
    for (int i = 1; i < n; ++i) {
        parent[i] = uniform(0, i - 1);
        children[parent[i]].push_back(i);
    }
    const int extra_budget = (options.max_components - (n - 1)) / n;

    for (int i = 0; i < n; ++i) {
        ScreenSpec s;
        s.screen_id = "s" + std::to_string(i);
        s.activity = "com.example.gen.Activity" + std::to_string(uniform(0, 3));
        s.window = "w" + std::to_string(i);

        std::vector<ComponentSpec> comps;
        auto add = [&](std::string id, int idx, std::string type, ActionSet actions) {
            ComponentSpec c;
            c.component_id = std::move(id);
            c.object_index = idx;
            c.component_type = std::move(type);
            c.text = c.component_id + (idx ? "#" + std::to_string(idx) : "");
            c.supported_actions = std::move(actions);
            c.editable = c.supported_actions.contains(ActionKind::type);
            comps.push_back(std::move(c));
        };
        for (int child : children[i]) add("go_s" + std::to_string(child), 0, "Button", {ActionKind::click});
        const int extras = uniform(0, std::max(0, extra_budget));
        int rows = 0;
        for (int e = 0; e < extras; ++e) {
            switch (uniform(0, 4)) {
                case 0: add("button_" + std::to_string(e), 0, "Button", {ActionKind::click}); break;
                case 1: add("label_" + std::to_string(e), 0, "TextView", {}); break;
                case 2: add("field_" + std::to_string(e), 0, "EditText", {ActionKind::type}); break;
                case 3: add("list_" + std::to_string(e), 0, "ListView", {ActionKind::swipe}); break;
                default: add("row", rows++, "TextView", {ActionKind::click, ActionKind::long_click}); break;
            }
        }
        if (comps.empty()) add("label_0", 0, "TextView", {});
        // Shuffle so tree links are not always first on screen; rows keep their relative order.
        std::shuffle(comps.begin(), comps.end(), rng);
        int next_row = 0;
        for (auto& c : comps)
            if (c.component_id == "row") c.object_index = next_row++;

        const int slot = 1800 / static_cast<int>(comps.size());
        for (std::size_t k = 0; k < comps.size(); ++k) {
            const int left = uniform(0, 900);
            const int right = uniform(left + 20, 1200);
            const int top = 100 + static_cast<int>(k) * slot;
            comps[k].bounds = {left, top, right, top + std::max(1, slot - uniform(0, slot / 2))};
        }
        s.components = std::move(comps);
        m.screens.push_back(std::move(s));
    }

    auto activity = [&](const std::string& id) { return m.screen(id)->activity; };
    for (int i = 0; i < n; ++i) {
        const ScreenSpec& s = m.screens[i];
        for (const auto& c : s.components) {
            if (!c.supported_actions.contains(ActionKind::click)) continue;
            TransitionKey key{s.screen_id, ActionKind::click, c.ref()};
            TransitionSpec t;
            if (c.component_id.rfind("go_", 0) == 0) {
                t.target = c.component_id.substr(3);
            } else {
                const int roll = uniform(0, 9);
                if (roll < 2) continue;  // stays
                if (roll == 2) t.target = std::string(kExternalTarget);
                else if (roll == 3) t.target = std::string(kHomeTarget);
                else if (roll == 4) t.target = s.screen_id;
                else t.target = "s" + std::to_string(uniform(0, n - 1));
            }
            if (t.target == kExternalTarget) t.new_activity = true;
            else if (t.target != kHomeTarget) t.new_activity = activity(t.target) != s.activity;
            m.transitions.emplace(std::move(key), std::move(t));
        }
        if (i > 0 && chance(0.7)) m.back_edges[s.screen_id] = "s" + std::to_string(parent[i]);
        else if (chance(0.5)) m.back_edges[s.screen_id] = std::string(kHomeTarget);
    }
    m.entry_screen = "s0";
    m.validate();
    return m;
}

ComponentUniverse universe_for(const AppModel& model) {
    ComponentUniverse u;
    u.app_id = model.app_id;
    for (const auto& s : model.screens) {
        for (const auto& c : s.components) {
            auto& d = u.descriptors[c.component_id];
            d.component_id = c.component_id;
            d.component_type = c.component_type;
            d.declared_actions.insert(c.supported_actions.begin(), c.supported_actions.end());
            d.activities.insert(s.activity);
            d.source_classes.insert(s.activity);
            u.type_set.insert(c.component_type);
        }
    }
    return u;
}

OracleGraph bfs_oracle(const AppModel& model) {
    std::map<std::string, std::string> key_of;
    for (const auto& s : model.screens) key_of[s.screen_id] = fingerprint(s);

    OracleGraph out;
    std::set<std::string> seen{model.entry_screen};
    std::deque<std::string> queue{model.entry_screen};
    while (!queue.empty()) {
        const std::string id = queue.front();
        queue.pop_front();
        out.screens.insert(key_of.at(id));
        for (const auto& c : model.screen(id)->components) {
            if (!c.supported_actions.contains(ActionKind::click)) continue;
            std::string target = id;
            auto t = model.transitions.find({id, ActionKind::click, c.ref()});
            if (t != model.transitions.end()) target = t->second.target;
            const bool in_app = target != kExternalTarget && target != kHomeTarget;
            out.edges.emplace(key_of.at(id), c.component_id, c.object_index, in_app ? key_of.at(target) : target);
            if (in_app && seen.insert(target).second) queue.push_back(target);
        }
    }
    return out;
}

OracleGraph as_oracle(const EventFlowGraph& graph) {
    OracleGraph out;
    for (const auto& s : graph.screens) out.screens.insert(s.screen_key);
    for (const auto& e : graph.edges)
        if (e.action == ActionKind::click)
            out.edges.emplace(e.source, e.instance.component_id, e.instance.object_index, e.target);
    return out;
}

}  // namespace fusion::testing
