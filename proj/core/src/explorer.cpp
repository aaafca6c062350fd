#include "fusion/explorer.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

namespace fusion {

const ComponentInstance* Screen::find(const InstanceRef& ref) const {
    for (const auto& inst : instances)
        if (inst.component_id == ref.component_id && inst.object_index == ref.object_index) return &inst;
    return nullptr;
}

const Screen* EventFlowGraph::screen(std::string_view key) const {
    for (const auto& s : screens)
        if (s.screen_key == key) return &s;
    return nullptr;
}

std::vector<const Edge*> EventFlowGraph::edges_from(std::string_view source) const {
    std::vector<const Edge*> out;
    for (const auto& e : edges)
        if (e.source == source) out.push_back(&e);
    return out;
}

std::vector<const Edge*> EventFlowGraph::edges_from(std::string_view source, ActionKind action,
                                                    const InstanceRef& instance) const {
    std::vector<const Edge*> out;
    for (const auto& e : edges)
        if (e.source == source && e.action == action && e.instance == instance) out.push_back(&e);
    return out;
}

std::vector<std::size_t> EventFlowGraph::discovery_path(std::string_view key) const {
    std::vector<std::size_t> path;
    const Screen* s = screen(key);
    if (!s) throw ValidationError("screen " + std::string(key) + " is not in the graph");
    while (s->screen_key != entry) {
        if (!s->discovered_by || *s->discovered_by >= trace.size() || path.size() > trace.size())
            throw ValidationError("no recorded path to screen " + std::string(key));
        path.push_back(*s->discovered_by);
        s = screen(trace[*s->discovered_by].pre_screen);
        if (!s) throw ValidationError("broken discovery path to screen " + std::string(key));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::string> EventFlowGraph::blob_hashes() const {
    std::set<std::string> hashes;
    for (const auto& s : screens) {
        hashes.insert(s.full_screenshot);
        for (const auto& i : s.instances) {
            hashes.insert(i.component_screenshot);
            hashes.insert(i.highlighted_screenshot);
        }
    }
    for (const auto& t : trace) {
        hashes.insert(t.pre_screenshot);
        hashes.insert(t.post_screenshot);
        hashes.insert(t.highlighted_screenshot);
    }
    hashes.erase("");
    return {hashes.begin(), hashes.end()};
}

ExplorationError::ExplorationError(const std::string& what, std::shared_ptr<const EventFlowGraph> partial)
    : Error("exploration failed: " + what), partial_(std::move(partial)) {}

std::string fingerprint(const ScreenSpec& screen) {
    std::vector<std::tuple<std::string, int, std::string>> triples;
    triples.reserve(screen.components.size());
    for (const auto& c : screen.components) triples.emplace_back(c.component_id, c.object_index, c.component_type);
    std::sort(triples.begin(), triples.end());
    nlohmann::json canonical = nlohmann::json::array({screen.activity, screen.window, nlohmann::json::array()});
    for (const auto& [id, idx, type] : triples) canonical[2].push_back({id, idx, type});
    return sha256_hex(canonical.dump()).substr(0, 16);
}

std::string observed_key(const Observation& observation) {
    switch (observation.state) {
        case DeviceState::external: return std::string(kExternalTarget);
        case DeviceState::home: return std::string(kHomeTarget);
        case DeviceState::foreground: break;
    }
    return fingerprint(*observation.screen);
}

namespace {

// Thrown internally when a configured bound stops the traversal.
struct BoundReached {};

std::vector<std::uint8_t> placeholder_png(std::string_view label) {
    Image img(120, 192, Rgb{97, 97, 97});
    img.text(8, 90, label, 3, Rgb{255, 255, 255});
    return encode_png(img);
}

class Explorer {
public:
    Explorer(DeviceDriver& driver, const ComponentUniverse& universe, BlobStore& blobs, const ExploreConfig& config)
        : driver_(driver), universe_(universe), blobs_(blobs), config_(config) {}

    EventFlowGraph run() {
        graph_.app_id = driver_.app_id();
        try {
            traverse();
        } catch (const BoundReached&) {
            graph_.truncated = true;
        } catch (const ReplayDivergenceError& e) {
            throw ExplorationError(e.what(), std::make_shared<EventFlowGraph>(graph_));
        } catch (const Error& e) {
            throw ExplorationError(e.what(), std::make_shared<EventFlowGraph>(graph_));
        }
        return std::move(graph_);
    }

private:
    void traverse() {
        relaunch();
        graph_.entry = current_;
        std::vector<std::string> stack{current_};
        while (!stack.empty()) {
            const std::string s = stack.back();
            auto target = next_unexplored(s);
            if (!target) {
                stack.pop_back();
                continue;
            }
            const std::size_t before = graph_.screens.size();
            if (current_ != s && !navigate_to(s)) {
                // No replayable path leads back here.
                explored_all(s);
                continue;
            }
            step(s, *target, false);
            explored_.emplace(s, *target);
            for (std::size_t i = before; i < graph_.screens.size(); ++i) stack.push_back(graph_.screens[i].screen_key);
        }
    }

    std::optional<InstanceRef> next_unexplored(const std::string& key) const {
        for (const auto& inst : graph_.screen(key)->instances)
            if (inst.supported_actions.contains(ActionKind::click) && !explored_.contains({key, inst.ref()}))
                return inst.ref();
        return std::nullopt;
    }

    void explored_all(const std::string& key) {
        for (const auto& inst : graph_.screen(key)->instances) explored_.emplace(key, inst.ref());
    }

    void relaunch() {
        if (relaunches_ >= config_.max_relaunches) throw BoundReached{};
        ++relaunches_;
        driver_.relaunch_app();
        cold_ = true;
        current_ = observe_and_register(nullptr);
    }

    bool navigate_to(const std::string& key) {
        std::vector<std::size_t> path;
        try {
            path = graph_.discovery_path(key);
        } catch (const ValidationError&) {
            return false;
        }
        relaunch();
        for (std::size_t i = 0; i < path.size(); ++i) {
            const TraceStep recorded = graph_.trace[path[i]];
            if (current_ != recorded.pre_screen)
                throw ReplayDivergenceError(i, "expected screen " + recorded.pre_screen + ", observed " + current_);
            step(recorded.pre_screen, recorded.instance, true);
            if (current_ != recorded.post_screen)
                throw ReplayDivergenceError(i + 1, "expected screen " + recorded.post_screen + ", observed " + current_);
        }
        return current_ == key;
    }

    // Observes the device; registers a newly seen screen and returns its key.
    std::string observe_and_register(const std::optional<std::size_t>* discovered_by) {
        const Observation obs = driver_.observe();
        if (obs.state != DeviceState::foreground) return observed_key(obs);
        const ScreenSpec& spec = *obs.screen;
        std::string key = fingerprint(spec);
        if (graph_.screen(key)) return key;

        Screen screen;
        screen.screen_key = key;
        screen.activity = spec.activity;
        screen.window = spec.window;
        if (discovered_by) screen.discovered_by = *discovered_by;
        screen.full_screenshot = put(driver_.screenshot(ScreenshotRequest::full()));
        const Viewport viewport = driver_.viewport();
        for (const auto& c : spec.components) {
            ComponentInstance inst;
            inst.component_id = c.component_id;
            inst.object_index = c.object_index;
            inst.component_type = c.component_type;
            inst.text = c.text;
            inst.bounds = c.bounds;
            inst.relative_location = region_of(c.bounds, viewport);
            inst.supported_actions = c.supported_actions;
            inst.component_screenshot = put(driver_.screenshot(ScreenshotRequest::component(c.ref())));
            inst.highlighted_screenshot = put(driver_.screenshot(ScreenshotRequest::highlighted(c.ref())));
            inst.screen_key = key;
            screen.instances.push_back(std::move(inst));
            note_component(c, spec.activity);
        }
        graph_.screens.push_back(std::move(screen));
        return key;
    }

    void note_component(const ComponentSpec& c, const std::string& activity) {
        if (universe_.find(c.component_id)) return;
        auto [it, inserted] = graph_.dynamic_components.try_emplace(c.component_id);
        ComponentDescriptor& d = it->second;
        if (inserted) {
            d.component_id = c.component_id;
            d.component_type = c.component_type;
            d.dynamic = true;
        }
        d.declared_actions.insert(c.supported_actions.begin(), c.supported_actions.end());
        d.activities.insert(activity);
    }

    void step(const std::string& source, const InstanceRef& target, bool resumption) {
        if (steps_ >= config_.max_steps) throw BoundReached{};
        ++steps_;
        const Screen* pre = graph_.screen(source);
        TraceStep ts;
        ts.index = graph_.trace.size();
        ts.pre_screen = source;
        ts.action = Action::click();
        ts.instance = target;
        ts.pre_screenshot = pre->full_screenshot;
        ts.highlighted_screenshot = pre->find(target)->highlighted_screenshot;
        ts.cold_start = cold_;
        ts.resumption = resumption;
        cold_ = false;

        const Outcome outcome = driver_.perform(ts.action, target);
        ts.outcome = outcome.kind;
        ts.new_activity = outcome.new_activity;
        bool relaunch_after = false;
        switch (outcome.kind) {
            case OutcomeKind::stayed:
            case OutcomeKind::moved: {
                const std::optional<std::size_t> by = ts.index;
                current_ = observe_and_register(&by);
                if (current_ == kExternalTarget || current_ == kHomeTarget)
                    throw DriverStateError("driver reported an in-app outcome but the app left the foreground");
                ts.post_screen = current_;
                ts.post_screenshot = graph_.screen(current_)->full_screenshot;
                break;
            }
            case OutcomeKind::external:
                ts.post_screen = std::string(kExternalTarget);
                ts.post_screenshot = placeholder(kExternalTarget);
                break;
            case OutcomeKind::home:
                ts.post_screen = std::string(kHomeTarget);
                ts.post_screenshot = placeholder(kHomeTarget);
                relaunch_after = true;
                break;
        }
        record(ts);

        if (outcome.kind == OutcomeKind::external) {
            // Stay inside the app under test.
            driver_.press_back();
            const std::optional<std::size_t> none;
            current_ = observe_and_register(&none);
            if (current_ == kExternalTarget) throw DriverStateError("back did not return from the external app");
            if (current_ == kHomeTarget) relaunch_after = true;
        }
        if (relaunch_after) relaunch();
    }

    void record(const TraceStep& ts) {
        auto existing = std::find_if(graph_.edges.begin(), graph_.edges.end(), [&](const Edge& e) {
            return e.source == ts.pre_screen && e.action == ts.action.kind && e.instance == ts.instance &&
                   e.target == ts.post_screen;
        });
        if (existing == graph_.edges.end())
            graph_.edges.push_back({ts.pre_screen, ts.action.kind, ts.instance, ts.post_screen, ts.new_activity, ts.index});
        graph_.trace.push_back(ts);
    }

    std::string put(const std::vector<std::uint8_t>& png) { return blobs_.put_blob(png).hash; }

    std::string placeholder(std::string_view label) {
        auto& cached = placeholders_[std::string(label)];
        if (cached.empty()) cached = put(placeholder_png(label));
        return cached;
    }

    DeviceDriver& driver_;
    const ComponentUniverse& universe_;
    BlobStore& blobs_;
    ExploreConfig config_;
    EventFlowGraph graph_;
    std::set<std::pair<std::string, InstanceRef>> explored_;
    std::map<std::string, std::string> placeholders_;
    std::string current_;
    std::size_t steps_ = 0;
    std::size_t relaunches_ = 0;
    bool cold_ = true;
};

}  // namespace

EventFlowGraph explore(DeviceDriver& driver, const ComponentUniverse& universe, BlobStore& blobs,
                       const ExploreConfig& config) {
    if (config.max_steps == 0 || config.max_relaunches == 0)
        throw ValidationError("exploration bounds must be positive");
    if (universe.app_id != driver.app_id())
        throw ValidationError("universe is for app '" + universe.app_id + "' but the device runs '" +
                              driver.app_id() + "'");
    return Explorer(driver, universe, blobs, config).run();
}

bool replay_path(DeviceDriver& driver, const EventFlowGraph& graph, std::string_view target) {
    const std::vector<std::size_t> path = graph.discovery_path(target);
    driver.relaunch_app();
    std::string key = observed_key(driver.observe());
    if (key != graph.entry) throw ReplayDivergenceError(0, "cold start shows " + key + ", expected " + graph.entry);
    for (std::size_t i = 0; i < path.size(); ++i) {
        const TraceStep& ts = graph.trace[path[i]];
        try {
            driver.perform(ts.action, ts.instance);
        } catch (const ValidationError& e) {
            throw ReplayDivergenceError(i + 1, e.what());
        }
        key = observed_key(driver.observe());
        if (key != ts.post_screen)
            throw ReplayDivergenceError(i + 1, "observed " + key + ", expected " + ts.post_screen);
    }
    return key == target;
}

}  // namespace fusion
