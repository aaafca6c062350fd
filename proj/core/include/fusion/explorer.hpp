#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fusion/action.hpp"
#include "fusion/blob.hpp"
#include "fusion/device.hpp"
#include "fusion/errors.hpp"
#include "fusion/geometry.hpp"
#include "fusion/primer.hpp"

namespace fusion {

/// A runtime occurrence of a component on a fingerprinted screen.
struct ComponentInstance {
    std::string component_id;
    int object_index = 0;
    std::string component_type;
    std::string text;
    Rect bounds;
    RelativeLocation relative_location = RelativeLocation::center;
    ActionSet supported_actions;       // as observed on the device
    std::string component_screenshot;  // blob hash of the cropped component
    std::string highlighted_screenshot;  // blob hash of the full screen with this instance marked
    std::string screen_key;

    InstanceRef ref() const { return {component_id, object_index}; }
    friend bool operator==(const ComponentInstance&, const ComponentInstance&) = default;
};

struct Screen {
    std::string screen_key;
    std::string activity;
    std::string window;
    std::vector<ComponentInstance> instances;  // on-screen order
    std::string full_screenshot;
    /// Trace step that first reached this screen; empty for the entry screen.
    std::optional<std::size_t> discovered_by;

    const ComponentInstance* find(const InstanceRef& ref) const;
    friend bool operator==(const Screen&, const Screen&) = default;
};

struct TraceStep {
    std::size_t index = 0;
    std::string pre_screen;
    Action action;
    InstanceRef instance;
    OutcomeKind outcome = OutcomeKind::stayed;
    /// Screen key reached, or kExternalTarget / kHomeTarget.
    std::string post_screen;
    bool new_activity = false;
    std::string pre_screenshot;
    std::string post_screenshot;
    std::string highlighted_screenshot;
    /// The app was (re)launched right before this step.
    bool cold_start = false;
    /// Step re-drives a known path to resume DFS rather than explore.
    bool resumption = false;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct Edge {
    std::string source;
    ActionKind action = ActionKind::click;
    InstanceRef instance;
    std::string target;  // screen key, kExternalTarget or kHomeTarget
    bool new_activity = false;
    std::size_t witness = 0;  // first trace step that produced this edge

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Screens and action-labelled transitions discovered on the device.
struct EventFlowGraph {
    std::string app_id;
    std::string entry;
    std::vector<Screen> screens;  // insertion order
    std::vector<Edge> edges;
    std::vector<TraceStep> trace;
    /// Descriptors for components seen at runtime but absent from the universe.
    std::map<std::string, ComponentDescriptor> dynamic_components;
    bool truncated = false;

    const Screen* screen(std::string_view key) const;
    std::vector<const Edge*> edges_from(std::string_view source) const;
    std::vector<const Edge*> edges_from(std::string_view source, ActionKind action,
                                        const InstanceRef& instance) const;
    /// Trace indices leading from the entry screen to `key`. Throws
    /// ValidationError when the screen is unknown or has no recorded path.
    std::vector<std::size_t> discovery_path(std::string_view key) const;
    /// Every blob hash the graph references.
    std::vector<std::string> blob_hashes() const;

    friend bool operator==(const EventFlowGraph&, const EventFlowGraph&) = default;
};

struct ExploreConfig {
    std::size_t max_steps = 10000;
    std::size_t max_relaunches = 100;
};

/// Exploration failed because the driver did; the graph built so far is kept.
class ExplorationError : public Error {
public:
    ExplorationError(const std::string& what, std::shared_ptr<const EventFlowGraph> partial);
    const std::shared_ptr<const EventFlowGraph>& partial_graph() const noexcept { return partial_; }

private:
    std::shared_ptr<const EventFlowGraph> partial_;
};

/// Stable identity of a screen: activity, window and the sorted multiset
/// of (component_id, object_index, component_type). Text is not part of it.
std::string fingerprint(const ScreenSpec& screen);

/// Fingerprint of whatever the device shows, or kExternalTarget / kHomeTarget.
std::string observed_key(const Observation& observation);

/// Depth-first GUI ripping using clicks only. Screenshots go to `blobs`.
EventFlowGraph explore(DeviceDriver& driver, const ComponentUniverse& universe, BlobStore& blobs,
                       const ExploreConfig& config = {});

/// Cold-starts the app and re-drives the recorded discovery path to
/// `target`. Returns true iff the final fingerprint equals `target`.
/// Throws ReplayDivergenceError naming the first step that did not land
/// where the graph says it should (0 = the entry screen itself).
bool replay_path(DeviceDriver& driver, const EventFlowGraph& graph, std::string_view target);

}  // namespace fusion
