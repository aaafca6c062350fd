#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fusion/action.hpp"
#include "fusion/geometry.hpp"
#include "fusion/image.hpp"

namespace fusion {

/// Pseudo-screens outside the app under test.
inline constexpr std::string_view kExternalTarget = "EXTERNAL";
inline constexpr std::string_view kHomeTarget = "HOME";

/// One on-screen occurrence of a component: the id plus the ordinal that
/// separates repeated instances on the same screen.
struct InstanceRef {
    std::string component_id;
    int object_index = 0;

    friend auto operator<=>(const InstanceRef&, const InstanceRef&) = default;
};

struct ComponentSpec {
    std::string component_id;
    int object_index = 0;
    std::string component_type;
    std::string text;
    Rect bounds;
    ActionSet supported_actions;
    bool editable = false;

    InstanceRef ref() const { return {component_id, object_index}; }
    friend bool operator==(const ComponentSpec&, const ComponentSpec&) = default;
};

struct ScreenSpec {
    std::string screen_id;
    std::string activity;
    std::string window;
    std::vector<ComponentSpec> components;  // on-screen (document) order

    const ComponentSpec* find(const InstanceRef& ref) const;
    friend bool operator==(const ScreenSpec&, const ScreenSpec&) = default;
};

struct TransitionKey {
    std::string screen_id;
    ActionKind action = ActionKind::click;
    InstanceRef instance;

    friend auto operator<=>(const TransitionKey&, const TransitionKey&) = default;
};

struct TransitionSpec {
    std::string target;  // screen id, kExternalTarget or kHomeTarget
    bool new_activity = false;

    friend bool operator==(const TransitionSpec&, const TransitionSpec&) = default;
};

/// Executable description of an app: screens, the action transition table
/// and explicit back edges. There is no implicit back stack.
struct AppModel {
    std::string app_id;
    Viewport viewport;
    std::vector<ScreenSpec> screens;
    std::map<TransitionKey, TransitionSpec> transitions;
    std::map<std::string, std::string> back_edges;  // screen id -> screen id or kHomeTarget
    std::string entry_screen;
    /// Screenshots are rendered at 1/N of the viewport resolution.
    int screenshot_downsample = 1;

    const ScreenSpec* screen(std::string_view screen_id) const;
    /// Throws ModelFormatError naming the offending field.
    void validate() const;
};

/// Throws ModelFormatError (with a field path) on schema violations.
AppModel parse_app_model(std::string_view json_text);
AppModel load_app_model(const std::filesystem::path& path);
std::string serialize_app_model(const AppModel& model);

enum class DeviceState { foreground, external, home };

struct Observation {
    DeviceState state = DeviceState::foreground;
    std::optional<ScreenSpec> screen;  // set iff foreground
};

enum class OutcomeKind { stayed, moved, external, home };

struct Outcome {
    OutcomeKind kind = OutcomeKind::stayed;
    std::string screen_id;  // set for moved
    bool new_activity = false;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

std::string_view to_string(OutcomeKind kind) noexcept;

enum class ShotKind { full, component, highlighted };

struct ScreenshotRequest {
    ShotKind kind = ShotKind::full;
    InstanceRef instance;

    static ScreenshotRequest full() { return {ShotKind::full, {}}; }
    static ScreenshotRequest component(InstanceRef ref) { return {ShotKind::component, std::move(ref)}; }
    static ScreenshotRequest highlighted(InstanceRef ref) { return {ShotKind::highlighted, std::move(ref)}; }
};

/// What the explorer and the replayer drive. One instance models one
/// physical device and is not thread-safe.
class DeviceDriver {
public:
    virtual ~DeviceDriver() = default;

    virtual std::string app_id() const = 0;
    virtual Viewport viewport() const = 0;
    /// Throws DriverStateError before the first relaunch_app().
    virtual Observation observe() const = 0;
    virtual Outcome perform(const Action& action, const InstanceRef& target) = 0;
    virtual Outcome press_back() = 0;
    /// Cold start: afterwards the entry screen is in the foreground.
    virtual ScreenSpec relaunch_app() = 0;
    /// PNG bytes of the current screen.
    virtual std::vector<std::uint8_t> screenshot(const ScreenshotRequest& request) const = 0;
};

/// Deterministic synthetic rendering of a screen: flat component boxes with
/// text labels. Highlighting only touches pixels inside the target bounds.
/// `downsample` divides every coordinate (1 = full resolution).
Image render_screen(const ScreenSpec& screen, const Viewport& viewport,
                    const InstanceRef* highlight = nullptr, int downsample = 1);

/// Device that executes an AppModel. Outcomes are exactly the model's
/// transition-table lookups; a missing entry means the screen stays.
class SimulatedDevice final : public DeviceDriver {
public:
    explicit SimulatedDevice(AppModel model);

    std::string app_id() const override { return model_.app_id; }
    Viewport viewport() const override { return model_.viewport; }
    Observation observe() const override;
    Outcome perform(const Action& action, const InstanceRef& target) override;
    Outcome press_back() override;
    ScreenSpec relaunch_app() override;
    std::vector<std::uint8_t> screenshot(const ScreenshotRequest& request) const override;

    const AppModel& model() const noexcept { return model_; }
    /// Replaces the model, keeping the device state when the current screen survives.
    void reset_model(AppModel model);

private:
    enum class State { not_launched, foreground, external, home };

    const ScreenSpec& current() const;
    void require_launched() const;

    AppModel model_;
    State state_ = State::not_launched;
    std::string current_;
    std::string return_screen_;
};

}  // namespace fusion
