#pragma once

#include <array>
#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace fusion {

/// Gestures a reporter can describe. Declaration order is the order in
/// which action suggestions are presented.
enum class ActionKind { click, long_click, type, swipe };

inline constexpr std::array<ActionKind, 4> kAllActionKinds = {
    ActionKind::click, ActionKind::long_click, ActionKind::type, ActionKind::swipe};

std::string_view to_string(ActionKind kind) noexcept;

/// Throws ValidationError on unknown names. Accepts "tap"/"long_tap" aliases.
ActionKind parse_action_kind(std::string_view name);

using ActionSet = std::set<ActionKind>;

/// An action with its payload. typed_text is present iff kind == type.
struct Action {
    ActionKind kind = ActionKind::click;
    std::optional<std::string> typed_text;

    static Action click() { return {ActionKind::click, std::nullopt}; }
    static Action long_click() { return {ActionKind::long_click, std::nullopt}; }
    static Action swipe() { return {ActionKind::swipe, std::nullopt}; }
    static Action type(std::string text) { return {ActionKind::type, std::move(text)}; }

    /// Throws ValidationError when the typed_text invariant is violated.
    void validate() const;

    friend bool operator==(const Action&, const Action&) = default;
};

}  // namespace fusion
