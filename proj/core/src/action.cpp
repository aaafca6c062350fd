#include "fusion/action.hpp"

#include "fusion/errors.hpp"

namespace fusion {

std::string_view to_string(ActionKind kind) noexcept {
    switch (kind) {
        case ActionKind::click: return "click";
        case ActionKind::long_click: return "long_click";
        case ActionKind::type: return "type";
        case ActionKind::swipe: return "swipe";
    }
    return "click";
}

ActionKind parse_action_kind(std::string_view name) {
    if (name == "click" || name == "tap") return ActionKind::click;
    if (name == "long_click" || name == "long_tap" || name == "long-click") return ActionKind::long_click;
    if (name == "type") return ActionKind::type;
    if (name == "swipe") return ActionKind::swipe;
    throw ValidationError("unknown action kind '" + std::string(name) + "'");
}

void Action::validate() const {
    if (kind == ActionKind::type && !typed_text)
        throw ValidationError("type action requires typed_text");
    if (kind != ActionKind::type && typed_text)
        throw ValidationError(std::string(to_string(kind)) + " action must not carry typed_text");
}

}  // namespace fusion
