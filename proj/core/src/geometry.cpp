#include "fusion/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>

#include "fusion/errors.hpp"

namespace fusion {

namespace {

struct LocationName {
    RelativeLocation loc;
    std::string_view token;
    std::string_view label;
};

constexpr LocationName kNames[] = {
    {RelativeLocation::top_left, "top_left", "Top Left"},
    {RelativeLocation::top_center, "top_center", "Top Center"},
    {RelativeLocation::top_right, "top_right", "Top Right"},
    {RelativeLocation::center_left, "center_left", "Center Left"},
    {RelativeLocation::center, "center", "Center"},
    {RelativeLocation::center_right, "center_right", "Center Right"},
    {RelativeLocation::bottom_left, "bottom_left", "Bottom Left"},
    {RelativeLocation::bottom_center, "bottom_center", "Bottom Center"},
    {RelativeLocation::bottom_right, "bottom_right", "Bottom Right"},
};

// Third (0, 1, 2) of [0, extent) holding the midpoint of [lo, hi).
// Works on doubled coordinates so the midpoint stays integral.
int third_of(int lo, int hi, int extent) {
    const std::int64_t doubled_mid = std::int64_t{lo} + hi;
    const std::int64_t idx = (3 * doubled_mid) / (2 * std::int64_t{extent});
    return static_cast<int>(std::clamp<std::int64_t>(idx, 0, 2));
}

}  // namespace

std::string_view to_string(RelativeLocation loc) noexcept {
    return kNames[static_cast<int>(loc)].token;
}

std::string_view display_name(RelativeLocation loc) noexcept {
    return kNames[static_cast<int>(loc)].label;
}

RelativeLocation parse_relative_location(std::string_view text) {
    std::string norm;
    for (char c : text) {
        if (c == ' ' || c == '-') norm += '_';
        else norm += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (norm == "center_center" || norm == "middle") return RelativeLocation::center;
    for (const auto& n : kNames)
        if (n.token == norm) return n.loc;
    throw ValidationError("unknown relative location '" + std::string(text) + "'");
}

RelativeLocation region_of(const Rect& bounds, const Viewport& viewport) {
    if (bounds.empty()) throw ValidationError("zero-area bounds have no relative location");
    if (viewport.width <= 0 || viewport.height <= 0) throw ValidationError("empty viewport");
    const Rect vp = viewport.bounds();
    if (bounds.right <= vp.left || bounds.left >= vp.right || bounds.bottom <= vp.top ||
        bounds.top >= vp.bottom)
        throw ValidationError("bounds do not intersect the viewport");
    const int col = third_of(bounds.left, bounds.right, viewport.width);
    const int row = third_of(bounds.top, bounds.bottom, viewport.height);
    return static_cast<RelativeLocation>(row * 3 + col);
}

}  // namespace fusion
