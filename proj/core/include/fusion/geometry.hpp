#pragma once

#include <array>
#include <string_view>

namespace fusion {

/// Pixel rectangle, half-open: [left, right) x [top, bottom).
struct Rect {
    int left = 0;
    int top = 0;
    int right = 0;
    int bottom = 0;

    int width() const noexcept { return right - left; }
    int height() const noexcept { return bottom - top; }
    bool empty() const noexcept { return width() <= 0 || height() <= 0; }
    bool contains(int x, int y) const noexcept { return x >= left && x < right && y >= top && y < bottom; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Viewport {
    int width = 1200;
    int height = 1920;

    Rect bounds() const noexcept { return {0, 0, width, height}; }
    friend bool operator==(const Viewport&, const Viewport&) = default;
};

/// 3x3 screen regions, row-major from the top-left.
enum class RelativeLocation {
    top_left,
    top_center,
    top_right,
    center_left,
    center,
    center_right,
    bottom_left,
    bottom_center,
    bottom_right,
};

inline constexpr std::array<RelativeLocation, 9> kAllRelativeLocations = {
    RelativeLocation::top_left,    RelativeLocation::top_center,    RelativeLocation::top_right,
    RelativeLocation::center_left, RelativeLocation::center,        RelativeLocation::center_right,
    RelativeLocation::bottom_left, RelativeLocation::bottom_center, RelativeLocation::bottom_right,
};

/// Machine token, e.g. "top_center".
std::string_view to_string(RelativeLocation loc) noexcept;
/// Human label, e.g. "Top Center"; the middle cell is just "Center".
std::string_view display_name(RelativeLocation loc) noexcept;
/// Accepts tokens and display labels. Throws ValidationError otherwise.
RelativeLocation parse_relative_location(std::string_view text);

/// Region of the viewport containing the center of `bounds`, decided
/// independently per axis by thirds. A center lying exactly on a third
/// boundary belongs to the later region. Throws ValidationError for
/// zero-area bounds or bounds that miss the viewport.
RelativeLocation region_of(const Rect& bounds, const Viewport& viewport);

}  // namespace fusion
