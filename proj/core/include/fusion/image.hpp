#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fusion/geometry.hpp"

namespace fusion {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster used for synthetic screenshots.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb background = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Rgb at(int x, int y) const;
    /// Packed RGB bytes of one scanline.
    std::span<const std::uint8_t> row(int y) const;
    std::span<std::uint8_t> row(int y);

    /// Drawing clips to the image.
    void fill(const Rect& r, Rgb color);
    /// Rectangle outline of the given thickness, drawn inside `r`.
    void frame(const Rect& r, int thickness, Rgb color);
    /// Blocky 3x5 glyph text, upper-cased; unknown characters render as gaps.
    void text(int x, int y, std::string_view s, int scale, Rgb color);
    Image crop(const Rect& r) const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

std::vector<std::uint8_t> encode_png(const Image& image);
/// Throws ValidationError when `data` is not a decodable PNG.
Image decode_png(std::span<const std::uint8_t> data);

}  // namespace fusion
