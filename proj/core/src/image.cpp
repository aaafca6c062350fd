#include "fusion/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>

#include "fusion/errors.hpp"

namespace fusion {

namespace {

// 3x5 glyphs; each row is three bits, most significant bit on the left.
struct Glyph {
    char c;
    std::array<std::uint8_t, 5> rows;
};

constexpr Glyph kGlyphs[] = {
    {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}}, {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}},
    {'E', {7, 4, 6, 4, 7}}, {'F', {7, 4, 6, 4, 4}}, {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}},
    {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}}, {'K', {5, 5, 6, 5, 5}}, {'L', {4, 4, 4, 4, 7}},
    {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}}, {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}},
    {'Q', {2, 5, 5, 6, 3}}, {'R', {6, 5, 6, 5, 5}}, {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}},
    {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}}, {'W', {5, 5, 7, 7, 5}}, {'X', {5, 5, 2, 5, 5}},
    {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}}, {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}},
    {'2', {6, 1, 2, 4, 7}}, {'3', {6, 1, 2, 1, 6}}, {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 6, 1, 6}},
    {'6', {3, 4, 7, 5, 7}}, {'7', {7, 1, 1, 2, 2}}, {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 6}},
    {'.', {0, 0, 0, 0, 2}}, {'-', {0, 0, 7, 0, 0}}, {'+', {0, 2, 7, 2, 0}}, {'#', {5, 7, 5, 7, 5}},
    {':', {0, 2, 0, 2, 0}}, {'/', {1, 1, 2, 4, 4}}, {'?', {6, 1, 2, 0, 2}}, {'!', {2, 2, 2, 0, 2}},
};

const Glyph* find_glyph(char c) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const auto& g : kGlyphs)
        if (g.c == up) return &g;
    return nullptr;
}

}  // namespace

Image::Image(int width, int height, Rgb background)
    : width_(std::max(width, 0)), height_(std::max(height, 0)),
      pixels_(static_cast<std::size_t>(width_) * height_ * 3) {
    fill({0, 0, width_, height_}, background);
}

Rgb Image::at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

std::span<const std::uint8_t> Image::row(int y) const {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_ * 3, static_cast<std::size_t>(width_) * 3};
}

std::span<std::uint8_t> Image::row(int y) {
    return {pixels_.data() + static_cast<std::size_t>(y) * width_ * 3, static_cast<std::size_t>(width_) * 3};
}

void Image::fill(const Rect& r, Rgb color) {
    const int x0 = std::clamp(r.left, 0, width_), x1 = std::clamp(r.right, 0, width_);
    const int y0 = std::clamp(r.top, 0, height_), y1 = std::clamp(r.bottom, 0, height_);
    for (int y = y0; y < y1; ++y) {
        auto* row = pixels_.data() + (static_cast<std::size_t>(y) * width_ + x0) * 3;
        for (int x = x0; x < x1; ++x) {
            *row++ = color.r;
            *row++ = color.g;
            *row++ = color.b;
        }
    }
}

void Image::frame(const Rect& r, int thickness, Rgb color) {
    const int t = std::min({thickness, r.width() / 2 + 1, r.height() / 2 + 1});
    fill({r.left, r.top, r.right, r.top + t}, color);
    fill({r.left, r.bottom - t, r.right, r.bottom}, color);
    fill({r.left, r.top, r.left + t, r.bottom}, color);
    fill({r.right - t, r.top, r.right, r.bottom}, color);
}

void Image::text(int x, int y, std::string_view s, int scale, Rgb color) {
    for (char c : s) {
        if (const Glyph* g = find_glyph(c)) {
            for (int row = 0; row < 5; ++row)
                for (int col = 0; col < 3; ++col)
                    if (g->rows[row] & (4 >> col))
                        fill({x + col * scale, y + row * scale, x + (col + 1) * scale,
                              y + (row + 1) * scale},
                             color);
        }
        x += 4 * scale;
    }
}

Image Image::crop(const Rect& r) const {
    const int x0 = std::clamp(r.left, 0, width_), x1 = std::clamp(r.right, 0, width_);
    const int y0 = std::clamp(r.top, 0, height_), y1 = std::clamp(r.bottom, 0, height_);
    Image out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y)
        std::memcpy(out.pixels_.data() + static_cast<std::size_t>(y - y0) * out.width_ * 3,
                    pixels_.data() + (static_cast<std::size_t>(y) * width_ + x0) * 3,
                    static_cast<std::size_t>(out.width_) * 3);
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    // Screens are flat fills from a small palette, so indexed color with
    // run-length deflate is both compact and fast. Fall back to RGB when
    // the image has more than 256 colors.
    std::vector<png_color> palette;
    std::vector<std::uint8_t> indexed(static_cast<std::size_t>(image.width()) * image.height());
    bool use_palette = true;
    {
        std::uint32_t last_key = 0xffffffffu;
        std::uint8_t last_index = 0;
        std::size_t out = 0;
        for (int y = 0; y < image.height() && use_palette; ++y) {
            const auto row = image.row(y);
            for (std::size_t i = 0; i < row.size(); i += 3) {
                const std::uint32_t key = (std::uint32_t{row[i]} << 16) | (std::uint32_t{row[i + 1]} << 8) | row[i + 2];
                if (key != last_key) {
                    auto it = std::find_if(palette.begin(), palette.end(), [&](const png_color& c) {
                        return c.red == row[i] && c.green == row[i + 1] && c.blue == row[i + 2];
                    });
                    if (it == palette.end()) {
                        if (palette.size() == 256) {
                            use_palette = false;
                            break;
                        }
                        palette.push_back({row[i], row[i + 1], row[i + 2]});
                        it = palette.end() - 1;
                    }
                    last_key = key;
                    last_index = static_cast<std::uint8_t>(it - palette.begin());
                }
                indexed[out++] = last_index;
            }
        }
    }

    struct Sink {
        std::vector<std::uint8_t> bytes;
    } sink;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encoding failed");
    }
    png_set_write_fn(
        png, &sink,
        [](png_structp p, png_bytep data, png_size_t len) {
            auto* s = static_cast<Sink*>(png_get_io_ptr(p));
            s->bytes.insert(s->bytes.end(), data, data + len);
        },
        nullptr);
    png_set_IHDR(png, info, image.width(), image.height(), 8,
                 use_palette ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (use_palette && !palette.empty())
        png_set_PLTE(png, info, palette.data(), static_cast<int>(palette.size()));
    png_set_compression_level(png, 1);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    if (use_palette) png_set_compression_strategy(png, 3 /* Z_RLE */);
    png_write_info(png, info);
    for (int y = 0; y < image.height(); ++y) {
        auto* data = use_palette ? indexed.data() + static_cast<std::size_t>(y) * image.width()
                                 : const_cast<std::uint8_t*>(image.row(y).data());
        png_write_row(png, data);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return std::move(sink.bytes);
}

Image decode_png(std::span<const std::uint8_t> data) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, data.data(), data.size()))
        throw ValidationError("not a PNG image");
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&img);
        throw ValidationError("corrupt PNG image");
    }
    Image out(static_cast<int>(img.width), static_cast<int>(img.height));
    for (int y = 0; y < out.height(); ++y) {
        auto dst = out.row(y);
        std::memcpy(dst.data(), buf.data() + static_cast<std::size_t>(y) * dst.size(), dst.size());
    }
    return out;
}

}  // namespace fusion
