#pragma once

#include "tofdepth/core.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tofdepth {

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decoded PNG samples, row-major and channel-interleaved. 16-bit samples
/// are stored host-endian in `samples16`, 8-bit ones in `samples8`.
struct PngImage {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    int channels = 0;
    std::vector<std::uint8_t> samples8;
    std::vector<std::uint16_t> samples16;
};

namespace detail {

struct PngReadBuffer {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

inline void png_read_from_buffer(png_structp png, png_bytep out, png_size_t length) {
    auto* buf = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
    if (buf->offset + length > buf->bytes.size()) png_error(png, "unexpected end of data");
    std::memcpy(out, buf->bytes.data() + buf->offset, length);
    buf->offset += length;
}

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

inline void png_flush_noop(png_structp) {}

[[noreturn]] inline void png_throw(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    png_longjmp(png, 1);
}

inline void png_warn_silent(png_structp, png_const_charp) {}

}  // namespace detail

/// Decodes a PNG from memory. Palette images expand to RGB; bit depths
/// below 8 expand to 8. 16-bit data is kept at full precision.
inline PngImage decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw ImageError("not a PNG file");

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, detail::png_throw,
                                             detail::png_warn_silent);
    if (!png) throw ImageError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageError("png: out of memory");
    }

    detail::PngReadBuffer buffer{bytes, 0};
    PngImage img;
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> raw;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("png: " + (message.empty() ? std::string("decode failed") : message));
    }

    png_set_read_fn(png, &buffer, detail::png_read_from_buffer);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.channels = png_get_channels(png, info);
    img.bit_depth = png_get_bit_depth(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * static_cast<std::size_t>(img.height));
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = raw.data() + rowbytes * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t count =
        static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * static_cast<std::size_t>(img.channels);
    if (img.bit_depth == 16) {
        img.samples16.resize(count);
        std::memcpy(img.samples16.data(), raw.data(), count * sizeof(std::uint16_t));
    } else {
        img.samples8.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(count));
    }
    return img;
}

/// Encodes an 8- or 16-bit PNG. `channels` is 1 (gray) or 3 (RGB).
inline std::vector<std::uint8_t> encode_png(int width, int height, int channels, int bit_depth,
                                            const void* samples) {
    if (width <= 0 || height <= 0) throw ImageError("png: empty image");
    if (channels != 1 && channels != 3) throw ImageError("png: unsupported channel count");
    if (bit_depth != 8 && bit_depth != 16) throw ImageError("png: unsupported bit depth");

    std::string message;
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, detail::png_throw,
                                              detail::png_warn_silent);
    if (!png) throw ImageError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ImageError("png: out of memory");
    }
    const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
    const std::size_t rowbytes = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) * bytes_per_sample;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    auto* base = static_cast<std::uint8_t*>(const_cast<void*>(samples));
    for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = base + rowbytes * static_cast<std::size_t>(y);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageError("png: " + (message.empty() ? std::string("encode failed") : message));
    }
    png_set_write_fn(png, &out, detail::png_write_to_vector, detail::png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageError("write failed for " + path.string());
}

/// meters = raw / depth_scale; raw 0 stays invalid.
inline DepthMap decode_depth_png(std::span<const std::uint8_t> bytes, double depth_scale) {
    if (!(depth_scale > 0.0)) throw std::invalid_argument("depth_scale must be positive");
    const PngImage img = decode_png(bytes);
    if (img.bit_depth != 16) throw ImageError("depth PNG must be 16-bit, got " + std::to_string(img.bit_depth) + "-bit");
    if (img.channels != 1)
        throw ImageError("depth PNG must be single-channel, got " + std::to_string(img.channels) + " channels");
    DepthMap depth(img.width, img.height);
    for (std::size_t i = 0; i < depth.data.size(); ++i) {
        const std::uint16_t raw = img.samples16[i];
        depth.data[i] = raw == 0 ? 0.0 : static_cast<double>(raw) / depth_scale;
    }
    return depth;
}

/// Inverse of decode_depth_png. Depths are rounded to the nearest raw unit
/// and saturate at 65535.
inline std::vector<std::uint8_t> encode_depth_png(const DepthMap& depth, double depth_scale) {
    if (!(depth_scale > 0.0)) throw std::invalid_argument("depth_scale must be positive");
    std::vector<std::uint16_t> raw(depth.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double z = depth.data[i];
        if (!is_valid_depth(z)) continue;
        const double scaled = std::round(z * depth_scale);
        raw[i] = static_cast<std::uint16_t>(std::clamp(scaled, 0.0, 65535.0));
    }
    return encode_png(depth.width, depth.height, 1, 16, raw.data());
}

/// Integer-rounded BT.601 luma.
[[nodiscard]] constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const unsigned y = (299u * r + 587u * g + 114u * b + 500u) / 1000u;
    return static_cast<std::uint8_t>(y > 255u ? 255u : y);
}

/// Converts interleaved 8-bit RGB to luma.
inline GrayImage to_gray(std::span<const std::uint8_t> rgb, int width, int height) {
    if (width <= 0 || height <= 0 ||
        rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3)
        throw ImageError("to_gray: RGB buffer does not match dimensions");
    GrayImage gray(width, height);
    for (std::size_t i = 0; i < gray.data.size(); ++i)
        gray.data[i] = luma(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    return gray;
}

/// Decodes an 8-bit gray, gray+alpha, RGB or RGBA PNG to luma.
inline GrayImage decode_gray_png(std::span<const std::uint8_t> bytes) {
    const PngImage img = decode_png(bytes);
    if (img.bit_depth != 8) throw ImageError("color image must be 8-bit, got " + std::to_string(img.bit_depth) + "-bit");
    GrayImage gray(img.width, img.height);
    const auto c = static_cast<std::size_t>(img.channels);
    for (std::size_t i = 0; i < gray.data.size(); ++i) {
        const std::uint8_t* px = img.samples8.data() + i * c;
        switch (img.channels) {
            case 1:
            case 2: gray.data[i] = px[0]; break;
            case 3:
            case 4: gray.data[i] = luma(px[0], px[1], px[2]); break;
            default: throw ImageError("unsupported channel count " + std::to_string(img.channels));
        }
    }
    return gray;
}

inline std::vector<std::uint8_t> encode_gray_png(const GrayImage& img) {
    return encode_png(img.width, img.height, 1, 8, img.data.data());
}

}  // namespace tofdepth
