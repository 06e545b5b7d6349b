#pragma once

// PNG persistence (libpng) and raw-pixel SHA-256 digests (OpenSSL).

#include <png.h>
#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shapecode/raster.hpp"

namespace shapecode {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public ImageIoError {
public:
    using ImageIoError::ImageIoError;
};

/// Writes an 8-bit grayscale, non-interlaced PNG. Output bytes depend only on
/// the pixel buffer.
inline void write_png(const RasterImage& img, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = RasterImage::width();
    image.height = RasterImage::height();
    image.format = PNG_FORMAT_GRAY;
    const int ok = png_image_write_to_file(&image, path.c_str(), 0, img.pixels().data(), 0, nullptr);
    if (!ok) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw ImageIoError("cannot write PNG " + path.string() + ": " + msg);
    }
}

/// Reads any PNG libpng can decode, converting to 8-bit gray. The image must
/// be 512x512.
inline RasterImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw ImageIoError("cannot read PNG " + path.string() + ": " + image.message);
    if (image.width != static_cast<png_uint_32>(kCanvasSize) || image.height != static_cast<png_uint_32>(kCanvasSize)) {
        const std::string dims = std::to_string(image.width) + "x" + std::to_string(image.height);
        png_image_free(&image);
        throw DimensionError("PNG " + path.string() + " is " + dims + ", expected 512x512");
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(kPixelCount);
    // Composite any alpha onto white so transparent regions read as background.
    png_color background{255, 255, 255};
    if (!png_image_finish_read(&image, &background, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw ImageIoError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return RasterImage(std::move(buf));
}

inline std::string to_hex(const unsigned char* data, std::size_t n) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        out += kDigits[data[i] >> 4];
        out += kDigits[data[i] & 0xF];
    }
    return out;
}

/// Lowercase hex SHA-256 of a byte range.
inline std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("SHA-256 computation failed");
    return to_hex(digest, len);
}

inline std::string sha256_hex(std::string_view text) {
    return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// SHA-256 of the raw row-major pixel buffer (not the PNG bytes).
inline std::string pixel_hash(const RasterImage& img) { return sha256_hex(img.pixels()); }

}  // namespace shapecode
