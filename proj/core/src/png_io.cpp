#include "slicefind/png_io.hpp"

#include <cstdio>
#include <memory>

#include <png.h>

namespace slicefind {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

/// BT.601 luma, round half up.
inline std::uint8_t luma601(unsigned r, unsigned g, unsigned b) {
    return clamp_u8(0.299 * r + 0.587 * g + 0.114 * b);
}

inline std::uint8_t rescale16(unsigned v) {
    return clamp_u8(v * 255.0 / 65535.0);
}

} // namespace

GrayImage load_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file)
        raise(Errc::missing_file, "cannot open " + path.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 ||
        png_sig_cmp(header, 0, 8) != 0)
        raise(Errc::malformed_png, "not a PNG file: " + path.string());

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::io_failure, "libpng allocation failed");
    }

    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> raster;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::malformed_png, "corrupt PNG data in " + path.string());
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (bit_depth != 8 && bit_depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::unsupported_bit_depth,
              "only 8/16-bit PNGs accepted, " + path.string() + " has " +
                  std::to_string(bit_depth) + "-bit samples");
    }

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (bit_depth == 16)
        png_set_swap(png); // little-endian samples below
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raster.resize(rowbytes * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = raster.data() + y * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    const int bytes_per_sample = bit_depth / 8;
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* row = raster.data() + y * rowbytes;
        for (png_uint_32 x = 0; x < width; ++x) {
            const png_byte* px = row + x * channels * bytes_per_sample;
            auto sample = [&](int c) -> unsigned {
                if (bit_depth == 8) return px[c];
                const png_byte* s = px + c * 2;
                return static_cast<unsigned>(s[0]) |
                       (static_cast<unsigned>(s[1]) << 8);
            };
            std::uint8_t v;
            if (channels >= 3) {
                if (bit_depth == 8)
                    v = luma601(sample(0), sample(1), sample(2));
                else
                    v = luma601(rescale16(sample(0)), rescale16(sample(1)),
                                rescale16(sample(2)));
            } else {
                v = bit_depth == 8 ? static_cast<std::uint8_t>(sample(0))
                                   : rescale16(sample(0));
            }
            img.at(static_cast<int>(x), static_cast<int>(y)) = v;
        }
    }
    return img;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file)
        raise(Errc::io_failure, "cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::io_failure, "libpng allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::io_failure, "PNG write failed for " + path.string());
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.data.data() +
                                                 static_cast<std::size_t>(y) *
                                                     img.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace slicefind
