#ifndef SLICEFIND_PNG_IO_HPP
#define SLICEFIND_PNG_IO_HPP

#include <filesystem>

#include "slicefind/image.hpp"

namespace slicefind {

/// Decode a PNG file into an 8-bit grayscale raster.
///
/// Color inputs are reduced to luminance with ITU-R BT.601 weights
/// (0.299 R + 0.587 G + 0.114 B, rounded half up). 16-bit samples are
/// rescaled as v*255/65535, rounded. Alpha channels are ignored. Only
/// 8- and 16-bit PNGs are accepted; palette images are expanded to RGB
/// first.
GrayImage load_png(const std::filesystem::path& path);

/// Write an 8-bit grayscale PNG. load_png(save_png(img)) round-trips
/// bit-exactly.
void save_png(const GrayImage& img, const std::filesystem::path& path);

} // namespace slicefind

#endif
