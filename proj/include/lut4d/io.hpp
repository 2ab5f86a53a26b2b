#pragma once

#include <iosfwd>
#include <string>

#include "lut4d/image.hpp"
#include "lut4d/lattice.hpp"

namespace lut4d {

// Images: 8-bit PNG (gray, RGB or RGBA; alpha dropped) or binary PPM (P6,
// maxval 255). The file contents decide the decoder; save_image picks the
// encoder from the extension (.png or .ppm). Samples map as v / 255.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);

// Context maps: 8-bit grayscale PNG or binary PGM (P5), by extension.
ContextMap load_context_map(const std::string& path);
void save_context_map(const ContextMap& map, const std::string& path);

// cube4 text format:
//   TITLE "<s>"              (optional)
//   LUT_4D_SIZE <n_bin> <n_ctx>
//   DOMAIN_MIN 0 0 0 0       (optional)
//   DOMAIN_MAX 1 1 1 1       (optional)
//   n_bin^3 * n_ctx lines "R G B", i fastest, then j, k, and l slowest.
// Blank lines and lines starting with '#' are ignored.
void write_cube4(const Lattice4D& lut, std::ostream& os, const std::string& title = "");
void write_cube4(const Lattice4D& lut, const std::string& path, const std::string& title = "");
// Throws ParseError (with a kind and line number) on malformed input.
Lattice4D read_cube4(std::istream& is);
Lattice4D read_cube4(const std::string& path);

}  // namespace lut4d
