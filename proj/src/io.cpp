#include "lut4d/io.hpp"

#include <png.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "lut4d/errors.hpp"

namespace lut4d {

namespace {

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string extension(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::vector<unsigned char> read_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(path, std::string("cannot open: ") + std::strerror(errno));
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(is), {});
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(path, std::string("cannot open for writing: ") + std::strerror(errno));
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError(path, "write failed");
}

bool is_png(const std::vector<unsigned char>& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

// Decode PNG into interleaved 8-bit samples with `channels` per pixel. The
// image is read with alpha, which is then dropped without compositing.
std::vector<unsigned char> decode_png(const std::string& path, const std::vector<unsigned char>& bytes,
                                      unsigned channels, std::size_t& h, std::size_t& w) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw FormatError(path, std::string("PNG header: ") + image.message);
    }
    image.format = channels == 1 ? PNG_FORMAT_GA : PNG_FORMAT_RGBA;
    std::vector<unsigned char> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError(path, "PNG data: " + msg);
    }
    h = image.height;
    w = image.width;
    const std::size_t stride = channels + 1;
    std::vector<unsigned char> out(h * w * channels);
    for (std::size_t p = 0; p < h * w; ++p)
        for (std::size_t c = 0; c < channels; ++c) out[p * channels + c] = px[p * stride + c];
    return out;
}

std::vector<unsigned char> encode_png(const std::string& path, const unsigned char* px,
                                      std::size_t h, std::size_t w, unsigned channels) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, px, 0, nullptr)) {
        throw IoError(path, std::string("PNG encode: ") + image.message);
    }
    std::vector<unsigned char> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, px, 0, nullptr)) {
        throw IoError(path, std::string("PNG encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

// Binary PNM (P5 / P6) with maxval 255.
std::vector<unsigned char> decode_pnm(const std::string& path, const std::vector<unsigned char>& bytes,
                                      char expected, std::size_t& h, std::size_t& w) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> std::size_t {
        skip_ws();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
            throw FormatError(path, "malformed PNM header");
        }
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
            if (v > (1u << 24)) throw FormatError(path, "PNM dimension too large");
        }
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != expected) {
        throw FormatError(path, std::string("unsupported image format (expected PNG or P") + expected + ")");
    }
    pos = 2;
    w = read_int();
    h = read_int();
    const std::size_t maxval = read_int();
    if (w == 0 || h == 0) throw FormatError(path, "PNM has zero size");
    if (maxval != 255) throw FormatError(path, "only 8-bit PNM (maxval 255) is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError(path, "malformed PNM header");
    ++pos;
    const std::size_t channels = expected == '6' ? 3 : 1;
    const std::size_t need = w * h * channels;
    if (bytes.size() - pos < need) throw FormatError(path, "truncated PNM data");
    return std::vector<unsigned char>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
}

std::vector<unsigned char> encode_pnm(const unsigned char* px, std::size_t h, std::size_t w,
                                      unsigned channels) {
    const std::string header = std::string(channels == 3 ? "P6" : "P5") + "\n" + std::to_string(w) +
                               " " + std::to_string(h) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.insert(out.end(), px, px + h * w * channels);
    return out;
}

}  // namespace

Image quantize_8bit(const Image& img) {
    Image out = img;
    for (double& v : out.data()) v = static_cast<double>(to_byte(v)) / 255.0;
    return out;
}

// ---------------------------------------------------------------------------
// Images

Image load_image(const std::string& path) {
    const auto bytes = read_bytes(path);
    std::size_t h = 0, w = 0;
    const auto px = is_png(bytes) ? decode_png(path, bytes, 3, h, w) : decode_pnm(path, bytes, '6', h, w);
    Image img(h, w);
    for (std::size_t p = 0; p < h * w; ++p)
        for (std::size_t c = 0; c < 3; ++c) img.plane(c)[p] = static_cast<double>(px[p * 3 + c]) / 255.0;
    return img;
}

void save_image(const Image& img, const std::string& path) {
    if (img.empty()) throw InvalidArgument("cannot save an empty image");
    std::vector<unsigned char> px(img.pixels() * 3);
    for (std::size_t p = 0; p < img.pixels(); ++p)
        for (std::size_t c = 0; c < 3; ++c) px[p * 3 + c] = to_byte(img.plane(c)[p]);
    const std::string ext = extension(path);
    if (ext == "png") {
        write_bytes(path, encode_png(path, px.data(), img.height(), img.width(), 3));
    } else if (ext == "ppm") {
        write_bytes(path, encode_pnm(px.data(), img.height(), img.width(), 3));
    } else {
        throw IoError(path, "unsupported image extension (use .png or .ppm)");
    }
}

ContextMap load_context_map(const std::string& path) {
    const auto bytes = read_bytes(path);
    std::size_t h = 0, w = 0;
    const auto px = is_png(bytes) ? decode_png(path, bytes, 1, h, w) : decode_pnm(path, bytes, '5', h, w);
    ContextMap map(h, w);
    for (std::size_t p = 0; p < h * w; ++p) map.plane(0)[p] = static_cast<double>(px[p]) / 255.0;
    return map;
}

void save_context_map(const ContextMap& map, const std::string& path) {
    if (map.empty()) throw InvalidArgument("cannot save an empty context map");
    std::vector<unsigned char> px(map.pixels());
    for (std::size_t p = 0; p < map.pixels(); ++p) px[p] = to_byte(map.plane(0)[p]);
    const std::string ext = extension(path);
    if (ext == "png") {
        write_bytes(path, encode_png(path, px.data(), map.height(), map.width(), 1));
    } else if (ext == "pgm") {
        write_bytes(path, encode_pnm(px.data(), map.height(), map.width(), 1));
    } else {
        throw IoError(path, "unsupported context map extension (use .png or .pgm)");
    }
}

// ---------------------------------------------------------------------------
// cube4

namespace {

// Six significant digits, with extra precision above 1 so every value
// round-trips to within 1e-6.
void append_value(std::string& line, double v) {
    char buf[64];
    int digits = 6;
    const double mag = std::fabs(v);
    if (mag >= 1.0) digits += static_cast<int>(std::floor(std::log10(mag))) + 1;
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v == 0.0 ? 0.0 : v);
    line += buf;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, std::size_t line_no) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw ParseError(ParseErrorKind::NonNumeric, line_no, tok);
    if (!std::isfinite(v) || errno == ERANGE) throw ParseError(ParseErrorKind::NonFinite, line_no, tok);
    return v;
}

std::size_t parse_size(const std::string& tok, std::size_t line_no) {
    if (tok.empty() || tok.size() > 6 ||
        !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ParseError(ParseErrorKind::BadSize, line_no, tok);
    }
    const std::size_t v = std::stoul(tok);
    if (v < 2 || v > 1024) throw ParseError(ParseErrorKind::BadSize, line_no, tok);
    return v;
}

}  // namespace

void write_cube4(const Lattice4D& lut, std::ostream& os, const std::string& title) {
    if (!title.empty()) os << "TITLE \"" << title << "\"\n";
    os << "LUT_4D_SIZE " << lut.n_bin() << ' ' << lut.n_ctx() << '\n';
    os << "DOMAIN_MIN 0 0 0 0\n";
    os << "DOMAIN_MAX 1 1 1 1\n";
    const std::size_t plane = lut.plane_size();
    auto v = lut.values();
    std::string line;
    for (std::size_t e = 0; e < plane; ++e) {
        line.clear();
        append_value(line, v[e]);
        line += ' ';
        append_value(line, v[plane + e]);
        line += ' ';
        append_value(line, v[2 * plane + e]);
        line += '\n';
        os << line;
    }
}

void write_cube4(const Lattice4D& lut, const std::string& path, const std::string& title) {
    std::ofstream os(path);
    if (!os) throw IoError(path, "cannot open for writing");
    write_cube4(lut, os, title);
    if (!os) throw IoError(path, "write failed");
}

Lattice4D read_cube4(std::istream& is) {
    std::size_t n_bin = 0, n_ctx = 0;
    bool have_size = false;
    std::vector<double> rgb_rows;  // R G B per data line
    std::size_t plane = 0, rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        const std::string& key = toks[0];
        const bool numeric_start = std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
                                   key[0] == '+' || key[0] == '.';
        if (!numeric_start) {
            // Tokens like "nan" / "inf" are values, not keywords.
            char* end = nullptr;
            std::strtod(key.c_str(), &end);
            if (end != key.c_str() && *end == '\0') throw ParseError(ParseErrorKind::NonFinite, line_no, key);
            const bool known = key == "TITLE" || key == "LUT_4D_SIZE" || key == "DOMAIN_MIN" ||
                               key == "DOMAIN_MAX";
            if (rows > 0) {
                throw ParseError(known ? ParseErrorKind::UnknownKeyword : ParseErrorKind::NonNumeric,
                                 line_no, known ? key + " after data" : key);
            }
            if (key == "TITLE") continue;
            if (key == "LUT_4D_SIZE") {
                if (have_size) throw ParseError(ParseErrorKind::BadSize, line_no, "duplicate size");
                if (toks.size() != 3) throw ParseError(ParseErrorKind::BadSize, line_no, line);
                n_bin = parse_size(toks[1], line_no);
                n_ctx = parse_size(toks[2], line_no);
                plane = n_bin * n_bin * n_bin * n_ctx;
                have_size = true;
                continue;
            }
            if (key == "DOMAIN_MIN" || key == "DOMAIN_MAX") {
                if (toks.size() != 5) throw ParseError(ParseErrorKind::BadDomain, line_no, line);
                const double expect = key == "DOMAIN_MIN" ? 0.0 : 1.0;
                for (std::size_t t = 1; t < 5; ++t) {
                    if (parse_number(toks[t], line_no) != expect) {
                        throw ParseError(ParseErrorKind::BadDomain, line_no, line);
                    }
                }
                continue;
            }
            throw ParseError(ParseErrorKind::UnknownKeyword, line_no, key);
        }
        if (!have_size) throw ParseError(ParseErrorKind::MissingSize, line_no, "data before LUT_4D_SIZE");
        if (toks.size() != 3) {
            throw ParseError(ParseErrorKind::WrongFieldCount, line_no,
                             std::to_string(toks.size()) + " fields");
        }
        if (rows >= plane) throw ParseError(ParseErrorKind::WrongLineCount, line_no, "too many data lines");
        for (std::size_t c = 0; c < 3; ++c) rgb_rows.push_back(parse_number(toks[c], line_no));
        ++rows;
    }
    if (!have_size) throw ParseError(ParseErrorKind::MissingSize, line_no, "no LUT_4D_SIZE header");
    if (rows != plane) {
        throw ParseError(ParseErrorKind::WrongLineCount, line_no,
                         std::to_string(rows) + " of " + std::to_string(plane) + " data lines");
    }
    std::vector<double> values(3 * plane);
    for (std::size_t e = 0; e < plane; ++e)
        for (std::size_t c = 0; c < 3; ++c) values[c * plane + e] = rgb_rows[3 * e + c];
    return Lattice4D(n_bin, n_ctx, std::move(values));
}

Lattice4D read_cube4(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError(path, "cannot open for reading");
    return read_cube4(is);
}

}  // namespace lut4d
