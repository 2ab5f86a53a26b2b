#include <gtest/gtest.h>
#include <png.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lut4d/errors.hpp"
#include "lut4d/io.hpp"
#include "test_util.hpp"

using namespace lut4d;
using namespace lut4d::testing;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                (std::string("lut4d_io_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    os << bytes;
}

std::string cube4_text(const Lattice4D& l) {
    std::ostringstream os;
    write_cube4(l, os);
    return os.str();
}

Lattice4D parse(const std::string& text) {
    std::istringstream is(text);
    return read_cube4(is);
}

ParseErrorKind kind_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no ParseError for:\n" << text;
    return ParseErrorKind::MissingSize;
}

const std::map<std::string, ParseErrorKind> kKindNames = {
    {"MissingSize", ParseErrorKind::MissingSize},
    {"BadSize", ParseErrorKind::BadSize},
    {"BadDomain", ParseErrorKind::BadDomain},
    {"UnknownKeyword", ParseErrorKind::UnknownKeyword},
    {"NonNumeric", ParseErrorKind::NonNumeric},
    {"NonFinite", ParseErrorKind::NonFinite},
    {"WrongFieldCount", ParseErrorKind::WrongFieldCount},
    {"WrongLineCount", ParseErrorKind::WrongLineCount},
};

}  // namespace

// ---------------------------------------------------------------------------
// cube4

TEST(Cube4, IdentityGoldenFile) {
    const std::string text = cube4_text(identity_lattice4(2, 2));
    EXPECT_EQ(text, read_file(std::string(LUT4D_TEST_DATA_DIR) + "/identity_2_2.cube4"));
    std::istringstream is(text);
    std::string line;
    std::vector<std::string> data;
    while (std::getline(is, line))
        if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) data.push_back(line);
    ASSERT_EQ(data.size(), 16u);
    EXPECT_EQ(data[0], "0 0 0");
    EXPECT_EQ(data[1], "1 0 0");
    EXPECT_EQ(data[2], "0 1 0");
    EXPECT_EQ(data[4], "0 0 1");
    EXPECT_EQ(data[8], "0 0 0");
    EXPECT_EQ(data[15], "1 1 1");
}

TEST(Cube4, TitleIsWritten) {
    std::ostringstream os;
    write_cube4(identity_lattice4(2, 2), os, "warm");
    EXPECT_EQ(os.str().rfind("TITLE \"warm\"\nLUT_4D_SIZE 2 2\n", 0), 0u);
}

TEST(Cube4, RandomRoundTripWithinTolerance) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + t % 4, nc = 2 + t % 2;
        const Lattice4D l = random_lattice4(n, nc, rng, -2.0, 3.0);
        const Lattice4D back = parse(cube4_text(l));
        ASSERT_EQ(back.n_bin(), n);
        ASSERT_EQ(back.n_ctx(), nc);
        for (std::size_t i = 0; i < l.size(); ++i) ASSERT_NEAR(back.values()[i], l.values()[i], 1e-6);
    }
}

TEST(Cube4, WriterIsDeterministicAndStable) {
    std::mt19937_64 rng(2);
    const Lattice4D l = random_lattice4(3, 2, rng);
    const std::string a = cube4_text(l);
    EXPECT_EQ(a, cube4_text(l));
    EXPECT_EQ(cube4_text(parse(a)), a);
}

TEST(Cube4, SizeHeaderGivesBufferLength) {
    std::ostringstream os;
    os << "LUT_4D_SIZE 33 2\n";
    for (std::size_t i = 0; i < 33u * 33 * 33 * 2; ++i) os << "0.5 0.5 0.5\n";
    const Lattice4D l = parse(os.str());
    EXPECT_EQ(l.size(), 215622u);
}

TEST(Cube4, OptionalHeadersCommentsAndBlankLines) {
    const std::string body = "0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n";
    const std::string text = "# comment\nTITLE \"x y\"\n\nLUT_4D_SIZE 2 2\r\n" + body + "\n" + body;
    const Lattice4D l = parse(text);
    EXPECT_TRUE(std::ranges::equal(l.values(), identity_lattice4(2, 2).values()));
}

TEST(Cube4, ErrorsCarryLineNumbers) {
    const std::string text = "LUT_4D_SIZE 2 2\n0 0 0\n1 0 x\n";
    try {
        parse(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseErrorKind::NonNumeric);
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Cube4, InlineErrorKinds) {
    EXPECT_EQ(kind_of(""), ParseErrorKind::MissingSize);
    EXPECT_EQ(kind_of("0 0 0\n"), ParseErrorKind::MissingSize);
    EXPECT_EQ(kind_of("LUT_4D_SIZE 2\n"), ParseErrorKind::BadSize);
    EXPECT_EQ(kind_of("LUT_4D_SIZE 2 2\nDOMAIN_MAX 2 2 2 2\n"), ParseErrorKind::BadDomain);
    EXPECT_EQ(kind_of("LUT_3D_SIZE 2\n"), ParseErrorKind::UnknownKeyword);
    EXPECT_EQ(kind_of("LUT_4D_SIZE 2 2\n0 0 zz\n"), ParseErrorKind::NonNumeric);
    EXPECT_EQ(kind_of("LUT_4D_SIZE 2 2\n0 0 0\ninf 0 0\n"), ParseErrorKind::NonFinite);
    EXPECT_EQ(kind_of("LUT_4D_SIZE 2 2\n0 0\n"), ParseErrorKind::WrongFieldCount);
    EXPECT_EQ(kind_of("LUT_4D_SIZE 2 2\n0 0 0\n"), ParseErrorKind::WrongLineCount);
}

TEST(Cube4, CorruptedCorpusRejectedWithDocumentedKind) {
    const fs::path dir = fs::path(LUT4D_TEST_DATA_DIR) / "corrupt";
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string stem = entry.path().stem().string();
        const auto sep = stem.rfind("__");
        ASSERT_NE(sep, std::string::npos) << stem;
        const auto it = kKindNames.find(stem.substr(sep + 2));
        ASSERT_NE(it, kKindNames.end()) << stem;
        try {
            read_cube4(entry.path().string());
            ADD_FAILURE() << stem << " was accepted";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.kind(), it->second) << stem << ": " << e.what();
        }
        ++n;
    }
    EXPECT_GE(n, 10u);
}

TEST(Cube4, MissingFileIsIoError) {
    EXPECT_THROW(read_cube4(std::string("/nonexistent/x.cube4")), IoError);
    EXPECT_THROW(write_cube4(identity_lattice4(2, 2), std::string("/nonexistent/x.cube4")), IoError);
}

TEST(Cube4, FileRoundTrip) {
    TempDir dir;
    std::mt19937_64 rng(3);
    const Lattice4D l = random_lattice4(4, 3, rng);
    write_cube4(l, dir.file("a.cube4"), "t");
    const Lattice4D back = read_cube4(dir.file("a.cube4"));
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(back.values()[i], l.values()[i], 1e-6);
}

// ---------------------------------------------------------------------------
// Images

TEST(ImageIo, PngAndPpmRoundTripWithinQuantization) {
    TempDir dir;
    std::mt19937_64 rng(4);
    const Image img = random_image(13, 17, rng);
    for (const char* name : {"a.png", "a.ppm"}) {
        save_image(img, dir.file(name));
        const Image back = load_image(dir.file(name));
        ASSERT_EQ(back.height(), 13u);
        ASSERT_EQ(back.width(), 17u);
        for (std::size_t i = 0; i < img.data().size(); ++i)
            ASSERT_LE(std::abs(back.data()[i] - img.data()[i]), 0.5 / 255.0 + 1e-12) << name;
        EXPECT_EQ(back, quantize_8bit(img));
        save_image(back, dir.file(std::string("b") + name));
        EXPECT_EQ(load_image(dir.file(std::string("b") + name)), back);
    }
}

TEST(ImageIo, WritersAreByteDeterministic) {
    TempDir dir;
    std::mt19937_64 rng(5);
    const Image img = random_image(6, 5, rng);
    save_image(img, dir.file("a.png"));
    save_image(img, dir.file("b.png"));
    EXPECT_EQ(read_file(dir.file("a.png")), read_file(dir.file("b.png")));
}

TEST(ImageIo, BlackPpmPixel) {
    TempDir dir;
    write_file(dir.file("black.ppm"), std::string("P6\n1 1\n255\n") + std::string(3, '\0'));
    const Image img = load_image(dir.file("black.ppm"));
    ASSERT_EQ(img.height(), 1u);
    ASSERT_EQ(img.width(), 1u);
    for (double v : img.data()) EXPECT_EQ(v, 0.0);
}

TEST(ImageIo, PpmHeaderWithComment) {
    TempDir dir;
    write_file(dir.file("c.ppm"), std::string("P6\n# note\n2 1\n255\n") + std::string("\xff\x00\x80\x01\x02\x03", 6));
    const Image img = load_image(dir.file("c.ppm"));
    ASSERT_EQ(img.width(), 2u);
    EXPECT_EQ(img.at(0, 0, 0), 1.0);
    EXPECT_EQ(img.at(2, 0, 0), 128.0 / 255.0);
    EXPECT_EQ(img.at(1, 0, 1), 2.0 / 255.0);
}

TEST(ImageIo, RgbaPngDropsAlpha) {
    TempDir dir;
    const unsigned char px[2 * 4] = {10, 20, 30, 0, 200, 100, 50, 128};
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = 2;
    image.height = 1;
    image.format = PNG_FORMAT_RGBA;
    ASSERT_TRUE(png_image_write_to_file(&image, dir.file("rgba.png").c_str(), 0, px, 0, nullptr));
    const Image img = load_image(dir.file("rgba.png"));
    ASSERT_EQ(img.width(), 2u);
    EXPECT_EQ(img.at(0, 0, 0), 10.0 / 255.0);
    EXPECT_EQ(img.at(1, 0, 0), 20.0 / 255.0);
    EXPECT_EQ(img.at(2, 0, 0), 30.0 / 255.0);
    EXPECT_EQ(img.at(0, 0, 1), 200.0 / 255.0);
    EXPECT_EQ(img.at(1, 0, 1), 100.0 / 255.0);
    EXPECT_EQ(img.at(2, 0, 1), 50.0 / 255.0);
}

TEST(ImageIo, ValuesAreClampedOnSave) {
    TempDir dir;
    Image img(1, 2);
    img.at(0, 0, 0) = -0.5;
    img.at(0, 0, 1) = 1.5;
    save_image(img, dir.file("c.png"));
    const Image back = load_image(dir.file("c.png"));
    EXPECT_EQ(back.at(0, 0, 0), 0.0);
    EXPECT_EQ(back.at(0, 0, 1), 1.0);
}

TEST(ImageIo, ErrorKinds) {
    TempDir dir;
    EXPECT_THROW(load_image(dir.file("missing.png")), IoError);
    try {
        load_image(dir.file("missing.png"));
    } catch (const IoError& e) {
        EXPECT_EQ(e.path(), dir.file("missing.png"));
    }
    write_file(dir.file("junk.png"), "definitely not an image");
    EXPECT_THROW(load_image(dir.file("junk.png")), FormatError);
    write_file(dir.file("p3.ppm"), "P3\n1 1\n255\n0 0 0\n");
    EXPECT_THROW(load_image(dir.file("p3.ppm")), FormatError);
    write_file(dir.file("trunc.ppm"), std::string("P6\n4 4\n255\n") + std::string(10, 'a'));
    EXPECT_THROW(load_image(dir.file("trunc.ppm")), FormatError);
    write_file(dir.file("deep.ppm"), std::string("P6\n1 1\n65535\n") + std::string(6, 'a'));
    EXPECT_THROW(load_image(dir.file("deep.ppm")), FormatError);

    std::mt19937_64 rng(6);
    save_image(random_image(8, 8, rng), dir.file("good.png"));
    const std::string png = read_file(dir.file("good.png"));
    write_file(dir.file("trunc.png"), png.substr(0, png.size() / 2));
    EXPECT_THROW(load_image(dir.file("trunc.png")), FormatError);

    EXPECT_THROW(save_image(Image(2, 2), dir.file("x.bmp")), IoError);
    EXPECT_THROW(save_image(Image(), dir.file("x.png")), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Context maps

TEST(ContextMapIo, RoundTripAndDims) {
    TempDir dir;
    std::mt19937_64 rng(7);
    const ContextMap m = random_context(9, 14, rng);
    for (const char* name : {"m.png", "m.pgm"}) {
        save_context_map(m, dir.file(name));
        const ContextMap back = load_context_map(dir.file(name));
        ASSERT_EQ(back.height(), 9u);
        ASSERT_EQ(back.width(), 14u);
        for (std::size_t i = 0; i < m.data().size(); ++i)
            ASSERT_LE(std::abs(back.data()[i] - m.data()[i]), 0.5 / 255.0 + 1e-12);
    }
}

TEST(ContextMapIo, HalfMapIs128) {
    TempDir dir;
    save_context_map(ContextMap(3, 4, 0.5), dir.file("h.pgm"));
    const std::string bytes = read_file(dir.file("h.pgm"));
    const std::string header = "P5\n4 3\n255\n";
    ASSERT_EQ(bytes.size(), header.size() + 12);
    EXPECT_EQ(bytes.substr(0, header.size()), header);
    for (std::size_t i = header.size(); i < bytes.size(); ++i)
        EXPECT_EQ(static_cast<unsigned char>(bytes[i]), 128);
    save_context_map(ContextMap(3, 4, 0.5), dir.file("h.png"));
    const ContextMap png = load_context_map(dir.file("h.png"));
    for (double v : png.data()) EXPECT_EQ(v, 128.0 / 255.0);
}

TEST(ContextMapIo, ErrorKinds) {
    TempDir dir;
    EXPECT_THROW(load_context_map(dir.file("missing.pgm")), IoError);
    write_file(dir.file("rgb.pgm"), std::string("P6\n1 1\n255\n") + std::string(3, 'a'));
    EXPECT_THROW(load_context_map(dir.file("rgb.pgm")), FormatError);
    EXPECT_THROW(save_context_map(ContextMap(2, 2), dir.file("m.ppm")), IoError);
}
