#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lut4d/errors.hpp"
#include "lut4d/io.hpp"
#include "lut4d/model.hpp"
#include "test_util.hpp"

using namespace lut4d;
using namespace lut4d::testing;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int status = -1;
    std::string out, err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("lut4d_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name) const { return (dir_ / name).string(); }

    RunResult run(const std::string& args) const {
        const std::string out = file("stdout.txt"), err = file("stderr.txt");
        const std::string cmd = std::string(LUT4D_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
        const int raw = std::system(cmd.c_str());
        RunResult r;
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    static std::string slurp(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    }

    std::string write_test_image(const std::string& name, std::size_t h, std::size_t w,
                                 std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        save_image(random_image(h, w, rng), file(name));
        return file(name);
    }

    fs::path dir_;
};

std::size_t count_data_lines(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line))
        if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++n;
    return n;
}

}  // namespace

TEST(ExitCode, MapsErrorClasses) {
    EXPECT_EQ(exit_code(IoError("p", "x")), 3);
    EXPECT_EQ(exit_code(FormatError("p", "x")), 3);
    EXPECT_EQ(exit_code(ParseError(ParseErrorKind::NonNumeric, 1, "x")), 3);
    EXPECT_EQ(exit_code(ShapeError("x")), 4);
    EXPECT_EQ(exit_code(InvalidArgument("x")), 4);
    EXPECT_EQ(exit_code(IndexError("x")), 4);
    EXPECT_EQ(exit_code(NumericError("x")), 5);
    EXPECT_EQ(exit_code(std::runtime_error("x")), 1);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("bogus").status, 2);
    EXPECT_EQ(run("identity").status, 2);
    const RunResult r = run("identity --bins 1 --ctx 2 -o " + file("x.cube4"));
    EXPECT_EQ(r.status, 2);
    EXPECT_FALSE(fs::exists(file("x.cube4")));
    EXPECT_EQ(run("sweep --param depth --values 1").status, 2);
}

TEST_F(CliTest, HelpSucceeds) {
    const RunResult r = run("--help");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("identity"), std::string::npos);
}

TEST_F(CliTest, IdentityWritesCube4) {
    ASSERT_EQ(run("identity --bins 2 --ctx 2 -o " + file("id.cube4")).status, 0);
    const std::string text = slurp(file("id.cube4"));
    EXPECT_EQ(count_data_lines(text), 16u);
    EXPECT_TRUE(std::ranges::equal(read_cube4(file("id.cube4")).values(), identity_lattice4(2, 2).values()));

    ASSERT_EQ(run("identity -o " + file("default.cube4")).status, 0);
    EXPECT_NE(slurp(file("default.cube4")).find("LUT_4D_SIZE 33 2\n"), std::string::npos);
}

TEST_F(CliTest, ApplyIdentityIsByteIdempotent) {
    const std::string in = write_test_image("in.png", 12, 9, 1);
    ASSERT_EQ(run("identity --bins 5 --ctx 3 -o " + file("id.cube4")).status, 0);
    ASSERT_EQ(run("apply --lut " + file("id.cube4") + " --input " + in + " -o " + file("out.png")).status, 0);
    EXPECT_EQ(load_image(file("out.png")), load_image(in));
    // Also with an explicit context map.
    save_context_map(ContextMap(12, 9, 0.8), file("ctx.pgm"));
    ASSERT_EQ(run("apply --lut " + file("id.cube4") + " --input " + in + " --context " +
                  file("ctx.pgm") + " -o " + file("out2.ppm"))
                  .status,
              0);
    EXPECT_EQ(load_image(file("out2.ppm")), load_image(in));
}

TEST_F(CliTest, ApplyErrors) {
    const std::string in = write_test_image("in.png", 12, 9, 1);
    ASSERT_EQ(run("identity --bins 2 --ctx 2 -o " + file("id.cube4")).status, 0);

    const RunResult missing = run("apply --lut " + file("id.cube4") + " --input " + file("nope.png") +
                                  " -o " + file("out.png"));
    EXPECT_EQ(missing.status, 3);
    EXPECT_NE(missing.err.find(file("nope.png")), std::string::npos) << missing.err;

    save_context_map(ContextMap(5, 5, 0.5), file("small.pgm"));
    const RunResult shape = run("apply --lut " + file("id.cube4") + " --input " + in + " --context " +
                                file("small.pgm") + " -o " + file("out.png"));
    EXPECT_EQ(shape.status, 4);
    EXPECT_FALSE(shape.err.empty());

    std::ofstream(file("bad.cube4")) << "LUT_4D_SIZE 2 2\n0 0 0\n";
    EXPECT_EQ(run("apply --lut " + file("bad.cube4") + " --input " + in + " -o " + file("o.png")).status, 3);
}

TEST_F(CliTest, EnhanceWithFreshModel) {
    const std::string in = write_test_image("in.png", 16, 20, 2);
    ASSERT_EQ(run("init --out " + file("m.bin") + " --bins 5").status, 0);
    ASSERT_EQ(run("enhance --model " + file("m.bin") + " --input " + in + " -o " + file("out.png") +
                  " --dump-context " + file("ctx.png") + " --dump-lut " + file("fused.cube4"))
                  .status,
              0);
    const Image a = load_image(in), b = load_image(file("out.png"));
    ASSERT_TRUE(b.same_shape(16, 20));
    for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_LE(std::abs(a.data()[i] - b.data()[i]), 1.0 / 255.0 + 1e-12);

    const ContextMap ctx = load_context_map(file("ctx.png"));
    EXPECT_EQ(ctx.height(), 16u);
    EXPECT_EQ(ctx.width(), 20u);

    const Lattice4D fused = read_cube4(file("fused.cube4"));
    const Lattice4D id = identity_lattice4(5, 2);
    ASSERT_EQ(fused.size(), id.size());
    for (std::size_t i = 0; i < id.size(); ++i) EXPECT_NEAR(fused.values()[i], id.values()[i], 1e-6);

    EXPECT_EQ(run("enhance --model " + file("missing.bin") + " --input " + in + " -o " + file("o.png")).status, 3);
    std::ofstream(file("junk.bin")) << "not a model";
    EXPECT_EQ(run("enhance --model " + file("junk.bin") + " --input " + in + " -o " + file("o.png")).status, 3);
}

TEST_F(CliTest, TrainSynthEmitsLogAndModel) {
    const RunResult r = run("train --synth 2 --size 12 --iters 3 --bins 3 --seed 4 --out " + file("m.bin"));
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "iter,loss_total,loss_r,loss_s,loss_m,lr");
    std::size_t n = 0;
    while (std::getline(is, line)) ++n;
    EXPECT_EQ(n, 3u);
    EXPECT_NO_THROW(load_model(file("m.bin")));

    // Same seed, same log.
    const RunResult again = run("train --synth 2 --size 12 --iters 3 --bins 3 --seed 4 --out " + file("m2.bin"));
    EXPECT_EQ(again.out, r.out);
    EXPECT_EQ(slurp(file("m.bin")), slurp(file("m2.bin")));
}

TEST_F(CliTest, TrainValidationErrors) {
    EXPECT_EQ(run("train --synth 2 --size 12 --iters 1 --bins 3 --alpha-s -1 --out " + file("m.bin")).status, 4);
    EXPECT_EQ(run("train --synth 2 --size 12 --iters 1 --bins 3 --alpha-m -1 --out " + file("m.bin")).status, 4);
    EXPECT_EQ(run("train --size 12 --iters 1 --out " + file("m.bin")).status, 4);
    EXPECT_EQ(run("train --data " + file("nowhere") + " --iters 1 --out " + file("m.bin")).status, 3);
    EXPECT_EQ(run("train --synth 2 --iters 0 --out " + file("m.bin")).status, 2);
}

TEST_F(CliTest, EvalOnOwnOutputsIsInfinite) {
    fs::create_directories(dir_ / "data" / "input");
    fs::create_directories(dir_ / "data" / "gt");
    ASSERT_EQ(run("init --out " + file("m.bin") + " --bins 3").status, 0);
    for (int i = 0; i < 2; ++i) {
        const std::string name = "p" + std::to_string(i) + ".png";
        const std::string in = write_test_image("data/input/" + name, 14, 12, 10 + i);
        ASSERT_EQ(run("enhance --model " + file("m.bin") + " --input " + in + " -o " + file("data/gt/" + name)).status, 0);
    }
    const RunResult r = run("eval --model " + file("m.bin") + " --data " + file("data") + " --quantize");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "psnr=inf ssim=1.0000\n");

    const RunResult f = run("eval --model " + file("m.bin") + " --data " + file("data"));
    ASSERT_EQ(f.status, 0);
    EXPECT_EQ(f.out.rfind("psnr=", 0), 0u);
    EXPECT_NE(f.out.find(" ssim="), std::string::npos);

    fs::create_directories(dir_ / "empty" / "input");
    fs::create_directories(dir_ / "empty" / "gt");
    EXPECT_EQ(run("eval --model " + file("m.bin") + " --data " + file("empty")).status, 3);
}

TEST_F(CliTest, SweepRowsInOrder) {
    const RunResult r = run("sweep --param bins --values 3,2 --synth 2 --size 12 --iters 2");
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream is(r.out);
    std::string header, a, b, extra;
    std::getline(is, header);
    std::getline(is, a);
    std::getline(is, b);
    EXPECT_EQ(header, "param,value,final_loss,psnr");
    EXPECT_EQ(a.rfind("bins,3,", 0), 0u) << a;
    EXPECT_EQ(b.rfind("bins,2,", 0), 0u) << b;
    EXPECT_FALSE(std::getline(is, extra));
    EXPECT_EQ(std::count(a.begin(), a.end(), ','), 3);
    EXPECT_EQ(run("sweep --param bins --values 3,2 --synth 2 --size 12 --iters 2").out, r.out);

    const RunResult n = run("sweep --param nlut --values 1 --synth 2 --size 12 --iters 1 --ctx 2");
    ASSERT_EQ(n.status, 0) << n.err;
    EXPECT_NE(n.out.find("nlut,1,"), std::string::npos);
}

TEST_F(CliTest, VerifyPasses) {
    const RunResult r = run("verify");
    EXPECT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
