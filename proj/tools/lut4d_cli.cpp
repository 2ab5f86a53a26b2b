// lut4d command-line tool: LUT creation, training, enhancement, evaluation,
// ablation sweeps and invariant self-checks.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lut4d/errors.hpp"
#include "lut4d/fusion.hpp"
#include "lut4d/interp.hpp"
#include "lut4d/io.hpp"
#include "lut4d/lattice.hpp"
#include "lut4d/metrics.hpp"
#include "lut4d/model.hpp"
#include "lut4d/regularizers.hpp"
#include "lut4d/train.hpp"

namespace fs = std::filesystem;
using namespace lut4d;

namespace {

std::vector<SamplePair> load_pair_dir(const std::string& dir) {
    const fs::path in_dir = fs::path(dir) / "input", gt_dir = fs::path(dir) / "gt";
    if (!fs::is_directory(in_dir) || !fs::is_directory(gt_dir)) {
        throw IoError(dir, "expected input/ and gt/ subdirectories");
    }
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(in_dir)) {
        if (e.is_regular_file()) names.push_back(e.path().filename());
    }
    std::sort(names.begin(), names.end());
    std::vector<SamplePair> pairs;
    for (const auto& n : names) {
        const fs::path gt = gt_dir / n;
        if (!fs::exists(gt)) throw IoError(gt.string(), "missing ground truth for " + n.string());
        SamplePair p{load_image((in_dir / n).string()), load_image(gt.string())};
        if (!p.input.same_shape(p.gt.height(), p.gt.width())) {
            throw ShapeError(n.string() + ": input and ground truth differ in size");
        }
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw IoError(dir, "no image pairs found");
    return pairs;
}

std::string fmt_metric(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct TrainOptions {
    std::string data_dir;
    std::size_t synth = 0;
    std::size_t size = 32;
    std::size_t iters = 200;
    std::size_t bins = 17;
    std::size_t ctx = 2;
    std::size_t nlut = 3;
    // Unset weights follow the desk preset rescaled to the chosen grid.
    double alpha_s = 0.0;
    double alpha_m = 0.0;
    CLI::Option* alpha_s_opt = nullptr;
    CLI::Option* alpha_m_opt = nullptr;
    double lr = desk_train_config().learning_rate;
    std::uint64_t seed = 1;
    bool constant_context = false;

    void add_flags(CLI::App* app, bool with_bins_nlut) {
        app->add_option("--data", data_dir, "directory with input/ and gt/ image pairs");
        app->add_option("--synth", synth, "use N synthetic two-region pairs instead of --data");
        app->add_option("--size", size, "synthetic image side length")->check(CLI::Range(8, 4096));
        app->add_option("--iters", iters, "training iterations")->check(CLI::PositiveNumber);
        if (with_bins_nlut) {
            app->add_option("--bins", bins, "grid points per RGB axis")->check(CLI::Range(2, 256));
            app->add_option("--nlut", nlut, "number of basis LUTs")->check(CLI::Range(1, 64));
        }
        app->add_option("--ctx", ctx, "grid points on the context axis")->check(CLI::Range(2, 256));
        alpha_s_opt = app->add_option("--alpha-s", alpha_s, "smooth regularization weight");
        alpha_m_opt = app->add_option("--alpha-m", alpha_m, "monotonicity regularization weight");
        app->add_option("--lr", lr, "initial learning rate");
        app->add_option("--seed", seed, "random seed");
        app->add_flag("--constant-context", constant_context,
                      "bypass the context encoder (context fixed at 0)");
    }

    std::vector<SamplePair> dataset() const {
        if (synth > 0) return synth_dataset(synth, size, size, seed);
        if (data_dir.empty()) throw InvalidArgument("either --data or --synth is required");
        return load_pair_dir(data_dir);
    }

    TrainConfig train_config() const {
        TrainConfig c = desk_train_config();
        c.iterations = iters;
        const ModelConfig desk = desk_model_config();
        const double rescale = static_cast<double>(adjacent_pair_count(desk.n_bin, desk.n_ctx)) /
                               static_cast<double>(adjacent_pair_count(bins, ctx));
        c.alpha_s = alpha_s_opt && alpha_s_opt->count() ? alpha_s : c.alpha_s * rescale;
        c.alpha_m = alpha_m_opt && alpha_m_opt->count() ? alpha_m : c.alpha_m * rescale;
        c.learning_rate = lr;
        c.seed = seed;
        c.validate();
        return c;
    }

    ModelConfig model_config() const {
        ModelConfig m = desk_model_config();
        m.n_bin = bins;
        m.n_ctx = ctx;
        m.n_lut = nlut;
        if (constant_context) m.fixed_context = 0.0;
        m.validate();
        return m;
    }
};

int run_verify() {
    int failures = 0;
    auto report = [&](const char* name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << '\n';
        if (!ok) ++failures;
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Lattice3D l3(5);
    for (double& v : l3.values()) v = unit(rng);
    const Lattice4D l4 = replicate_3d_to_4d(l3, 3);
    double worst_reduction = 0.0, worst_partition = 0.0;
    for (int t = 0; t < 500; ++t) {
        const Rgb rgb{unit(rng), unit(rng), unit(rng)};
        const double c = unit(rng);
        const Rgb a = quadrilinear(l4, rgb, c), b = trilinear(l3, rgb);
        for (std::size_t ch = 0; ch < 3; ++ch) worst_reduction = std::max(worst_reduction, std::fabs(a[ch] - b[ch]));
        const CornerSet cs = quadrilinear_corners(l4, rgb, c);
        double s = 0.0;
        for (double w : cs.weight) s += w;
        worst_partition = std::max(worst_partition, std::fabs(s - 1.0));
    }
    report("quadrilinear reduces to trilinear on replicated lattice", worst_reduction <= 1e-12);
    report("corner weights form a partition of unity", worst_partition <= 1e-12);

    const Lattice4D id = identity_lattice4(9, 2);
    double worst_identity = 0.0;
    for (int t = 0; t < 500; ++t) {
        const Rgb rgb{unit(rng), unit(rng), unit(rng)};
        const Rgb o = quadrilinear(id, rgb, unit(rng));
        for (std::size_t ch = 0; ch < 3; ++ch) worst_identity = std::max(worst_identity, std::fabs(o[ch] - rgb[ch]));
    }
    report("identity lattice is the identity map", worst_identity <= 1e-12);
    report("monotonicity(identity) == 0", monotonicity(id) == 0.0);
    report("smooth_lut(identity 3x2) == 27", std::fabs(smooth_lut(identity_lattice4(3, 2)) - 27.0) <= 1e-12);
    report("4D parameter count 33^3*3*2 == 215622", lattice4_size(33, 2) == 215622);
    report("3D parameter count 33^3*3 == 107811", lattice3_size(33) == 107811);

    std::stringstream ss;
    write_cube4(l4, ss);
    const Lattice4D back = read_cube4(ss);
    double worst_rt = 0.0;
    for (std::size_t i = 0; i < l4.size(); ++i) worst_rt = std::max(worst_rt, std::fabs(back.values()[i] - l4.values()[i]));
    report("cube4 round-trip within 1e-6", worst_rt <= 1e-6);

    Model model = Model::create(desk_model_config(), 3);
    const auto pairs = synth_dataset(1, 16, 16, 3);
    const Image out = forward_pipeline(model, pairs[0].input).enhanced;
    double worst_start = 0.0;
    for (std::size_t i = 0; i < out.data().size(); ++i)
        worst_start = std::max(worst_start, std::fabs(out.data()[i] - pairs[0].input.data()[i]));
    report("fresh model is the identity transform", worst_start <= 1e-6);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-aware 4D LUT image enhancement"};
    app.require_subcommand(1);

    // identity
    auto* identity = app.add_subcommand("identity", "write an identity 4D LUT (cube4)");
    std::size_t id_bins = 33, id_ctx = 2;
    std::string id_out, id_title;
    identity->add_option("--bins", id_bins, "grid points per RGB axis")->check(CLI::Range(2, 256));
    identity->add_option("--ctx", id_ctx, "grid points on the context axis")->check(CLI::Range(2, 256));
    identity->add_option("-o,--output", id_out, "output .cube4 path")->required();
    identity->add_option("--title", id_title, "TITLE header");

    // apply
    auto* apply = app.add_subcommand("apply", "apply a cube4 LUT to an image");
    std::string ap_lut, ap_in, ap_ctx, ap_out;
    apply->add_option("--lut", ap_lut, "cube4 LUT")->required();
    apply->add_option("--input", ap_in, "input image (PNG/PPM)")->required();
    apply->add_option("--context", ap_ctx, "context map (PNG/PGM); default constant 0.5");
    apply->add_option("-o,--output", ap_out, "output image (.png/.ppm)")->required();

    // init
    auto* init = app.add_subcommand("init", "write a freshly initialized (identity) model");
    std::string in_out;
    std::size_t in_bins = 17, in_ctx = 2, in_nlut = 3;
    std::uint64_t in_seed = 1;
    init->add_option("--out", in_out, "model path")->required();
    init->add_option("--bins", in_bins)->check(CLI::Range(2, 256));
    init->add_option("--ctx", in_ctx)->check(CLI::Range(2, 256));
    init->add_option("--nlut", in_nlut)->check(CLI::Range(1, 64));
    init->add_option("--seed", in_seed);

    // enhance
    auto* enhance = app.add_subcommand("enhance", "run the learned pipeline on an image");
    std::string en_model, en_in, en_out, en_dump_ctx, en_dump_lut;
    enhance->add_option("--model", en_model, "model file")->required();
    enhance->add_option("--input", en_in, "input image")->required();
    enhance->add_option("-o,--output", en_out, "output image")->required();
    enhance->add_option("--dump-context", en_dump_ctx, "write the context map (PNG/PGM)");
    enhance->add_option("--dump-lut", en_dump_lut, "write the fused LUT (cube4)");

    // train
    auto* train = app.add_subcommand("train", "train a model");
    TrainOptions tr;
    std::string tr_out, tr_log;
    tr.add_flags(train, true);
    train->add_option("--out", tr_out, "output model path")->required();
    train->add_option("--log", tr_log, "write the loss log here instead of stdout");

    // eval
    auto* eval = app.add_subcommand("eval", "mean PSNR/SSIM of a model over image pairs");
    std::string ev_model, ev_data;
    bool ev_quantize = false;
    eval->add_option("--model", ev_model, "model file")->required();
    eval->add_option("--data", ev_data, "directory with input/ and gt/")->required();
    eval->add_flag("--quantize", ev_quantize, "quantize outputs to 8 bits before measuring");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "train across a grid of bins or nlut values");
    std::string sw_param;
    std::vector<std::size_t> sw_values;
    TrainOptions sw;
    sw.synth = 8;
    sweep->add_option("--param", sw_param, "bins or nlut")
        ->required()
        ->check(CLI::IsMember({"bins", "nlut"}));
    sweep->add_option("--values", sw_values, "comma-separated values")->required()->delimiter(',');
    sw.add_flags(sweep, false);

    auto* verify = app.add_subcommand("verify", "run built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*identity) {
            write_cube4(identity_lattice4(id_bins, id_ctx), id_out, id_title);
        } else if (*apply) {
            const Lattice4D lut = read_cube4(ap_lut);
            const Image img = load_image(ap_in);
            const ContextMap ctx = ap_ctx.empty() ? ContextMap(img.height(), img.width(), 0.5)
                                                  : load_context_map(ap_ctx);
            save_image(apply_lut4(lut, img, ctx), ap_out);
        } else if (*init) {
            ModelConfig mc = desk_model_config();
            mc.n_bin = in_bins;
            mc.n_ctx = in_ctx;
            mc.n_lut = in_nlut;
            Model m = Model::create(mc, in_seed);
            save_model(m, in_out);
        } else if (*enhance) {
            Model m = load_model(en_model);
            const Image img = load_image(en_in);
            const PipelineResult r = forward_pipeline(m, img);
            save_image(r.enhanced, en_out);
            if (!en_dump_ctx.empty()) save_context_map(r.context, en_dump_ctx);
            if (!en_dump_lut.empty()) write_cube4(r.fused, en_dump_lut, "fused");
        } else if (*train) {
            const TrainConfig tc = tr.train_config();
            const auto data = tr.dataset();
            Model m = Model::create(tr.model_config(), tr.seed);
            std::ofstream log_file;
            std::ostream* log = &std::cout;
            if (!tr_log.empty()) {
                log_file.open(tr_log);
                if (!log_file) throw IoError(tr_log, "cannot open log for writing");
                log = &log_file;
            }
            TrainConfig with_dump = tc;
            with_dump.dump_path = tr_out + ".nan-dump";
            train_loop(m, data, with_dump, log);
            save_model(m, tr_out);
            std::cerr << "final mse=" << mean_mse(m, data) << '\n';
        } else if (*eval) {
            Model m = load_model(ev_model);
            const auto pairs = load_pair_dir(ev_data);
            double sum_psnr = 0.0, sum_ssim = 0.0;
            for (const auto& p : pairs) {
                Image out = forward_pipeline(m, p.input).enhanced;
                clamp_unit(out);
                if (ev_quantize) out = quantize_8bit(out);
                sum_psnr += psnr(out, p.gt);
                sum_ssim += ssim(out, p.gt);
            }
            const double n = static_cast<double>(pairs.size());
            std::cout << "psnr=" << fmt_metric(sum_psnr / n) << " ssim=" << fmt_metric(sum_ssim / n) << '\n';
        } else if (*sweep) {
            const auto data = sw.dataset();
            std::cout << "param,value,final_loss,psnr\n";
            for (std::size_t v : sw_values) {
                TrainOptions opt = sw;
                if (sw_param == "bins") opt.bins = v;
                else opt.nlut = v;
                Model m = Model::create(opt.model_config(), opt.seed);
                const TrainResult res = train_loop(m, data, opt.train_config());
                double sum_psnr = 0.0;
                for (const auto& p : data) {
                    Image out = forward_pipeline(m, p.input).enhanced;
                    clamp_unit(out);
                    sum_psnr += psnr(out, p.gt);
                }
                std::cout << sw_param << ',' << v << ',' << res.history.back().loss.total << ','
                          << fmt_metric(sum_psnr / static_cast<double>(data.size())) << '\n';
            }
        } else if (*verify) {
            return run_verify();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    }
    return 0;
}
