#include "lut4d/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lut4d/errors.hpp"
#include "lut4d/interp.hpp"
#include "lut4d/regularizers.hpp"

namespace lut4d {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidArgument("learning rate must be finite and > 0");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("Adam betas must lie in (0,1)");
    }
    if (!(context_lr_scale > 0.0) || !(param_lr_scale > 0.0)) {
        throw InvalidArgument("learning-rate scales must be > 0");
    }
    if (!(epsilon > 0.0)) throw InvalidArgument("Adam epsilon must be > 0");
    if (!(alpha_s >= 0.0) || !std::isfinite(alpha_s)) {
        throw InvalidArgument("alpha_s must be finite and >= 0");
    }
    if (!(alpha_m >= 0.0) || !std::isfinite(alpha_m)) {
        throw InvalidArgument("alpha_m must be finite and >= 0");
    }
    if (!(crop_min > 0.0 && crop_min <= crop_max && crop_max <= 1.0)) {
        throw InvalidArgument("crop scale range must lie within (0,1]");
    }
    if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
        throw InvalidArgument("flip probability must lie in [0,1]");
    }
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("lr decay must lie in (0,1]");
    if (!(min_learning_rate >= 0.0)) throw InvalidArgument("min learning rate must be >= 0");
}

TrainConfig desk_train_config() {
    TrainConfig c;
    c.learning_rate = 2e-3;
    c.context_lr_scale = 0.1;
    c.param_lr_scale = 0.025;
    c.iterations = 200;
    c.seed = 1;
    // Default weights divided by the pair count, i.e. applied to the mean
    // over adjacent pairs rather than the sum.
    const ModelConfig m = desk_model_config();
    const double pairs = static_cast<double>(adjacent_pair_count(m.n_bin, m.n_ctx));
    c.alpha_s /= pairs;
    c.alpha_m /= pairs;
    return c;
}

ModelConfig desk_model_config() {
    ModelConfig c;
    c.n_bin = 17;
    return c;
}

// ---------------------------------------------------------------------------
// Pipeline and losses

PipelineResult forward_pipeline(Model& model, const Image& image) {
    const ModelConfig& cfg = model.config();
    ContextMap context = cfg.fixed_context
                             ? ContextMap(image.height(), image.width(), *cfg.fixed_context)
                             : model.context_encoder().forward(image);
    FusionCoefficients coef = model.parameter_encoder().forward(image);
    Lattice4D fused = fuse(model.basis_bank(), coef);
    Image enhanced = apply_lut4(fused, image, context);
    return {std::move(enhanced), std::move(context), std::move(coef), std::move(fused)};
}

double reconstruction_loss(const Image& pred, const Image& gt) {
    if (!pred.same_shape(gt.height(), gt.width())) {
        throw ShapeError("prediction and ground truth differ in size");
    }
    const auto& a = pred.data();
    const auto& b = gt.data();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

LossBreakdown total_loss(const Image& pred, const Image& gt, const Lattice4D& fused,
                         const FusionCoefficients& coef, double alpha_s, double alpha_m) {
    LossBreakdown l;
    l.reconstruction = reconstruction_loss(pred, gt);
    l.smooth = smooth_total(fused, coef);
    l.monotonic = monotonicity(fused);
    l.total = l.reconstruction + alpha_s * l.smooth + alpha_m * l.monotonic;
    return l;
}

LossBreakdown compute_gradients(Model& model, const SamplePair& pair, double alpha_s,
                                double alpha_m) {
    PipelineResult fw = forward_pipeline(model, pair.input);
    const LossBreakdown loss = total_loss(fw.enhanced, pair.gt, fw.fused, fw.coef, alpha_s, alpha_m);

    Image upstream(pair.input.height(), pair.input.width());
    const double scale = 2.0 / static_cast<double>(upstream.data().size());
    for (std::size_t i = 0; i < upstream.data().size(); ++i) {
        upstream.data()[i] = scale * (fw.enhanced.data()[i] - pair.gt.data()[i]);
    }

    ApplyGrad ag = apply_lut4_backward(fw.fused, pair.input, fw.context, upstream);
    const RegularizerGrad rg = regularizer_backward(fw.fused, fw.coef, alpha_s, alpha_m);
    for (std::size_t i = 0; i < ag.d_lattice.size(); ++i) ag.d_lattice[i] += rg.d_lattice[i];

    FusionGrad fg = fuse_backward(model.basis_bank(), fw.coef, ag.d_lattice);
    for (std::size_t i = 0; i < fg.d_coef.weights.size(); ++i)
        fg.d_coef.weights[i] += rg.d_coef.weights[i];
    for (std::size_t i = 0; i < fg.d_coef.biases.size(); ++i)
        fg.d_coef.biases[i] += rg.d_coef.biases[i];

    auto& basis = model.basis();
    for (std::size_t n = 0; n < basis.size(); ++n) {
        for (std::size_t i = 0; i < basis[n].grad.size(); ++i) basis[n].grad[i] += fg.d_basis[n][i];
    }
    model.parameter_encoder().backward(fg.d_coef);
    if (!model.config().fixed_context) model.context_encoder().backward(ag.d_context);
    return loss;
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(nn::ParamTensor& p, double lr, double beta1, double beta2, double epsilon,
               std::size_t step) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = p.grad[i];
        p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * g;
        p.v[i] = beta2 * p.v[i] + (1.0 - beta2) * g * g;
        const double m_hat = p.m[i] / bc1;
        const double v_hat = p.v[i] / bc2;
        p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
    }
}

void adam_step(const nn::ParamRefs& params, const TrainConfig& config, double lr,
               std::size_t step) {
    for (auto* p : params) adam_step(*p, lr, config.beta1, config.beta2, config.epsilon, step);
}

void adam_step(Model& model, const TrainConfig& config, double lr, std::size_t step) {
    for (auto& p : model.basis()) adam_step(p, lr, config.beta1, config.beta2, config.epsilon, step);
    nn::ParamRefs ctx, par;
    model.context_encoder().collect(ctx);
    model.parameter_encoder().collect(par);
    adam_step(ctx, config, lr * config.context_lr_scale, step);
    adam_step(par, config, lr * config.param_lr_scale, step);
}

// ---------------------------------------------------------------------------
// Augmentation

Image hflip(const Image& img) {
    Image out(img.height(), img.width());
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < img.height(); ++y)
            for (std::size_t x = 0; x < img.width(); ++x)
                out.at(c, y, img.width() - 1 - x) = img.at(c, y, x);
    return out;
}

Image crop(const Image& img, std::size_t top, std::size_t left, std::size_t height,
           std::size_t width) {
    if (top + height > img.height() || left + width > img.width() || height == 0 || width == 0) {
        throw ShapeError("crop window outside image");
    }
    Image out(height, width);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) out.at(c, y, x) = img.at(c, top + y, left + x);
    return out;
}

AugmentChoice draw_augment(std::size_t height, std::size_t width, const TrainConfig& config,
                           std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = config.crop_min + (config.crop_max - config.crop_min) * unit(rng);
    auto side = [scale](std::size_t n) {
        const auto s = static_cast<std::size_t>(std::ceil(scale * static_cast<double>(n) - 1e-9));
        return std::clamp<std::size_t>(s, 1, n);
    };
    AugmentChoice c;
    c.height = side(height);
    c.width = side(width);
    c.top = std::uniform_int_distribution<std::size_t>(0, height - c.height)(rng);
    c.left = std::uniform_int_distribution<std::size_t>(0, width - c.width)(rng);
    c.flip = unit(rng) < config.flip_probability;
    return c;
}

SamplePair apply_augment(const SamplePair& pair, const AugmentChoice& choice) {
    SamplePair out{crop(pair.input, choice.top, choice.left, choice.height, choice.width),
                   crop(pair.gt, choice.top, choice.left, choice.height, choice.width)};
    if (choice.flip) {
        out.input = hflip(out.input);
        out.gt = hflip(out.gt);
    }
    return out;
}

SamplePair augment(const SamplePair& pair, const TrainConfig& config, std::mt19937_64& rng) {
    if (!pair.input.same_shape(pair.gt.height(), pair.gt.width())) {
        throw ShapeError("input and ground truth differ in size");
    }
    return apply_augment(pair, draw_augment(pair.input.height(), pair.input.width(), config, rng));
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

constexpr double kTexture = 0.20;
constexpr std::size_t kBlock = 8;
// Ground truth: the textured region has its checker contrast boosted by
// kBoost per side; the smooth region is left unchanged.
constexpr double kBoost = 0.12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::vector<SynthSample> synth_dataset_labeled(std::size_t n_samples, std::size_t height,
                                               std::size_t width, std::uint64_t seed) {
    if (height < 2 || width < 2) throw InvalidArgument("synthetic images need at least 2x2 pixels");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    std::vector<SynthSample> out;
    out.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const bool textured_on_top = unit(rng) < 0.5;
        const auto boundary = std::uniform_int_distribution<std::size_t>(height / 3, (2 * height) / 3)(rng);
        const double fx = uniform(0.5, 1.5), fy = uniform(0.5, 1.5);
        Rgb base{}, amp{}, phase{};
        for (std::size_t c = 0; c < 3; ++c) {
            base[c] = uniform(0.3, 0.6);
            amp[c] = uniform(0.05, 0.12);
            phase[c] = uniform(0.0, 2.0 * std::numbers::pi);
        }

        SynthSample sample{{Image(height, width), Image(height, width)},
                           std::vector<std::uint8_t>(height * width, 0)};
        for (std::size_t y = 0; y < height; ++y) {
            const bool top = y < boundary;
            const bool textured = top == textured_on_top;
            for (std::size_t x = 0; x < width; ++x) {
                sample.region[y * width + x] = textured ? 1 : 0;
                const std::size_t cell = textured ? (x + y) : (x / kBlock + y / kBlock);
                const double tex = cell % 2 ? kTexture : -kTexture;
                const double arg = 2.0 * std::numbers::pi *
                                   (fx * static_cast<double>(x) / static_cast<double>(width) +
                                    fy * static_cast<double>(y) / static_cast<double>(height));
                const double boost = textured ? (cell % 2 ? kBoost : -kBoost) : 0.0;
                for (std::size_t c = 0; c < 3; ++c) {
                    const double v = clamp01(base[c] + amp[c] * std::sin(arg + phase[c]) + tex);
                    sample.pair.input.at(c, y, x) = v;
                    sample.pair.gt.at(c, y, x) = clamp01(v + boost);
                }
            }
        }
        out.push_back(std::move(sample));
    }
    return out;
}

std::vector<SamplePair> synth_dataset(std::size_t n_samples, std::size_t height,
                                      std::size_t width, std::uint64_t seed) {
    std::vector<SamplePair> pairs;
    for (auto& s : synth_dataset_labeled(n_samples, height, width, seed)) {
        pairs.push_back(std::move(s.pair));
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Training loop

Split train_val_split(std::size_t n) {
    Split s;
    if (n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            s.train.push_back(i);
            s.val.push_back(i);
        }
        return s;
    }
    const std::size_t n_val = (n + 7) / 8;
    for (std::size_t i = 0; i < n - n_val; ++i) s.train.push_back(i);
    for (std::size_t i = n - n_val; i < n; ++i) s.val.push_back(i);
    return s;
}

void write_log_header(std::ostream& os) { os << "iter,loss_total,loss_r,loss_s,loss_m,lr\n"; }

void write_log_line(std::ostream& os, const LossRecord& rec) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.6g\n", rec.iteration,
                  rec.loss.total, rec.loss.reconstruction, rec.loss.smooth, rec.loss.monotonic,
                  rec.learning_rate);
    os << buf;
}

double mean_mse(Model& model, const std::vector<SamplePair>& pairs) {
    if (pairs.empty()) throw InvalidArgument("no pairs to evaluate");
    double s = 0.0;
    for (const auto& p : pairs) s += reconstruction_loss(forward_pipeline(model, p.input).enhanced, p.gt);
    return s / static_cast<double>(pairs.size());
}

namespace {

std::string first_non_finite_grad(Model& model) {
    for (const auto* p : model.parameters()) {
        for (double g : p->grad) {
            if (!std::isfinite(g)) return p->name;
        }
    }
    return {};
}

}  // namespace

TrainResult train_loop(Model& model, const std::vector<SamplePair>& dataset,
                       const TrainConfig& config, std::ostream* log) {
    config.validate();
    if (dataset.empty()) throw InvalidArgument("training set is empty");
    for (const auto& p : dataset) {
        if (!p.input.same_shape(p.gt.height(), p.gt.width())) {
            throw ShapeError("training pair input and ground truth differ in size");
        }
    }

    const Split split = train_val_split(dataset.size());
    std::mt19937_64 rng(config.seed);
    TrainResult result;
    double lr = config.learning_rate;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    std::size_t step = 0;
    if (log) write_log_header(*log);

    while (step < config.iterations) {
        std::vector<std::size_t> order = split.train;
        std::shuffle(order.begin(), order.end(), rng);
        bool full_epoch = true;
        for (std::size_t idx : order) {
            if (step >= config.iterations) {
                full_epoch = false;
                break;
            }
            const SamplePair sample = augment(dataset[idx], config, rng);
            model.zero_grad();
            const LossBreakdown loss = compute_gradients(model, sample, config.alpha_s, config.alpha_m);
            const std::string bad_grad = first_non_finite_grad(model);
            if (!std::isfinite(loss.total) || !bad_grad.empty()) {
                std::ostringstream msg;
                msg << "non-finite " << (bad_grad.empty() ? "loss" : "gradient in " + bad_grad)
                    << " at iteration " << step + 1 << " (pair " << idx
                    << "): total=" << loss.total << " r=" << loss.reconstruction
                    << " s=" << loss.smooth << " m=" << loss.monotonic << " lr=" << lr;
                if (config.dump_path) {
                    save_model(model, *config.dump_path);
                    msg << "; state dumped to " << *config.dump_path;
                }
                throw NumericError(msg.str());
            }
            ++step;
            adam_step(model, config, lr, step);
            LossRecord rec{step, loss, lr};
            if (log) write_log_line(*log, rec);
            result.history.push_back(rec);
        }
        if (!full_epoch) break;

        double val = 0.0;
        for (std::size_t idx : split.val) {
            val += reconstruction_loss(forward_pipeline(model, dataset[idx].input).enhanced,
                                       dataset[idx].gt);
        }
        val /= static_cast<double>(split.val.size());
        if (val < best_val) {
            best_val = val;
            stale = 0;
        } else if (++stale >= config.plateau_patience) {
            lr = std::max(lr * config.lr_decay, config.min_learning_rate);
            stale = 0;
        }
    }
    result.final_learning_rate = lr;
    return result;
}

}  // namespace lut4d
