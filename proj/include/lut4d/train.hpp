#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lut4d/fusion.hpp"
#include "lut4d/image.hpp"
#include "lut4d/lattice.hpp"
#include "lut4d/model.hpp"

namespace lut4d {

struct TrainConfig {
    double learning_rate = 1e-4;
    // Per-group step sizes relative to learning_rate (basis LUT entries use
    // learning_rate itself).
    double context_lr_scale = 1.0;
    double param_lr_scale = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t iterations = 200;
    double alpha_s = 1e-4;
    double alpha_m = 10.0;
    double crop_min = 0.6;
    double crop_max = 1.0;
    double flip_probability = 0.5;
    double lr_decay = 0.2;
    std::size_t plateau_patience = 20;  // epochs
    double min_learning_rate = 1e-6;
    std::uint64_t seed = 1;
    // Written with the current model state when training aborts on NaN.
    std::optional<std::string> dump_path;

    void validate() const;
};

// Desk-scale schedule used by the CLI defaults and the acceptance suite.
TrainConfig desk_train_config();
ModelConfig desk_model_config();

struct SamplePair {
    Image input;
    Image gt;
};

struct PipelineResult {
    Image enhanced;
    ContextMap context;
    FusionCoefficients coef;
    Lattice4D fused;
};

// encoders -> fusion -> quadrilinear interpolation.
PipelineResult forward_pipeline(Model& model, const Image& image);

struct LossBreakdown {
    double total = 0.0;
    double reconstruction = 0.0;
    double smooth = 0.0;
    double monotonic = 0.0;
};

// Mean squared error over all pixels and channels.
double reconstruction_loss(const Image& pred, const Image& gt);

LossBreakdown total_loss(const Image& pred, const Image& gt, const Lattice4D& fused,
                         const FusionCoefficients& coef, double alpha_s, double alpha_m);

// Forward + backward on one pair; parameter gradients are accumulated into
// the model (call zero_grad() first). Returns the loss terms.
LossBreakdown compute_gradients(Model& model, const SamplePair& pair, double alpha_s,
                                double alpha_m);

// Bias-corrected Adam; `step` counts from 1.
void adam_step(nn::ParamTensor& p, double lr, double beta1, double beta2, double epsilon,
               std::size_t step);
void adam_step(const nn::ParamRefs& params, const TrainConfig& config, double lr,
               std::size_t step);
// Applies the per-group rates (basis LUTs vs encoders) of `config`.
void adam_step(Model& model, const TrainConfig& config, double lr, std::size_t step);

struct AugmentChoice {
    std::size_t top = 0, left = 0, height = 0, width = 0;
    bool flip = false;
};

AugmentChoice draw_augment(std::size_t height, std::size_t width, const TrainConfig& config,
                           std::mt19937_64& rng);
SamplePair apply_augment(const SamplePair& pair, const AugmentChoice& choice);
SamplePair augment(const SamplePair& pair, const TrainConfig& config, std::mt19937_64& rng);

Image hflip(const Image& img);
Image crop(const Image& img, std::size_t top, std::size_t left, std::size_t height,
           std::size_t width);

// Two-region synthetic pairs split at a random row. Both regions share one
// smooth color field plus a +-0.2 checker: 1-pixel cells in the textured
// region, 8-pixel blocks in the smooth one, so both cover the same colors.
// The ground truth boosts the checker contrast of the textured region and
// leaves the smooth region unchanged.
struct SynthSample {
    SamplePair pair;
    std::vector<std::uint8_t> region;  // per pixel, 0 = smooth, 1 = textured
};

std::vector<SynthSample> synth_dataset_labeled(std::size_t n_samples, std::size_t height,
                                               std::size_t width, std::uint64_t seed);
std::vector<SamplePair> synth_dataset(std::size_t n_samples, std::size_t height,
                                      std::size_t width, std::uint64_t seed);

struct LossRecord {
    std::size_t iteration = 0;
    LossBreakdown loss;
    double learning_rate = 0.0;

    friend bool operator==(const LossRecord& a, const LossRecord& b) {
        return a.iteration == b.iteration && a.loss.total == b.loss.total &&
               a.loss.reconstruction == b.loss.reconstruction && a.loss.smooth == b.loss.smooth &&
               a.loss.monotonic == b.loss.monotonic && a.learning_rate == b.learning_rate;
    }
};

struct TrainResult {
    std::vector<LossRecord> history;
    double final_learning_rate = 0.0;
};

// Split used by train_loop: the last ceil(n/8) pairs validate, the rest
// train. With fewer than two pairs both splits are the whole set.
struct Split {
    std::vector<std::size_t> train, val;
};
Split train_val_split(std::size_t n);

// Sequential batch-size-1 training. Writes `iter,loss_total,loss_r,loss_s,loss_m,lr`
// lines to `log` when given. Throws NumericError on a non-finite loss.
TrainResult train_loop(Model& model, const std::vector<SamplePair>& dataset,
                       const TrainConfig& config, std::ostream* log = nullptr);

void write_log_header(std::ostream& os);
void write_log_line(std::ostream& os, const LossRecord& rec);

// Mean reconstruction loss of the model over whole (unaugmented) pairs.
double mean_mse(Model& model, const std::vector<SamplePair>& pairs);

}  // namespace lut4d
