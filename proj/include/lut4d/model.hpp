#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lut4d/fusion.hpp"
#include "lut4d/lattice.hpp"
#include "lut4d/nnet.hpp"

namespace lut4d {

struct ModelConfig {
    std::size_t n_bin = 33;
    std::size_t n_ctx = 2;
    std::size_t n_lut = 3;
    std::size_t context_width = 32;
    std::vector<std::size_t> param_widths{16, 32, 64, 128, 128};
    std::size_t encoder_resolution = 64;
    // When set, the context encoder is bypassed and every pixel gets this
    // context value (the constant-context / 3D-equivalent ablation).
    std::optional<double> fixed_context;

    void validate() const;
};

// Basis LUTs plus both encoders.
class Model {
public:
    explicit Model(ModelConfig config);

    // Basis 0 = identity, others zero; encoders randomly initialized from
    // `seed` with the parameter head selecting basis 0. Output == input.
    static Model create(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const noexcept { return config_; }

    std::vector<nn::ParamTensor>& basis() noexcept { return basis_; }
    const std::vector<nn::ParamTensor>& basis() const noexcept { return basis_; }
    BasisBank basis_bank() const;
    void set_basis(std::size_t n, const Lattice4D& lut);

    nn::ContextEncoder& context_encoder() noexcept { return context_; }
    nn::ParameterEncoder& parameter_encoder() noexcept { return params_; }

    // Declaration order: basis LUTs, context encoder, parameter encoder.
    nn::ParamRefs parameters();
    std::size_t parameter_count();
    void zero_grad();

private:
    ModelConfig config_;
    std::vector<nn::ParamTensor> basis_;
    nn::ContextEncoder context_;
    nn::ParameterEncoder params_;
};

// Binary container: magic "LUT4DMODEL\0", u32 version, hyperparameters, then
// every parameter buffer in declaration order as a u64 length followed by
// little-endian float32 values.
inline constexpr char kModelMagic[11] = {'L', 'U', 'T', '4', 'D', 'M', 'O', 'D', 'E', 'L', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(Model& model, std::ostream& os);
Model load_model(std::istream& is);
void save_model(Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace lut4d
