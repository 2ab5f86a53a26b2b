#include "lut4d/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lut4d/errors.hpp"

namespace lut4d {

void ModelConfig::validate() const {
    if (n_bin < 2) throw InvalidArgument("n_bin must be >= 2");
    if (n_ctx < 2) throw InvalidArgument("n_ctx must be >= 2");
    if (n_lut < 1) throw InvalidArgument("n_lut must be >= 1");
    if (context_width < 1) throw InvalidArgument("context width must be >= 1");
    if (param_widths.empty()) throw InvalidArgument("parameter encoder needs widths");
    if (encoder_resolution < 2) throw InvalidArgument("encoder resolution must be >= 2");
    if (fixed_context && !(*fixed_context >= 0.0 && *fixed_context <= 1.0)) {
        throw InvalidArgument("fixed context must lie in [0,1]");
    }
}

Model::Model(ModelConfig config)
    : config_((config.validate(), std::move(config))),
      context_(config_.context_width),
      params_(config_.param_widths, config_.n_lut, config_.encoder_resolution) {
    for (std::size_t n = 0; n < config_.n_lut; ++n) {
        basis_.emplace_back("basis" + std::to_string(n),
                            std::vector<std::size_t>{3, config_.n_ctx, config_.n_bin,
                                                     config_.n_bin, config_.n_bin});
    }
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
    Model m(config);
    m.set_basis(0, identity_lattice4(config.n_bin, config.n_ctx));
    std::mt19937_64 rng(seed);
    m.context_.init(rng);
    m.params_.init(rng);
    return m;
}

BasisBank Model::basis_bank() const {
    BasisBank bank;
    bank.reserve(basis_.size());
    for (const auto& p : basis_) bank.emplace_back(config_.n_bin, config_.n_ctx, p.value);
    return bank;
}

void Model::set_basis(std::size_t n, const Lattice4D& lut) {
    if (n >= basis_.size()) throw IndexError("basis index out of range");
    if (lut.n_bin() != config_.n_bin || lut.n_ctx() != config_.n_ctx) {
        throw ShapeError("basis LUT size does not match model");
    }
    basis_[n].value.assign(lut.values().begin(), lut.values().end());
}

nn::ParamRefs Model::parameters() {
    nn::ParamRefs refs;
    for (auto& b : basis_) refs.push_back(&b);
    context_.collect(refs);
    params_.collect(refs);
    return refs;
}

std::size_t Model::parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->size();
    return n;
}

void Model::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_unsigned_v<T>);
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw FormatError("<model>", "truncated model file");
    }
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
    return v;
}

void put_u32(std::ostream& os, std::size_t v) { put_le<std::uint32_t>(os, static_cast<std::uint32_t>(v)); }

void put_f32(std::ostream& os, double v) {
    put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

double get_f32(std::istream& is) {
    return static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(is)));
}

}  // namespace

void save_model(Model& model, std::ostream& os) {
    const ModelConfig& c = model.config();
    os.write(kModelMagic, sizeof(kModelMagic));
    put_u32(os, kModelVersion);
    put_u32(os, c.n_bin);
    put_u32(os, c.n_ctx);
    put_u32(os, c.n_lut);
    put_u32(os, c.context_width);
    put_u32(os, c.encoder_resolution);
    put_u32(os, c.param_widths.size());
    for (std::size_t w : c.param_widths) put_u32(os, w);
    put_le<std::uint8_t>(os, c.fixed_context ? 1 : 0);
    put_f32(os, c.fixed_context.value_or(0.0));
    for (const auto* p : model.parameters()) {
        put_le<std::uint64_t>(os, p->size());
        for (double v : p->value) put_f32(os, v);
    }
    if (!os) throw IoError("<model>", "write failed");
}

Model load_model(std::istream& is) {
    char magic[sizeof(kModelMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
        throw FormatError("<model>", "bad magic, not a LUT4DMODEL file");
    }
    const auto version = get_le<std::uint32_t>(is);
    if (version != kModelVersion) {
        throw FormatError("<model>", "unsupported model version " + std::to_string(version));
    }
    ModelConfig c;
    c.n_bin = get_le<std::uint32_t>(is);
    c.n_ctx = get_le<std::uint32_t>(is);
    c.n_lut = get_le<std::uint32_t>(is);
    c.context_width = get_le<std::uint32_t>(is);
    c.encoder_resolution = get_le<std::uint32_t>(is);
    const auto n_widths = get_le<std::uint32_t>(is);
    if (n_widths > 64) throw FormatError("<model>", "implausible encoder depth");
    c.param_widths.resize(n_widths);
    for (auto& w : c.param_widths) w = get_le<std::uint32_t>(is);
    const bool has_fixed = get_le<std::uint8_t>(is) != 0;
    const double fixed = get_f32(is);
    if (has_fixed) c.fixed_context = fixed;
    if (c.n_bin > 256 || c.n_ctx > 256 || c.n_lut > 64 || c.context_width > 4096 ||
        c.encoder_resolution > 4096) {
        throw FormatError("<model>", "implausible hyperparameters");
    }
    for (std::size_t w : c.param_widths) {
        if (w > 4096) throw FormatError("<model>", "implausible encoder width");
    }
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError("<model>", e.what());
    }

    Model model(c);
    for (auto* p : model.parameters()) {
        const auto len = get_le<std::uint64_t>(is);
        if (len != p->size()) {
            throw FormatError("<model>", p->name + ": buffer length " + std::to_string(len) +
                                             " != " + std::to_string(p->size()));
        }
        for (double& v : p->value) {
            v = get_f32(is);
            if (!std::isfinite(v)) throw FormatError("<model>", p->name + ": non-finite value");
        }
    }
    return model;
}

void save_model(Model& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(path, "cannot open for writing");
    save_model(model, os);
}

Model load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(path, "cannot open for reading");
    try {
        return load_model(is);
    } catch (const FormatError& e) {
        throw FormatError(path, e.what());
    }
}

}  // namespace lut4d
