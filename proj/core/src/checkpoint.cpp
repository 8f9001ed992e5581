#include "ctsynth/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace ctsynth {

namespace {

constexpr char kMagic[4] = {'C', 'K', 'P', 'T'};

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    put_u32(os, static_cast<std::uint32_t>(v));
    put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

void put_i64(std::ostream& os, std::int64_t v) { put_u64(os, static_cast<std::uint64_t>(v)); }

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t lo = get_u32(is);
    std::uint64_t hi = get_u32(is);
    return lo | (hi << 32);
}

std::int64_t get_i64(std::istream& is) { return static_cast<std::int64_t>(get_u64(is)); }

double get_f64(std::istream& is) {
    std::uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_tensor(std::ostream& os, const NamedTensorF32& t) {
    put_u32(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

NamedTensorF32 get_tensor(std::istream& is, const std::string& path) {
    NamedTensorF32 t;
    const std::uint32_t name_len = get_u32(is);
    if (!is || name_len > 4096) throw error(errc::truncated_file, "bad tensor name in " + path);
    t.name.resize(name_len);
    is.read(t.name.data(), name_len);
    const std::uint32_t ndim = get_u32(is);
    if (!is || ndim > 8) throw error(errc::truncated_file, "bad tensor rank in " + path);
    std::uint64_t numel = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        const std::uint32_t d = get_u32(is);
        if (d == 0) throw error(errc::truncated_file, "zero tensor extent in " + path);
        t.shape.push_back(static_cast<std::int64_t>(d));
        numel *= d;
    }
    if (numel > (std::uint64_t(1) << 32))
        throw error(errc::truncated_file, "oversized tensor in " + path);
    t.data.resize(static_cast<std::size_t>(numel));
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(numel * sizeof(float)));
    if (static_cast<std::uint64_t>(is.gcount()) != numel * sizeof(float))
        throw error(errc::truncated_file, "tensor payload ends early in " + path);
    return t;
}

void put_tensor_list(std::ostream& os, const std::vector<NamedTensorF32>& ts) {
    put_u32(os, static_cast<std::uint32_t>(ts.size()));
    for (const auto& t : ts) put_tensor(os, t);
}

std::vector<NamedTensorF32> get_tensor_list(std::istream& is, const std::string& path) {
    const std::uint32_t count = get_u32(is);
    if (!is || count > (1u << 20)) throw error(errc::truncated_file, "bad tensor count in " + path);
    std::vector<NamedTensorF32> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(get_tensor(is, path));
    return out;
}

} // namespace

void save_checkpoint(const std::string& path, const CheckpointData& ckpt) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error(errc::io_failure, "cannot create " + path);

    f.write(kMagic, 4);
    put_u32(f, ckpt.version);
    put_tensor_list(f, ckpt.gen_params);
    put_tensor_list(f, ckpt.disc_params);
    put_tensor_list(f, ckpt.opt_tensors);
    put_i64(f, ckpt.opt_g_step);
    put_i64(f, ckpt.opt_d_step);

    const auto& g = ckpt.gen_cfg;
    put_i64(f, g.edge);
    put_i64(f, g.in_channels);
    put_i64(f, g.base_channels);
    put_i64(f, g.depth);
    put_i64(f, g.kernel);
    put_u32(f, g.noise_channel ? 1 : 0);

    const auto& d = ckpt.disc_cfg;
    put_i64(f, d.edge);
    put_i64(f, d.in_channels);
    put_i64(f, d.base_channels);
    put_i64(f, d.layers);
    put_i64(f, d.kernel);

    const auto& t = ckpt.train_cfg;
    put_i64(f, t.epochs);
    put_i64(f, t.batch_size);
    put_f64(f, t.lambda_l1);
    put_u64(f, t.seed);
    put_u32(f, t.gen_loss_mode == GenLossMode::saturating ? 1 : 0);
    put_f64(f, t.adam.lr);
    put_f64(f, t.adam.beta1);
    put_f64(f, t.adam.beta2);
    put_f64(f, t.adam.eps);
    put_i64(f, t.checkpoint_every);
    put_i64(f, t.noise_peak);

    put_i64(f, ckpt.epoch);
    put_u64(f, ckpt.rng_seed);
    put_u64(f, ckpt.rng_state);

    if (!f) throw error(errc::io_failure, "write failed for " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error(errc::io_failure, "cannot open " + path);

    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw error(errc::bad_magic, "not a checkpoint file: " + path);

    CheckpointData ckpt;
    ckpt.version = get_u32(f);
    if (ckpt.version != 1)
        throw error(errc::invalid_params, "unsupported checkpoint version in " + path);

    ckpt.gen_params = get_tensor_list(f, path);
    ckpt.disc_params = get_tensor_list(f, path);
    ckpt.opt_tensors = get_tensor_list(f, path);
    ckpt.opt_g_step = get_i64(f);
    ckpt.opt_d_step = get_i64(f);

    auto& g = ckpt.gen_cfg;
    g.edge = get_i64(f);
    g.in_channels = get_i64(f);
    g.base_channels = get_i64(f);
    g.depth = get_i64(f);
    g.kernel = get_i64(f);
    g.noise_channel = get_u32(f) != 0;

    auto& d = ckpt.disc_cfg;
    d.edge = get_i64(f);
    d.in_channels = get_i64(f);
    d.base_channels = get_i64(f);
    d.layers = get_i64(f);
    d.kernel = get_i64(f);

    auto& t = ckpt.train_cfg;
    t.epochs = get_i64(f);
    t.batch_size = get_i64(f);
    t.lambda_l1 = get_f64(f);
    t.seed = get_u64(f);
    t.gen_loss_mode = get_u32(f) == 1 ? GenLossMode::saturating : GenLossMode::non_saturating;
    t.adam.lr = get_f64(f);
    t.adam.beta1 = get_f64(f);
    t.adam.beta2 = get_f64(f);
    t.adam.eps = get_f64(f);
    t.checkpoint_every = get_i64(f);
    t.noise_peak = get_i64(f);

    ckpt.epoch = get_i64(f);
    ckpt.rng_seed = get_u64(f);
    ckpt.rng_state = get_u64(f);

    if (!f) throw error(errc::truncated_file, "checkpoint ends early: " + path);
    return ckpt;
}

} // namespace ctsynth
