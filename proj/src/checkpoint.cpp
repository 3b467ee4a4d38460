#include "modno/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "modno/errors.hpp"

namespace modno {

namespace {

constexpr char kMagic[9] = {'M', 'O', 'D', 'N', 'O', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError("checkpoint: truncated file: " + path);
    return v;
}

void write_f64s(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_f64s(std::istream& in, std::vector<double>& v, const std::string& path) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw IoError("checkpoint: truncated file: " + path);
}

std::uint32_t activation_id(Activation act) {
    switch (act) {
        case Activation::tanh_act: return 0;
        case Activation::relu: return 1;
        case Activation::sine: return 2;
    }
    throw ConfigError("checkpoint: unknown activation");
}

Activation activation_from_id(std::uint32_t id, const std::string& path) {
    switch (id) {
        case 0: return Activation::tanh_act;
        case 1: return Activation::relu;
        case 2: return Activation::sine;
        default: throw IoError("checkpoint: bad activation id in " + path);
    }
}

void write_network(std::ostream& out, const MlpParams& net) {
    write_u32(out, static_cast<std::uint32_t>(net.layer_sizes.size()));
    for (int s : net.layer_sizes) write_u32(out, static_cast<std::uint32_t>(s));
    write_u32(out, activation_id(net.activation));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        write_f64s(out, net.weights[l].data);
        write_f64s(out, net.biases[l].data);
    }
}

MlpParams read_network(std::istream& in, const std::string& path) {
    std::uint32_t n_layers = read_u32(in, path);
    if (n_layers < 3 || n_layers > 64) {
        throw IoError("checkpoint: implausible layer count in " + path);
    }
    MlpParams net;
    net.layer_sizes.resize(n_layers);
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        std::uint32_t s = read_u32(in, path);
        if (s == 0 || s > (1u << 24)) {
            throw IoError("checkpoint: implausible layer size in " + path);
        }
        net.layer_sizes[i] = static_cast<int>(s);
    }
    net.activation = activation_from_id(read_u32(in, path), path);
    for (std::uint32_t l = 0; l + 1 < n_layers; ++l) {
        int in_dim = net.layer_sizes[l];
        int out_dim = net.layer_sizes[l + 1];
        Matrix w(out_dim, in_dim);
        Matrix b(1, out_dim);
        read_f64s(in, w.data, path);
        read_f64s(in, b.data, path);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    net.check_consistent();
    return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModnoModel& model) {
    model.check_consistent();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(1 + model.trunks.size()));
    write_network(out, model.shared_branch);
    for (const MlpParams& trunk : model.trunks) write_network(out, trunk);
    out.flush();
    if (!out) throw IoError("checkpoint: write failed: " + path);
}

ModnoModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open: " + path);
    char magic[sizeof(kMagic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("checkpoint: bad magic in " + path);
    }
    std::uint32_t version = read_u32(in, path);
    if (version != kVersion) {
        throw IoError("checkpoint: unsupported format version in " + path);
    }
    std::uint32_t n_networks = read_u32(in, path);
    if (n_networks < 2) {
        throw IoError("checkpoint: needs a branch and at least one trunk: " + path);
    }

    ModnoModel model;
    model.shared_branch = read_network(in, path);
    model.n_sensors = model.shared_branch.input_dim();
    model.basis_count = model.shared_branch.output_dim();
    for (std::uint32_t i = 1; i < n_networks; ++i) {
        MlpParams trunk = read_network(in, path);
        model.query_dims.push_back(trunk.input_dim());
        model.trunks.push_back(std::move(trunk));
    }
    model.check_consistent();
    return model;
}

}  // namespace modno
