#include "tslab/weights_io.hpp"

#include <cstring>
#include <fstream>

#include "tslab/errors.hpp"

namespace tslab {

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw IoError("load_weights: truncated file while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is, const std::string& what) {
    const std::uint32_t n = read_u32(is, what + " length");
    if (n > 4096) throw IoError("load_weights: implausible string length in " + what);
    std::string s(n, '\0');
    if (!is.read(s.data(), n)) throw IoError("load_weights: truncated file while reading " + what);
    return s;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        os.write(reinterpret_cast<const char*>(b), 8);
    }
}

void read_doubles(std::istream& is, std::vector<double>& v, const std::string& what) {
    for (double& d : v) {
        unsigned char b[8];
        if (!is.read(reinterpret_cast<char*>(b), 8))
            throw IoError("load_weights: truncated file while reading " + what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        std::memcpy(&d, &bits, 8);
    }
}

}  // namespace

void save_weights(Network& net, const NetSpec& spec, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_weights: cannot open '" + path + "' for writing");
    os.write(kWeightMagic, 4);
    write_u32(os, kWeightVersion);
    write_string(os, spec.format());
    write_u32(os, static_cast<std::uint32_t>(spec.window));
    write_u32(os, static_cast<std::uint32_t>(spec.channels));
    auto params = net.params();
    write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        write_string(os, p.name);
        write_u32(os, static_cast<std::uint32_t>(p.value->rows));
        write_u32(os, static_cast<std::uint32_t>(p.value->cols));
        write_doubles(os, p.value->data);
    }
    if (!os) throw IoError("save_weights: write failed for '" + path + "'");
}

LoadedNetwork load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_weights: cannot open '" + path + "'");
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kWeightMagic, 4) != 0)
        throw IoError("load_weights: '" + path + "' is not a weight file (bad magic)");
    const std::uint32_t version = read_u32(is, "version");
    if (version != kWeightVersion)
        throw ConfigError("load_weights: unsupported weight file version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kWeightVersion) + ")");
    const std::string spec_name = read_string(is, "spec");
    const int window = static_cast<int>(read_u32(is, "window"));
    const int channels = static_cast<int>(read_u32(is, "channels"));

    LoadedNetwork loaded;
    loaded.spec = parse_spec(spec_name, channels, window);
    loaded.net = build(loaded.spec);
    auto params = loaded.net.params();

    const std::uint32_t n = read_u32(is, "parameter count");
    if (n != params.size())
        throw ConfigError("load_weights: file has " + std::to_string(n) +
                          " parameter tensors, spec " + spec_name + " needs " +
                          std::to_string(params.size()));
    for (auto& p : params) {
        const std::string name = read_string(is, "parameter name");
        if (name != p.name)
            throw ConfigError("load_weights: parameter order mismatch: file has '" + name +
                              "', expected '" + p.name + "'");
        const int rows = static_cast<int>(read_u32(is, name + " rows"));
        const int cols = static_cast<int>(read_u32(is, name + " cols"));
        if (rows != p.value->rows || cols != p.value->cols)
            throw ConfigError("load_weights: shape mismatch for '" + name + "': file " +
                              std::to_string(rows) + "x" + std::to_string(cols) + ", spec " +
                              p.value->shape_str());
        read_doubles(is, p.value->data, name);
    }
    return loaded;
}

Network load_weights(const std::string& path, const NetSpec& expected) {
    LoadedNetwork loaded = load_weights(path);
    if (!(loaded.spec == expected))
        throw ConfigError("load_weights: file '" + path + "' holds " + loaded.spec.format() +
                          " (window " + std::to_string(loaded.spec.window) + ", channels " +
                          std::to_string(loaded.spec.channels) + "), expected " +
                          expected.format() + " (window " + std::to_string(expected.window) +
                          ", channels " + std::to_string(expected.channels) + ")");
    return std::move(loaded.net);
}

}  // namespace tslab
