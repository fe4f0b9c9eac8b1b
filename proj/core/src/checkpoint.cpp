#include "segforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "segforge/error.hpp"

namespace segforge {

namespace {

// Fixed little-endian layout; this code targets little-endian hosts.
static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::filesystem::path& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (is.gcount() != sizeof(T)) throw TruncatedFileError("checkpoint truncated: " + path.string());
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(kCheckpointMagic, 4);
    write_pod<uint32_t>(f, ckpt.version);
    write_pod<uint64_t>(f, ckpt.meta_json.size());
    f.write(ckpt.meta_json.data(), static_cast<std::streamsize>(ckpt.meta_json.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        write_pod<uint32_t>(f, static_cast<uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<uint32_t>(f, static_cast<uint32_t>(tensor.rank()));
        for (int64_t e : tensor.shape()) write_pod<uint64_t>(f, static_cast<uint64_t>(e));
        f.write(reinterpret_cast<const char*>(tensor.data().data()),
                static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
    }
    if (!f) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (f.gcount() != 4 || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        throw MalformedFileError("not a checkpoint (bad magic): " + path.string());
    }
    Checkpoint ckpt;
    ckpt.version = read_pod<uint32_t>(f, path);
    if (ckpt.version != kCheckpointVersion) {
        throw MalformedFileError("unsupported checkpoint version " + std::to_string(ckpt.version) +
                                 " in " + path.string());
    }
    const uint64_t meta_len = read_pod<uint64_t>(f, path);
    ckpt.meta_json.resize(meta_len);
    f.read(ckpt.meta_json.data(), static_cast<std::streamsize>(meta_len));
    if (static_cast<uint64_t>(f.gcount()) != meta_len) {
        throw TruncatedFileError("checkpoint metadata truncated: " + path.string());
    }
    while (true) {
        uint32_t name_len = 0;
        f.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        if (f.gcount() == 0) break; // clean EOF
        if (f.gcount() != sizeof(name_len)) {
            throw TruncatedFileError("checkpoint truncated: " + path.string());
        }
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        if (static_cast<uint32_t>(f.gcount()) != name_len) {
            throw TruncatedFileError("checkpoint truncated: " + path.string());
        }
        const uint32_t rank = read_pod<uint32_t>(f, path);
        Shape shape(rank);
        for (uint32_t d = 0; d < rank; ++d) {
            shape[d] = static_cast<int64_t>(read_pod<uint64_t>(f, path));
        }
        const int64_t n = shape_numel(shape);
        std::vector<double> data(static_cast<size_t>(n));
        f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (f.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
            throw TruncatedFileError("checkpoint tensor '" + name + "' truncated: " + path.string());
        }
        ckpt.tensors.emplace_back(std::move(name), Tensor::from_data(std::move(shape), std::move(data)));
    }
    return ckpt;
}

} // namespace segforge
