#include "kgsys/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace kgsys {

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes;
    if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
        throw std::runtime_error("snapshot truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace

void write_field_snapshot(const std::filesystem::path& path, std::span<const ScalarField> fields) {
    if (fields.empty()) throw std::invalid_argument("snapshot needs at least one field");
    const auto& grid = fields.front().grid();
    for (const auto& f : fields)
        if (!(f.grid() == grid)) throw std::invalid_argument("snapshot fields must share a grid");

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write("KGDU", 4);
    put_le<std::uint32_t>(os, kSnapshotVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.dim()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.points()));
    put_le<double>(os, grid.half_length());
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(fields.size()));
    for (const auto& f : fields)
        for (double v : f.values()) put_le<double>(os, v);
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

FieldSnapshot read_field_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "KGDU", 4) != 0)
        throw std::runtime_error(path.string() + ": not a KGDU snapshot");
    const auto version = get_le<std::uint32_t>(is);
    if (version != kSnapshotVersion)
        throw std::runtime_error(path.string() + ": unsupported snapshot version " +
                                 std::to_string(version));
    const auto dim = get_le<std::uint32_t>(is);
    const auto points = get_le<std::uint32_t>(is);
    const auto half_length = get_le<double>(is);
    const auto count = get_le<std::uint32_t>(is);

    SpectralGrid grid(static_cast<int>(dim), static_cast<int>(points), half_length);
    FieldSnapshot snap{grid, {}};
    snap.fields.reserve(count);
    for (std::uint32_t f = 0; f < count; ++f) {
        std::vector<double> values(grid.size());
        for (auto& v : values) v = get_le<double>(is);
        snap.fields.emplace_back(grid, std::move(values));
    }
    return snap;
}

} // namespace kgsys
