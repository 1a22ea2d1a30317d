#pragma once

// Binary field snapshots. Little-endian layout:
//   char[4]  magic "KGDU"
//   u32      version (1)
//   u32      dim
//   u32      points per axis
//   f64      box half length
//   u32      field count
//   f64[...] field values, field after field, row-major

#include "kgsys/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace kgsys {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct FieldSnapshot {
    SpectralGrid grid;
    std::vector<ScalarField> fields;
};

void write_field_snapshot(const std::filesystem::path& path, std::span<const ScalarField> fields);
/// Throws std::runtime_error on a bad magic, unsupported version, or truncation.
FieldSnapshot read_field_snapshot(const std::filesystem::path& path);

} // namespace kgsys
