#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "mushy/errors.hpp"
#include "mushy/field.hpp"

namespace mushy {

// Field snapshot file: 16-byte header (magic "STFN", u32 version, u32 n,
// u32 reserved = 0), then n×n 64-bit little-endian floats, row-major with the
// first coordinate as the row.
inline constexpr char kSnapshotMagic[4] = {'S', 'T', 'F', 'N'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; byte swapping is not implemented");

inline void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open snapshot for writing: " + path.string());
    const std::uint32_t version = kSnapshotVersion;
    const std::uint32_t n = static_cast<std::uint32_t>(f.grid.n);
    const std::uint32_t reserved = 0;
    out.write(kSnapshotMagic, 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw ConfigError("short write on snapshot: " + path.string());
}

inline ScalarField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open snapshot: " + path.string());
    char magic[4];
    std::uint32_t version = 0, n = 0, reserved = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, kSnapshotMagic, 4) != 0)
        throw ConfigError("bad snapshot magic in " + path.string());
    if (version != kSnapshotVersion)
        throw ConfigError("unsupported snapshot version " + std::to_string(version));
    if (n < 4 || n % 2 != 0) throw ConfigError("bad snapshot grid size " + std::to_string(n));
    ScalarField f(TorusGrid(static_cast<int>(n)));
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated snapshot: " + path.string());
    f.refresh_mean();
    return f;
}

}  // namespace mushy
