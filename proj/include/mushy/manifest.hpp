#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mushy/errors.hpp"
#include "mushy/version.hpp"

namespace mushy {

inline std::uint64_t fnv1a64(const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x00000100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot hash missing artifact: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x00000100000001b3ull;
        }
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Reproducibility record written next to every command's outputs: the
/// resolved configuration, the noise-family summary, and a content hash per
/// emitted artifact.
struct RunManifest {
    std::string command;
    std::string config_text;
    std::uint64_t seed = 0;
    bool has_noise_summary = false;
    int noise_N = 0;
    double noise_c_N = 0.0;
    size_t noise_mode_count = 0;
    std::vector<std::string> status;

    struct Artifact {
        std::string path;  // relative to the output directory
        std::uint64_t bytes = 0;
        std::string fnv64;
    };
    std::vector<Artifact> artifacts;

    void note_noise(int N, double c_N, size_t modes) {
        has_noise_summary = true;
        noise_N = N;
        noise_c_N = c_N;
        noise_mode_count = modes;
    }

    void add_artifact(const std::filesystem::path& dir, const std::string& rel) {
        Artifact a;
        a.path = rel;
        const std::filesystem::path full = dir / rel;
        a.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(full));
        a.fnv64 = hex64(fnv1a64_file(full));
        artifacts.push_back(std::move(a));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool"] = "mushy";
        j["version"] = kVersion;
        const auto now = std::chrono::system_clock::now();
        j["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                                  now.time_since_epoch())
                                  .count();
        j["command"] = command;
        j["seed"] = seed;
        j["config"] = config_text;
        if (has_noise_summary) {
            j["noise"] = {{"N", noise_N},
                          {"c_N", noise_c_N},
                          {"seed", seed},
                          {"mode_count", noise_mode_count}};
        }
        j["status"] = status;
        j["artifacts"] = nlohmann::json::array();
        for (const Artifact& a : artifacts)
            j["artifacts"].push_back({{"path", a.path}, {"bytes", a.bytes}, {"fnv64", a.fnv64}});
        return j;
    }

    void write(const std::filesystem::path& dir) const {
        std::ofstream out(dir / "manifest.json");
        if (!out) throw ConfigError("cannot write manifest in " + dir.string());
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace mushy
