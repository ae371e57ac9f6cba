#pragma once

// Run-configuration file: a sectioned key = value text format with fail-fast
// validation (unknown sections, unknown keys and duplicate keys are errors).
// `example_config()` documents every key with its default inline.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mushy/errors.hpp"
#include "mushy/experiment.hpp"
#include "mushy/limit.hpp"
#include "mushy/solver.hpp"

namespace mushy {

struct RunConfig {
    PhaseParams phase;
    int n = 64;
    double dt = 1e-4;
    double T = 0.25;
    double imex_a = 0.0;  // 0 = auto
    Scheme scheme = Scheme::ItoImex;
    FieldSpec x0 = FieldSpec::parse("constant -0.8 + blob 3.2 0.25 0.13 0.07");
    FieldSpec forcing;
    int diag_stride = 10;
    int snapshot_stride = 0;
    int noise_N = 8;
    std::uint64_t seed = 1;
    std::vector<int> Ns = {4, 8, 16, 32};
    int replicas = 64;
    HolderParams holder;
    int distance_stride = 10;
    double max_abort_fraction = 0.01;
    ModeIndex probe_mode{1, 0};

    bool operator==(const RunConfig&) const = default;

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.grid = TorusGrid(n);
        cfg.dt = dt;
        cfg.T = T;
        cfg.imex_a = imex_a;
        cfg.forcing = forcing;
        cfg.phase = PhaseFunctions(phase);
        cfg.noise = NoiseSpec(CoefficientFamily::flat(noise_N), cfg.grid, seed);
        cfg.scheme = scheme;
        cfg.diag_stride = diag_stride;
        cfg.snapshot_stride = snapshot_stride;
        cfg.validate();
        return cfg;
    }

    LimitConfig limit_config() const {
        LimitConfig cfg;
        cfg.grid = TorusGrid(n);
        cfg.dt = dt;
        cfg.T = T;
        cfg.imex_a = imex_a;
        cfg.forcing = forcing;
        cfg.phase = PhaseFunctions(phase);
        cfg.diag_stride = diag_stride;
        cfg.snapshot_stride = snapshot_stride;
        cfg.validate();
        return cfg;
    }

    ExperimentPlan plan() const {
        ExperimentPlan plan;
        plan.Ns = Ns;
        plan.replicas = replicas;
        plan.base_seed = seed;
        plan.grid = TorusGrid(n);
        plan.dt = dt;
        plan.T = T;
        plan.imex_a = imex_a;
        plan.phase = PhaseFunctions(phase);
        plan.forcing = forcing;
        plan.x0 = x0;
        plan.distance_stride = distance_stride;
        plan.holder = holder;
        plan.max_abort_fraction = max_abort_fraction;
        plan.probe_mode = probe_mode;
        plan.validate();
        return plan;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': cannot parse number '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': cannot parse integer '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': cannot parse unsigned integer '" + v + "'");
    }
}

inline std::string format_double(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig rc;
    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, bool> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = line.substr(1, line.size() - 2);
            if (section != "phase" && section != "grid" && section != "time" &&
                section != "noise" && section != "experiment")
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        if (seen[full])
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                              full + "'");
        seen[full] = true;

        if (section == "phase") {
            if (key == "C1") rc.phase.C1 = detail::parse_double(full, value);
            else if (key == "C2") rc.phase.C2 = detail::parse_double(full, value);
            else if (key == "k1") rc.phase.k1 = detail::parse_double(full, value);
            else if (key == "k2") rc.phase.k2 = detail::parse_double(full, value);
            else if (key == "latent_heat") rc.phase.latent_heat = detail::parse_double(full, value);
            else if (key == "delta") rc.phase.delta = detail::parse_double(full, value);
            else if (key == "eps") rc.phase.eps = detail::parse_double(full, value);
            else if (key == "eta_slope") rc.phase.eta_slope = detail::parse_double(full, value);
            else if (key == "eta_sat") rc.phase.eta_sat = detail::parse_double(full, value);
            else throw ConfigError("config: unknown key '" + full + "'");
        } else if (section == "grid") {
            if (key == "n") rc.n = static_cast<int>(detail::parse_int(full, value));
            else throw ConfigError("config: unknown key '" + full + "'");
        } else if (section == "time") {
            if (key == "dt") rc.dt = detail::parse_double(full, value);
            else if (key == "T") rc.T = detail::parse_double(full, value);
            else if (key == "imex_a")
                rc.imex_a = (value == "auto") ? 0.0 : detail::parse_double(full, value);
            else if (key == "scheme") {
                if (value == "ito_imex") rc.scheme = Scheme::ItoImex;
                else if (value == "stratonovich_midpoint") rc.scheme = Scheme::StratonovichMidpoint;
                else throw ConfigError("config: key '" + full + "': unknown scheme '" + value + "'");
            } else if (key == "x0") rc.x0 = FieldSpec::parse(value);
            else if (key == "forcing") rc.forcing = FieldSpec::parse(value);
            else if (key == "diag_stride") rc.diag_stride = static_cast<int>(detail::parse_int(full, value));
            else if (key == "snapshot_stride") rc.snapshot_stride = static_cast<int>(detail::parse_int(full, value));
            else throw ConfigError("config: unknown key '" + full + "'");
        } else if (section == "noise") {
            if (key == "N") rc.noise_N = static_cast<int>(detail::parse_int(full, value));
            else if (key == "seed") rc.seed = detail::parse_u64(full, value);
            else throw ConfigError("config: unknown key '" + full + "'");
        } else {  // experiment
            if (key == "Ns") {
                rc.Ns.clear();
                std::istringstream vs(value);
                std::string tok;
                while (vs >> tok) {
                    if (!tok.empty() && tok.back() == ',') tok.pop_back();
                    if (tok.empty()) continue;
                    rc.Ns.push_back(static_cast<int>(detail::parse_int(full, tok)));
                }
                if (rc.Ns.empty()) throw ConfigError("config: key '" + full + "': empty list");
            } else if (key == "replicas") rc.replicas = static_cast<int>(detail::parse_int(full, value));
            else if (key == "holder_beta") rc.holder.beta = detail::parse_double(full, value);
            else if (key == "holder_r") rc.holder.r = detail::parse_double(full, value);
            else if (key == "holder_pairs") rc.holder.pairs = static_cast<int>(detail::parse_int(full, value));
            else if (key == "distance_stride") rc.distance_stride = static_cast<int>(detail::parse_int(full, value));
            else if (key == "max_abort_fraction") rc.max_abort_fraction = detail::parse_double(full, value);
            else if (key == "probe_k1") rc.probe_mode.k1 = static_cast<int>(detail::parse_int(full, value));
            else if (key == "probe_k2") rc.probe_mode.k2 = static_cast<int>(detail::parse_int(full, value));
            else throw ConfigError("config: unknown key '" + full + "'");
        }
    }
    return rc;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Canonical serialization: parsing it reproduces the value exactly.
inline std::string serialize_config(const RunConfig& rc) {
    using detail::format_double;
    std::ostringstream out;
    out << "[phase]\n";
    out << "C1 = " << format_double(rc.phase.C1) << "\n";
    out << "C2 = " << format_double(rc.phase.C2) << "\n";
    out << "k1 = " << format_double(rc.phase.k1) << "\n";
    out << "k2 = " << format_double(rc.phase.k2) << "\n";
    out << "latent_heat = " << format_double(rc.phase.latent_heat) << "\n";
    out << "delta = " << format_double(rc.phase.delta) << "\n";
    out << "eps = " << format_double(rc.phase.eps) << "\n";
    out << "eta_slope = " << format_double(rc.phase.eta_slope) << "\n";
    out << "eta_sat = " << format_double(rc.phase.eta_sat) << "\n";
    out << "\n[grid]\n";
    out << "n = " << rc.n << "\n";
    out << "\n[time]\n";
    out << "dt = " << format_double(rc.dt) << "\n";
    out << "T = " << format_double(rc.T) << "\n";
    out << "imex_a = " << (rc.imex_a > 0.0 ? format_double(rc.imex_a) : std::string("auto")) << "\n";
    out << "scheme = "
        << (rc.scheme == Scheme::ItoImex ? "ito_imex" : "stratonovich_midpoint") << "\n";
    out << "x0 = " << rc.x0.to_string() << "\n";
    out << "forcing = " << rc.forcing.to_string() << "\n";
    out << "diag_stride = " << rc.diag_stride << "\n";
    out << "snapshot_stride = " << rc.snapshot_stride << "\n";
    out << "\n[noise]\n";
    out << "N = " << rc.noise_N << "\n";
    out << "seed = " << rc.seed << "\n";
    out << "\n[experiment]\n";
    out << "Ns =";
    for (int N : rc.Ns) out << " " << N;
    out << "\n";
    out << "replicas = " << rc.replicas << "\n";
    out << "holder_beta = " << format_double(rc.holder.beta) << "\n";
    out << "holder_r = " << format_double(rc.holder.r) << "\n";
    out << "holder_pairs = " << rc.holder.pairs << "\n";
    out << "distance_stride = " << rc.distance_stride << "\n";
    out << "max_abort_fraction = " << format_double(rc.max_abort_fraction) << "\n";
    out << "probe_k1 = " << rc.probe_mode.k1 << "\n";
    out << "probe_k2 = " << rc.probe_mode.k2 << "\n";
    return out.str();
}

inline std::string example_config() {
    return
        "# mushy run configuration (values shown are the defaults)\n"
        "\n"
        "[phase]\n"
        "C1 = 2            # solid specific heat (must exceed 1)\n"
        "C2 = 2            # liquid specific heat (must exceed 1)\n"
        "k1 = 1            # solid thermal conductivity\n"
        "k2 = 0.5          # liquid thermal conductivity\n"
        "latent_heat = 1\n"
        "delta = 0.1       # mushy-region width in temperature units\n"
        "eps = 0.05        # turbulence-onset threshold in temperature units\n"
        "eta_slope = 1     # slope of the turbulence profile past onset\n"
        "eta_sat = inf     # saturation level of the profile (inf: none)\n"
        "\n"
        "[grid]\n"
        "n = 64            # samples per dimension (even, >= 4)\n"
        "\n"
        "[time]\n"
        "dt = 0.0001\n"
        "T = 0.25\n"
        "imex_a = auto     # implicit spectral shift; auto = Lip(Psi) + Lip(g)\n"
        "scheme = ito_imex # ito_imex | stratonovich_midpoint\n"
        "x0 = constant -0.8 + blob 3.2 0.25 0.13 0.07\n"
        "forcing = zero    # zero | constant A | mode k1 k2 A | blob A w cx cy, joined by +\n"
        "diag_stride = 10      # steps between diagnostic samples\n"
        "snapshot_stride = 0   # steps between stored snapshots (0: initial/final only)\n"
        "\n"
        "[noise]\n"
        "N = 8             # truncation radius of the coefficient family\n"
        "seed = 1\n"
        "\n"
        "[experiment]      # used by `converge`\n"
        "Ns = 4 8 16 32    # truncation-radius ladder\n"
        "replicas = 64     # ensemble size per radius\n"
        "holder_beta = 5\n"
        "holder_r = 4\n"
        "holder_pairs = 64\n"
        "distance_stride = 10\n"
        "max_abort_fraction = 0.01\n"
        "probe_k1 = 1      # test mode of the stochastic-integral probe\n"
        "probe_k2 = 0\n";
}

}  // namespace mushy
