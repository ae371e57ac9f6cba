#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mushy/experiment.hpp"
#include "mushy/limit.hpp"
#include "mushy/solver.hpp"

namespace mushy {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    return out;
}

/// Columns: t, l2_energy, h1_dissipation_integral, mean, margin. The margin
/// column carries the energy-inequality margin when F = 0 and nan otherwise.
inline void write_diagnostics_csv(const std::filesystem::path& path, const PathDiagnostics& diag,
                                  const SolverConfig& cfg) {
    std::ofstream out = open_out(path);
    out << "t,l2_energy,h1_dissipation_integral,mean,margin\n";
    const bool with_margin = cfg.forcing.is_zero() && !diag.times.empty();
    const double e0 = with_margin ? diag.l2_energy.front() : 0.0;
    const double psi0 = cfg.phase.psi0();
    for (size_t i = 0; i < diag.times.size(); ++i) {
        const double margin = with_margin
                                  ? diag.l2_energy[i] + 2.0 * psi0 * diag.h1_dissipation[i] - e0
                                  : std::numeric_limits<double>::quiet_NaN();
        out << fmt17(diag.times[i]) << "," << fmt17(diag.l2_energy[i]) << ","
            << fmt17(diag.h1_dissipation[i]) << "," << fmt17(diag.mean_series[i]) << ","
            << fmt17(margin) << "\n";
    }
}

inline void write_enhancement_csv(const std::filesystem::path& path,
                                  const EnhancementReport& rep) {
    std::ofstream out = open_out(path);
    out << "t,liquid_fraction_with_g,liquid_fraction_without_g\n";
    for (size_t i = 0; i < rep.times.size(); ++i)
        out << fmt17(rep.times[i]) << "," << fmt17(rep.liquid_fraction_with_g[i]) << ","
            << fmt17(rep.liquid_fraction_without_g[i]) << "\n";
}

inline nlohmann::json report_to_json(const ConvergenceReport& rep) {
    nlohmann::json j;
    j["base_seed"] = rep.base_seed;
    j["replicas"] = rep.replicas;
    j["holder"] = {{"beta", rep.holder.beta}, {"r", rep.holder.r}, {"pairs", rep.holder.pairs}};
    j["probe_mode"] = {rep.probe_mode.k1, rep.probe_mode.k2};
    j["rows"] = nlohmann::json::array();
    for (const ConvergenceRow& row : rep.rows) {
        nlohmann::json r;
        r["N"] = row.N;
        r["c_N"] = row.c_N;
        r["mean_distance"] = row.mean_distance;
        r["max_distance"] = row.max_distance;
        r["std_error"] = row.std_error;
        r["mean_truncated"] = row.mean_truncated;
        r["martingale_stat"] = row.martingale_stat;
        if (row.holder_exponent)
            r["holder_exponent"] = *row.holder_exponent;
        else
            r["holder_exponent"] = nullptr;
        r["aborted"] = row.aborted;
        j["rows"].push_back(std::move(r));
    }
    j["abort_log"] = rep.abort_log;
    return j;
}

inline void write_report_files(const std::filesystem::path& dir, const ConvergenceReport& rep) {
    {
        std::ofstream out = open_out(dir / "report.json");
        out << report_to_json(rep).dump(2) << "\n";
    }
    {
        std::ofstream out = open_out(dir / "report.csv");
        out << "N,c_N,mean_distance,max_distance,std_error,mean_truncated,martingale_stat,"
               "holder_exponent,aborted\n";
        for (const ConvergenceRow& row : rep.rows) {
            out << row.N << "," << fmt17(row.c_N) << "," << fmt17(row.mean_distance) << ","
                << fmt17(row.max_distance) << "," << fmt17(row.std_error) << ","
                << fmt17(row.mean_truncated) << "," << fmt17(row.martingale_stat) << ","
                << (row.holder_exponent ? fmt17(*row.holder_exponent) : std::string()) << ","
                << row.aborted << "\n";
        }
    }
    {
        std::ofstream out = open_out(dir / "plotdata.csv");
        out << "N,c_N,d_N,std_error\n";
        for (const ConvergenceRow& row : rep.rows)
            out << row.N << "," << fmt17(row.c_N) << "," << fmt17(row.mean_distance) << ","
                << fmt17(row.std_error) << "\n";
    }
}

}  // namespace mushy
