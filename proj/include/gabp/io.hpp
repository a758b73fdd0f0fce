#pragma once

#include "compare.hpp"
#include "convergence.hpp"
#include "engine.hpp"
#include "model.hpp"

#include <cstdio>
#include <fstream>
#include <string>

namespace gabp {

constexpr int kFormatVersion = 1;

// Per-round trace, plot-ready. Decimals carry 17 significant digits so the
// file round-trips doubles exactly.
inline void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << "round,max_mean_delta,max_info_delta,messages,scalars\n";
    char buf[64];
    for (const TraceRow& row : trace) {
        out << row.round << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.max_mean_delta);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.max_info_delta);
        out << buf << ',' << row.messages << ',' << row.scalars << '\n';
    }
}

inline json beliefs_to_json(const PairwiseModel& model, const RunResult& result) {
    json out;
    out["format_version"] = kFormatVersion;
    out["status"] = to_string(result.status);
    out["rounds"] = result.rounds;
    out["beliefs"] = json::array();
    for (AgentId i = 0; i < model.num_agents(); ++i) {
        json b;
        b["id"] = i;
        b["mean"] = vector_to_json(result.beliefs.mean[static_cast<size_t>(i)]);
        b["cov"] = matrix_to_json(result.beliefs.cov[static_cast<size_t>(i)]);
        out["beliefs"].push_back(std::move(b));
    }
    return out;
}

inline json analyze_to_json(const AnalyzeReport& rep) {
    json out;
    out["format_version"] = kFormatVersion;
    out["rho"] = rep.rho;
    out["converges"] = rep.converges;
    out["margin"] = rep.margin;
    out["iterations"] = rep.iterations;
    out["residuals"] = rep.residuals;
    out["bounds_ok"] = rep.bounds_ok;
    out["q_dim"] = rep.q_dim;
    out["indeterminate"] = rep.indeterminate;
    if (rep.fixed_mean) out["fixed_mean"] = vector_to_json(*rep.fixed_mean);
    return out;
}

inline json compare_to_json(const CompareReport& rep) {
    json out;
    out["format_version"] = kFormatVersion;
    out["rho"] = rep.rho;
    out["status"] = to_string(rep.status);
    out["rounds"] = rep.rounds;
    out["agents"] = json::array();
    for (const AgentError& a : rep.agents) {
        json ja;
        ja["id"] = a.id;
        ja["mean_error"] = a.mean_error;
        ja["cov_error"] = a.cov_error;
        out["agents"].push_back(std::move(ja));
    }
    out["max_mean_error"] = rep.max_mean_error;
    out["max_cov_error"] = rep.max_cov_error;
    out["mean_scale"] = rep.mean_scale;
    return out;
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_json: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace gabp
