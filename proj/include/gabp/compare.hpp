#pragma once

#include "centralized.hpp"
#include "convergence.hpp"
#include "engine.hpp"
#include "model.hpp"

#include <limits>
#include <vector>

namespace gabp {

struct AgentError {
    AgentId id = 0;
    double mean_error = 0.0;  // ||mu_i - xhat_i||_inf
    double cov_error = 0.0;   // ||P_i - cov_i||_F
};

struct CompareReport {
    std::vector<AgentError> agents;
    double rho = 0.0;
    RunStatus status = RunStatus::MaxItersReached;
    int rounds = 0;
    double max_mean_error = 0.0;
    double max_cov_error = 0.0;
    double mean_scale = 0.0;  // max_i ||xhat_i||_inf, the scale relative errors are judged against
};

// Runs BP and the centralized oracle on the same model and reports per-agent
// deviations plus the analyzer's rho.
inline CompareReport compare(const PairwiseModel& model, const EngineConfig& config = {}) {
    const RunResult bp = run(model, config);
    const GlobalSystem sys = assemble(model);
    const CentralEstimate est = solve_map(sys);
    const ConvergenceVerdict verdict = decide(model);
    CompareReport rep;
    rep.rho = verdict.rho;
    rep.status = bp.status;
    rep.rounds = bp.rounds;
    for (AgentId i = 0; i < model.num_agents(); ++i) {
        const auto [mean_i, cov_i] = marginal(est, sys, i);
        AgentError err;
        err.id = i;
        const Vector& mu = bp.beliefs.mean[static_cast<size_t>(i)];
        err.mean_error = mu.allFinite() ? (mu - mean_i).lpNorm<Eigen::Infinity>()
                                        : std::numeric_limits<double>::infinity();
        err.cov_error = bp.beliefs.cov[static_cast<size_t>(i)].allFinite()
                            ? (bp.beliefs.cov[static_cast<size_t>(i)] - cov_i).norm()
                            : std::numeric_limits<double>::infinity();
        rep.max_mean_error = std::max(rep.max_mean_error, err.mean_error);
        rep.max_cov_error = std::max(rep.max_cov_error, err.cov_error);
        rep.mean_scale = std::max(rep.mean_scale, mean_i.lpNorm<Eigen::Infinity>());
        rep.agents.push_back(err);
    }
    return rep;
}

}  // namespace gabp
