#pragma once

#include "model.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace gabp {

struct InitNotPsd : std::runtime_error {
    explicit InitNotPsd(const std::string& what) : std::runtime_error(what) {}
};

// Messages live in information form: the f2v update produces eta = Lambda*v
// directly (never a covariance times anything), which keeps round 0 well
// defined even when Lambda is singular there.
struct FactorToVariableMsg {
    Matrix info_matrix;  // Lambda_{f_ij -> t}, N_t x N_t, PSD (PD for rounds >= 1)
    Vector info_vector;  // eta_{f_ij -> t}
};

struct VariableToFactorMsg {
    Matrix info_matrix;  // Lambda_{j -> f_ij} = W_j^{-1} + sum of incoming f2v infos, PD
    Vector mean;         // v_{j -> f_ij}
};

// Both message stacks are indexed by the model's canonical directed-message
// slots: slot (edge e, agent a) is the f2v message f_e -> a and the v2f
// message a -> f_e.
struct MessageState {
    std::vector<FactorToVariableMsg> f2v;
    std::vector<VariableToFactorMsg> v2f;
    int round = 0;
};

struct InitZero {};
struct InitUpperBound {};
struct InitGivenPsd {
    std::vector<Matrix> info_matrices;               // per slot, PSD
    std::optional<std::vector<Vector>> info_vectors;  // per slot; zero when absent
};
using InitPolicy = std::variant<InitZero, InitUpperBound, InitGivenPsd>;

enum class RunStatus { Converged, MaxItersReached, Diverged };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "converged";
        case RunStatus::MaxItersReached: return "max_iters_reached";
        case RunStatus::Diverged: return "diverged";
    }
    return "?";
}

struct BeliefSet {
    std::vector<Vector> mean;  // mu_i
    std::vector<Matrix> cov;   // P_i
};

struct TraceRow {
    int round = 0;
    double max_mean_delta = 0.0;  // max_i ||mu_i^(l) - mu_i^(l-1)||_inf
    double max_info_delta = 0.0;  // max over f2v slots of Frobenius delta
    long messages = 0;
    long scalars = 0;
};
using RunTrace = std::vector<TraceRow>;

struct EngineConfig {
    int max_iters = -1;              // <0 means the default 10*M
    double eta = 1e-9;               // belief-mean termination threshold
    InitPolicy init = InitZero{};
    double divergence_guard = 1e12;  // trip when any ||mu_i||_inf exceeds this
};

struct RunResult {
    BeliefSet beliefs;
    RunTrace trace;
    RunStatus status = RunStatus::MaxItersReached;
    int rounds = 0;
};

// Per-message envelope ceiling U = coef_t^T R^{-1} coef_t: no f2v information
// matrix can exceed it, so it doubles as the UpperBound starting state.
inline Matrix upper_bound_block(const PairwiseModel& model, int slot_idx) {
    const DirectedMessage& s = model.directed_messages()[static_cast<size_t>(slot_idx)];
    const Matrix& at = model.coef_of(s.edge, s.agent);
    return numerics::symmetrize(at.transpose() * numerics::spd_solve(model.edge(s.edge).noise_cov, at, "upper_bound_block"));
}

inline MessageState init_messages(const PairwiseModel& model, const InitPolicy& policy = InitZero{}) {
    const auto& slots = model.directed_messages();
    MessageState st;
    st.round = 0;
    st.f2v.resize(slots.size());
    st.v2f.resize(slots.size());
    for (size_t s = 0; s < slots.size(); ++s) {
        const int d = model.dim(slots[s].agent);
        st.f2v[s].info_matrix = Matrix::Zero(d, d);
        st.f2v[s].info_vector = Vector::Zero(d);
        // v2f entries are placeholders until the first round derives them
        st.v2f[s].info_matrix = Matrix::Zero(d, d);
        st.v2f[s].mean = Vector::Zero(d);
    }
    if (std::holds_alternative<InitUpperBound>(policy)) {
        for (size_t s = 0; s < slots.size(); ++s)
            st.f2v[s].info_matrix = upper_bound_block(model, static_cast<int>(s));
    } else if (const auto* given = std::get_if<InitGivenPsd>(&policy)) {
        if (given->info_matrices.size() != slots.size())
            throw std::invalid_argument("init_messages: GivenPsd needs one matrix per directed message");
        for (size_t s = 0; s < slots.size(); ++s) {
            const Matrix& m = given->info_matrices[s];
            const int d = model.dim(slots[s].agent);
            if (m.rows() != d || m.cols() != d)
                throw std::invalid_argument("init_messages: GivenPsd matrix shape mismatch");
            if (!numerics::is_psd(m)) throw InitNotPsd("init_messages: initial info matrix not PSD");
            st.f2v[s].info_matrix = m;
        }
        if (given->info_vectors) {
            if (given->info_vectors->size() != slots.size())
                throw std::invalid_argument("init_messages: GivenPsd needs one vector per directed message");
            for (size_t s = 0; s < slots.size(); ++s) st.f2v[s].info_vector = (*given->info_vectors)[s];
        }
    }
    return st;
}

// v2f update: gather round-(l-1) f2v messages into j's outgoing message
// toward the factor of `edge_idx`, excluding that factor's own contribution.
inline VariableToFactorMsg variable_to_factor(const PairwiseModel& model, const MessageState& state,
                                              int edge_idx, AgentId source) {
    const int d = model.dim(source);
    Matrix lam = numerics::spd_inverse(model.agent(source).prior_cov, "variable_to_factor: W");
    Vector eta = Vector::Zero(d);
    const auto& slots = model.slots_of_agent(source);
    for (int s : slots) {
        if (model.directed_messages()[static_cast<size_t>(s)].edge == edge_idx) continue;
        lam += state.f2v[static_cast<size_t>(s)].info_matrix;
        eta += state.f2v[static_cast<size_t>(s)].info_vector;
    }
    VariableToFactorMsg out;
    out.info_matrix = numerics::symmetrize(lam);
    out.mean = numerics::spd_solve(out.info_matrix, eta, "variable_to_factor: Lambda");
    return out;
}

// f2v update: S = R + coef_src * C_{src->f} * coef_src^T, then project onto
// the target's coefficient. Uses the v2f messages already in `state`.
inline FactorToVariableMsg factor_to_variable(const PairwiseModel& model, const MessageState& state,
                                              int edge_idx, AgentId target) {
    const EdgeObservation& ed = model.edge(edge_idx);
    const AgentId source = model.other_end(edge_idx, target);
    const Matrix& at = model.coef_of(edge_idx, target);
    const Matrix& as = model.coef_of(edge_idx, source);
    const int src_slot = model.slot_of(edge_idx, source);
    const VariableToFactorMsg& in = state.v2f[static_cast<size_t>(src_slot)];
    const Matrix c_src = numerics::spd_inverse(in.info_matrix, "factor_to_variable: v2f info");
    const Matrix s_mat = numerics::symmetrize(ed.noise_cov + as * c_src * as.transpose());
    const Matrix sinv_at = numerics::spd_solve(s_mat, at, "factor_to_variable: S");
    FactorToVariableMsg out;
    out.info_matrix = numerics::symmetrize(at.transpose() * sinv_at);
    out.info_vector = sinv_at.transpose() * (ed.obs - as * in.mean);
    return out;
}

// One synchronous round: every v2f from the previous round's f2v stack, then
// every f2v from the fresh v2f stack. Slots never read each other's output
// within a phase, so the result is independent of update order (and of the
// GABP_THREADS worker count).
inline MessageState sync_round(const PairwiseModel& model, const MessageState& state) {
    const auto& slots = model.directed_messages();
    const int n = static_cast<int>(slots.size());
    MessageState next;
    next.round = state.round + 1;
    next.f2v.resize(slots.size());
    next.v2f.resize(slots.size());
    parallel_for(n, [&](int s) {
        next.v2f[static_cast<size_t>(s)] =
            variable_to_factor(model, state, slots[static_cast<size_t>(s)].edge, slots[static_cast<size_t>(s)].agent);
    });
    parallel_for(n, [&](int s) {
        next.f2v[static_cast<size_t>(s)] =
            factor_to_variable(model, next, slots[static_cast<size_t>(s)].edge, slots[static_cast<size_t>(s)].agent);
    });
    return next;
}

// Belief assembly with the prior factor included: P_i^{-1} = W_i^{-1} + sum
// of incoming f2v infos. The W_i^{-1} term is load-bearing: only with it does
// the two-agent model reproduce the centralized posterior.
inline BeliefSet beliefs(const PairwiseModel& model, const MessageState& state) {
    const int m = model.num_agents();
    BeliefSet out;
    out.mean.resize(static_cast<size_t>(m));
    out.cov.resize(static_cast<size_t>(m));
    parallel_for(m, [&](int i) {
        const int d = model.dim(i);
        Matrix prec = numerics::spd_inverse(model.agent(i).prior_cov, "beliefs: W");
        Vector eta = Vector::Zero(d);
        for (int s : model.slots_of_agent(i)) {
            prec += state.f2v[static_cast<size_t>(s)].info_matrix;
            eta += state.f2v[static_cast<size_t>(s)].info_vector;
        }
        out.cov[static_cast<size_t>(i)] = numerics::symmetrize(numerics::spd_inverse(numerics::symmetrize(prec), "beliefs: P"));
        out.mean[static_cast<size_t>(i)] = out.cov[static_cast<size_t>(i)] * eta;
    });
    return out;
}

// Communication cost of one synchronous round: every directed slot carries
// one v2f and one f2v message; each message moves a dim x dim matrix plus a
// dim vector.
inline std::pair<long, long> round_stats(const PairwiseModel& model) {
    long messages = 4L * model.num_edges();
    long scalars = 0;
    for (const DirectedMessage& s : model.directed_messages()) {
        const long d = model.dim(s.agent);
        scalars += 2 * (d * d + d);
    }
    return {messages, scalars};
}

inline RunResult run(const PairwiseModel& model, const EngineConfig& config = {}) {
    require_valid(model, "run");
    if (!(config.eta > 0)) throw std::invalid_argument("run: eta must be positive");
    const int max_iters = config.max_iters >= 0 ? config.max_iters : 10 * model.num_agents();
    const auto [messages, scalars] = round_stats(model);

    MessageState state = init_messages(model, config.init);
    BeliefSet bel = beliefs(model, state);
    RunResult res;
    res.status = RunStatus::MaxItersReached;
    res.rounds = 0;
    for (int round = 1; round <= max_iters; ++round) {
        MessageState next = sync_round(model, state);
        BeliefSet nbel = beliefs(model, next);
        double mean_delta = 0.0;
        double info_delta = 0.0;
        double mean_norm = 0.0;
        bool finite = true;
        for (int i = 0; i < model.num_agents(); ++i) {
            const Vector& mu = nbel.mean[static_cast<size_t>(i)];
            if (!mu.allFinite()) finite = false;
            else {
                mean_delta = std::max(mean_delta, (mu - bel.mean[static_cast<size_t>(i)]).lpNorm<Eigen::Infinity>());
                mean_norm = std::max(mean_norm, mu.lpNorm<Eigen::Infinity>());
            }
        }
        for (size_t s = 0; s < state.f2v.size(); ++s)
            info_delta = std::max(info_delta, (next.f2v[s].info_matrix - state.f2v[s].info_matrix).norm());
        res.trace.push_back({round, mean_delta, info_delta, messages, scalars});
        state = std::move(next);
        bel = std::move(nbel);
        res.rounds = round;
        if (!finite || mean_norm > config.divergence_guard) {
            res.status = RunStatus::Diverged;
            break;
        }
        if (mean_delta < config.eta) {
            res.status = RunStatus::Converged;
            break;
        }
    }
    res.beliefs = std::move(bel);
    return res;
}

}  // namespace gabp
