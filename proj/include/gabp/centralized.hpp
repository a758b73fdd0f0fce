#pragma once

#include "model.hpp"
#include "numerics.hpp"

#include <utility>
#include <vector>

namespace gabp {

// Every pairwise observation stacked into one linear system y = A*x + n with
// block-diagonal prior W and noise R. Variables stack ascending by agent id;
// observation rows stack ascending by edge pair (i,j).
struct GlobalSystem {
    Matrix A;                      // (sum m_ij) x (sum N_i)
    Matrix W;                      // block-diagonal prior covariance
    Matrix R;                      // block-diagonal noise covariance
    Vector y;                      // stacked observations
    std::vector<int> var_offsets;  // size M+1, agent i occupies [var_offsets[i], var_offsets[i+1])
    std::vector<int> obs_offsets;  // size E+1, edge e occupies [obs_offsets[e], obs_offsets[e+1])
    // Whether A alone observes every direction. Difference-style coefficients
    // (DC flow) leave a global shift unobserved, so this can be false on a
    // perfectly valid model; the posterior stays PD through the priors either
    // way, which is why rank deficiency is reported instead of thrown.
    bool full_column_rank = true;
};

struct CentralEstimate {
    Vector mean;  // x_hat, stacked
    Matrix cov;   // (W^{-1} + A^T R^{-1} A)^{-1}
};

inline GlobalSystem assemble(const PairwiseModel& model) {
    require_valid(model, "assemble");
    GlobalSystem sys;
    const int m = model.num_agents();
    sys.var_offsets.assign(static_cast<size_t>(m) + 1, 0);
    for (int a = 0; a < m; ++a)
        sys.var_offsets[static_cast<size_t>(a) + 1] = sys.var_offsets[static_cast<size_t>(a)] + model.dim(a);
    const int e_count = model.num_edges();
    sys.obs_offsets.assign(static_cast<size_t>(e_count) + 1, 0);
    for (int e = 0; e < e_count; ++e)
        sys.obs_offsets[static_cast<size_t>(e) + 1] =
            sys.obs_offsets[static_cast<size_t>(e)] + static_cast<int>(model.edge(e).obs.size());

    const int n = sys.var_offsets.back();
    const int rows = sys.obs_offsets.back();
    sys.A = Matrix::Zero(rows, n);
    sys.R = Matrix::Zero(rows, rows);
    sys.W = Matrix::Zero(n, n);
    sys.y = Vector::Zero(rows);
    for (int a = 0; a < m; ++a) {
        const int o = sys.var_offsets[static_cast<size_t>(a)];
        const int d = model.dim(a);
        sys.W.block(o, o, d, d) = model.agent(a).prior_cov;
    }
    for (int e = 0; e < e_count; ++e) {
        const EdgeObservation& ed = model.edge(e);
        const int r = sys.obs_offsets[static_cast<size_t>(e)];
        const int mij = static_cast<int>(ed.obs.size());
        sys.A.block(r, sys.var_offsets[static_cast<size_t>(ed.i)], mij, model.dim(ed.i)) = ed.coef_i;
        sys.A.block(r, sys.var_offsets[static_cast<size_t>(ed.j)], mij, model.dim(ed.j)) = ed.coef_j;
        sys.R.block(r, r, mij, mij) = ed.noise_cov;
        sys.y.segment(r, mij) = ed.obs;
    }
    sys.full_column_rank = numerics::full_column_rank(sys.A);
    return sys;
}

// Centralized MAP estimate: mean = (W^{-1}+A^T R^{-1} A)^{-1} A^T R^{-1} y,
// with the same inverse returned as the posterior covariance.
inline CentralEstimate solve_map(const GlobalSystem& sys) {
    const Matrix rinv_a = numerics::spd_solve(sys.R, sys.A, "solve_map: R");
    const Matrix winv = numerics::spd_inverse(sys.W, "solve_map: W");
    const Matrix precision = numerics::symmetrize(winv + sys.A.transpose() * rinv_a);
    CentralEstimate est;
    est.cov = numerics::spd_inverse(precision, "solve_map: posterior");
    est.cov = numerics::symmetrize(est.cov);
    est.mean = est.cov * (sys.A.transpose() * numerics::spd_solve(sys.R, sys.y, "solve_map: R*y"));
    return est;
}

// Agent i's block of the stacked estimate.
inline std::pair<Vector, Matrix> marginal(const CentralEstimate& est, const GlobalSystem& sys, AgentId i) {
    if (i < 0 || static_cast<size_t>(i) + 1 >= sys.var_offsets.size())
        throw std::out_of_range("marginal: unknown agent id");
    const int o = sys.var_offsets[static_cast<size_t>(i)];
    const int d = sys.var_offsets[static_cast<size_t>(i) + 1] - o;
    return {est.mean.segment(o, d), est.cov.block(o, o, d, d)};
}

}  // namespace gabp
