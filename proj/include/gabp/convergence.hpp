#pragma once

#include "engine.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace gabp {

// The stacked operand of the operator G: one PSD information-matrix block per
// directed message, canonical slot order. Conceptually one block-diagonal
// matrix C^(l); the selector matrices that would pick blocks out of it are
// realized by indexed summation instead of ever being materialized.
struct InfoMatrixState {
    std::vector<Matrix> blocks;
};

enum class FpInit { Zero, UpperBound };

struct FixedPointReport {
    InfoMatrixState c_star;        // converged f2v information matrices
    std::vector<Matrix> v2f_star;  // v2f information matrices at the fixed point
    int iterations = 0;
    std::vector<double> residual_history;  // stacked Frobenius delta per sweep
};

// Mean-recursion system v^(l) = -Q v^(l-1) + b over stacked v2f means.
struct QSystem {
    Matrix Q;
    Vector b;
    std::vector<DirectedMessage> ordering;  // canonical slots, v2f reading (agent = source)
    std::vector<int> offsets;               // size slots+1; slot s occupies [offsets[s], offsets[s+1])
};

struct ConvergenceVerdict {
    double rho = 0.0;
    bool converges = false;   // rho < 1
    std::optional<Vector> fixed_mean;  // solves (I+Q) v = b, present when converges
    double margin = 0.0;      // 1 - rho
};

inline InfoMatrixState zero_state(const PairwiseModel& model) {
    InfoMatrixState st;
    for (const DirectedMessage& s : model.directed_messages())
        st.blocks.push_back(Matrix::Zero(model.dim(s.agent), model.dim(s.agent)));
    return st;
}

inline InfoMatrixState upper_bound_state(const PairwiseModel& model) {
    InfoMatrixState st;
    const int n = static_cast<int>(model.directed_messages().size());
    for (int s = 0; s < n; ++s) st.blocks.push_back(upper_bound_block(model, s));
    return st;
}

// v2f information matrix at slot (edge, source) given an f2v info state:
// W_src^{-1} plus every incoming block except the one through `edge`.
inline Matrix v2f_info_from_state(const PairwiseModel& model, const InfoMatrixState& c, int edge_idx,
                                  AgentId source) {
    Matrix lam = numerics::spd_inverse(model.agent(source).prior_cov, "v2f_info_from_state: W");
    const auto& slots = model.directed_messages();
    for (int s : model.slots_of_agent(source)) {
        if (slots[static_cast<size_t>(s)].edge == edge_idx) continue;
        lam += c.blocks[static_cast<size_t>(s)];
    }
    return numerics::symmetrize(lam);
}

// One application of G: exactly an engine round restricted to the information
// matrices.
inline InfoMatrixState apply_g(const PairwiseModel& model, const InfoMatrixState& c) {
    const auto& slots = model.directed_messages();
    InfoMatrixState out;
    out.blocks.resize(slots.size());
    const int n = static_cast<int>(slots.size());
    parallel_for(n, [&](int idx) {
        const auto s = static_cast<size_t>(idx);
        const int e = slots[s].edge;
        const AgentId target = slots[s].agent;
        const AgentId source = model.other_end(e, target);
        const Matrix lam_v2f = v2f_info_from_state(model, c, e, source);
        const Matrix c_v2f = numerics::spd_inverse(lam_v2f, "apply_g: v2f info");
        const Matrix& at = model.coef_of(e, target);
        const Matrix& as = model.coef_of(e, source);
        const Matrix s_mat = numerics::symmetrize(model.edge(e).noise_cov + as * c_v2f * as.transpose());
        out.blocks[s] = numerics::symmetrize(at.transpose() * numerics::spd_solve(s_mat, at, "apply_g: S"));
    });
    return out;
}

// Iterate G to its unique PD fixed point. NonConvergence here is a
// diagnostic surface, not an expected outcome.
inline FixedPointReport fixed_point(const PairwiseModel& model, double tol = 1e-12, int max_iters = 500,
                                    FpInit init = FpInit::Zero) {
    require_valid(model, "fixed_point");
    if (!(tol > 0)) throw std::invalid_argument("fixed_point: tol must be positive");
    InfoMatrixState state = init == FpInit::Zero ? zero_state(model) : upper_bound_state(model);
    FixedPointReport rep;
    for (int it = 1; it <= max_iters; ++it) {
        InfoMatrixState next = apply_g(model, state);
        double delta_sq = 0.0;
        for (size_t s = 0; s < state.blocks.size(); ++s)
            delta_sq += (next.blocks[s] - state.blocks[s]).squaredNorm();
        const double delta = std::sqrt(delta_sq);
        rep.residual_history.push_back(delta);
        state = std::move(next);
        rep.iterations = it;
        if (delta < tol) {
            rep.c_star = std::move(state);
            const auto& slots = model.directed_messages();
            rep.v2f_star.resize(slots.size());
            for (size_t s = 0; s < slots.size(); ++s)
                rep.v2f_star[s] = v2f_info_from_state(model, rep.c_star, slots[s].edge, slots[s].agent);
            return rep;
        }
    }
    throw NonConvergence("fixed_point: no convergence within max_iters (tol " + std::to_string(tol) + ")");
}

// U/L envelope per directed message: U = coef_t^T R^{-1} coef_t,
// L = coef_t^T (R + coef_s W_s coef_s^T)^{-1} coef_t.
inline std::vector<std::pair<Matrix, Matrix>> bounds(const PairwiseModel& model) {
    require_valid(model, "bounds");
    const auto& slots = model.directed_messages();
    std::vector<std::pair<Matrix, Matrix>> out(slots.size());
    for (size_t s = 0; s < slots.size(); ++s) {
        const int e = slots[s].edge;
        const AgentId target = slots[s].agent;
        const AgentId source = model.other_end(e, target);
        const Matrix& at = model.coef_of(e, target);
        const Matrix& as = model.coef_of(e, source);
        const Matrix u = upper_bound_block(model, static_cast<int>(s));
        const Matrix s_mat =
            numerics::symmetrize(model.edge(e).noise_cov + as * model.agent(source).prior_cov * as.transpose());
        const Matrix l = numerics::symmetrize(at.transpose() * numerics::spd_solve(s_mat, at, "bounds: L"));
        out[s] = {u, l};
    }
    return out;
}

// Q and b of the mean recursion, assembled at the fixed point. Block row
// (j -> f_ij), block column (k -> f_kj) for k in N(j)\{i}:
//   Q_block = C*_{j->f_ij} * M_kj * coef_k,  M_kj = coef_j^(kj)T * S_kj^{-1},
//   S_kj = R_kj + coef_k * C*_{k->f_kj} * coef_k^T,
// and the b row is C*_{j->f_ij} * sum_k M_kj * y_kj. This is the literal
// substitution of the f2v mean update into the v2f mean update with the
// information matrices held at C*; the mean-recursion equivalence test pins
// it against the engine step for step.
inline QSystem assemble_q(const PairwiseModel& model, const FixedPointReport& report) {
    const auto& slots = model.directed_messages();
    QSystem sys;
    sys.ordering = slots;
    sys.offsets.assign(slots.size() + 1, 0);
    for (size_t s = 0; s < slots.size(); ++s)
        sys.offsets[s + 1] = sys.offsets[s] + model.dim(slots[s].agent);
    const int dim = sys.offsets.back();
    sys.Q = Matrix::Zero(dim, dim);
    sys.b = Vector::Zero(dim);

    // per-slot v2f covariance C*_{a->f_e}
    std::vector<Matrix> v2f_cov(slots.size());
    for (size_t s = 0; s < slots.size(); ++s)
        v2f_cov[s] = numerics::spd_inverse(report.v2f_star[s], "assemble_q: v2f info");

    for (size_t row = 0; row < slots.size(); ++row) {
        const int e_ij = slots[row].edge;
        const AgentId j = slots[row].agent;             // v2f source of this row
        const AgentId i = model.other_end(e_ij, j);     // excluded neighbor
        const Matrix& c_row = v2f_cov[row];
        const int ro = sys.offsets[row];
        const auto& nbr = model.neighbors(j);
        const auto& inc = model.incident_edges(j);
        for (size_t n = 0; n < nbr.size(); ++n) {
            const AgentId k = nbr[n];
            if (k == i) continue;
            const int e_kj = inc[n];
            const EdgeObservation& ed = model.edge(e_kj);
            const Matrix& aj = model.coef_of(e_kj, j);
            const Matrix& ak = model.coef_of(e_kj, k);
            const int col = model.slot_of(e_kj, k);
            const Matrix s_kj = numerics::symmetrize(ed.noise_cov + ak * v2f_cov[static_cast<size_t>(col)] * ak.transpose());
            const Matrix m_kj = numerics::spd_solve(s_kj, aj, "assemble_q: S").transpose();  // coef_j^T S^{-1}
            sys.Q.block(ro, sys.offsets[static_cast<size_t>(col)], model.dim(j), model.dim(k)) =
                c_row * m_kj * ak;
            sys.b.segment(ro, model.dim(j)) += c_row * (m_kj * ed.obs);
        }
    }
    return sys;
}

// v^(l) = -Q v^(l-1) + b, returning v^(1..iters).
inline std::vector<Vector> mean_recursion(const QSystem& sys, const Vector& v0, int iters) {
    if (v0.size() != sys.Q.rows()) throw std::invalid_argument("mean_recursion: v0 dimension mismatch");
    std::vector<Vector> out;
    out.reserve(static_cast<size_t>(std::max(iters, 0)));
    Vector v = v0;
    for (int l = 0; l < iters; ++l) {
        v = (-sys.Q * v + sys.b).eval();
        out.push_back(v);
    }
    return out;
}

// Convergence verdict: rho(Q) against 1, with the stationary mean when it
// exists. (I+Q) is nonsingular whenever rho < 1.
inline ConvergenceVerdict decide(const PairwiseModel& model, double tol = 1e-8) {
    const FixedPointReport rep = fixed_point(model);
    const QSystem sys = assemble_q(model, rep);
    ConvergenceVerdict v;
    v.rho = numerics::spectral_radius(sys.Q, tol);
    v.converges = v.rho < 1.0;
    v.margin = 1.0 - v.rho;
    if (v.converges) {
        const Matrix iq = Matrix::Identity(sys.Q.rows(), sys.Q.cols()) + sys.Q;
        v.fixed_mean = iq.partialPivLu().solve(sys.b);
    }
    return v;
}

// Everything the `analyze` surface reports in one pass (one fixed-point run,
// unlike calling decide() and fixed_point() separately).
struct AnalyzeReport {
    double rho = 0.0;
    bool converges = false;
    double margin = 0.0;
    int iterations = 0;
    std::vector<double> residuals;
    bool bounds_ok = true;  // C* blocks inside the [L, U] envelope
    int q_dim = 0;
    bool indeterminate = false;  // |1 - rho| < 1e-6: too close to call
    std::optional<Vector> fixed_mean;
};

inline AnalyzeReport analyze(const PairwiseModel& model, double tol = 1e-8) {
    const FixedPointReport rep = fixed_point(model);
    const QSystem sys = assemble_q(model, rep);
    AnalyzeReport out;
    out.rho = numerics::spectral_radius(sys.Q, tol);
    out.converges = out.rho < 1.0;
    out.margin = 1.0 - out.rho;
    out.iterations = rep.iterations;
    out.residuals = rep.residual_history;
    out.q_dim = static_cast<int>(sys.Q.rows());
    out.indeterminate = std::abs(1.0 - out.rho) < 1e-6;
    const auto env = bounds(model);
    for (size_t s = 0; s < env.size(); ++s) {
        if (!numerics::is_psd(rep.c_star.blocks[s] - env[s].second) ||
            !numerics::is_psd(env[s].first - rep.c_star.blocks[s])) {
            out.bounds_ok = false;
            break;
        }
    }
    if (out.converges) {
        const Matrix iq = Matrix::Identity(sys.Q.rows(), sys.Q.cols()) + sys.Q;
        out.fixed_mean = iq.partialPivLu().solve(sys.b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Empirical checks of G's structural invariants (the P1.x family)
// ---------------------------------------------------------------------------

struct PropertyViolation {
    std::string property;  // "P1.1" | "P1.2a" | "P1.2b" | "P1.3L" | "P1.3U"
    int trial = 0;
    int slot = 0;
    double min_eigen = 0.0;       // the offending eigenvalue
    InfoMatrixState state_a;      // inputs that produced the violation
    InfoMatrixState state_b;      // second input for P1.1 (empty otherwise)
    double alpha = 0.0;           // scaling factor for P1.2 (0 otherwise)
};

struct PropertyReport {
    int trials = 0;
    std::vector<PropertyViolation> violations;
};

// Randomized check of G's structural invariants: monotonicity (P1.1), scaling
// (P1.2) and the U/L envelope (P1.3), at slack 1e-9. Violations are findings,
// not errors.
inline PropertyReport check_properties(const PairwiseModel& model, int trials, unsigned seed) {
    require_valid(model, "check_properties");
    if (trials < 1) throw std::invalid_argument("check_properties: trials must be >= 1");
    constexpr double kSlack = -1e-9;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> alpha_draw(1.0, 10.0);
    const auto& slots = model.directed_messages();
    const auto env = bounds(model);

    auto random_psd_state = [&]() {
        InfoMatrixState st;
        for (const DirectedMessage& s : slots) {
            const int d = model.dim(s.agent);
            Matrix g(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) g(r, c) = gauss(rng);
            st.blocks.push_back(numerics::symmetrize(g * g.transpose()));
        }
        return st;
    };

    PropertyReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        // P1.1: C1 = C2 + PSD  =>  G(C1) - G(C2) blockwise PSD
        InfoMatrixState c2 = random_psd_state();
        InfoMatrixState bump = random_psd_state();
        InfoMatrixState c1 = c2;
        for (size_t s = 0; s < c1.blocks.size(); ++s) c1.blocks[s] += bump.blocks[s];
        const InfoMatrixState g1 = apply_g(model, c1);
        const InfoMatrixState g2 = apply_g(model, c2);
        for (size_t s = 0; s < slots.size(); ++s) {
            const double me = numerics::min_eigen_sym(g1.blocks[s] - g2.blocks[s]);
            if (me < kSlack)
                rep.violations.push_back({"P1.1", t, static_cast<int>(s), me, c1, c2, 0.0});
        }
        // P1.2: alpha in (1,10]: alpha*G(C) - G(alpha*C) and G(C/alpha) - G(C)/alpha both PSD
        const double alpha = alpha_draw(rng);
        InfoMatrixState c = random_psd_state();
        InfoMatrixState ca = c, cia = c;
        for (auto& b : ca.blocks) b *= alpha;
        for (auto& b : cia.blocks) b /= alpha;
        const InfoMatrixState gc = apply_g(model, c);
        const InfoMatrixState gca = apply_g(model, ca);
        const InfoMatrixState gcia = apply_g(model, cia);
        for (size_t s = 0; s < slots.size(); ++s) {
            const double me_a = numerics::min_eigen_sym(alpha * gc.blocks[s] - gca.blocks[s]);
            if (me_a < kSlack)
                rep.violations.push_back({"P1.2a", t, static_cast<int>(s), me_a, c, {}, alpha});
            const double me_b = numerics::min_eigen_sym(gcia.blocks[s] - gc.blocks[s] / alpha);
            if (me_b < kSlack)
                rep.violations.push_back({"P1.2b", t, static_cast<int>(s), me_b, c, {}, alpha});
        }
        // P1.3: L <= G(C) <= U for the same random C
        for (size_t s = 0; s < slots.size(); ++s) {
            const double me_l = numerics::min_eigen_sym(gc.blocks[s] - env[s].second);
            if (me_l < kSlack)
                rep.violations.push_back({"P1.3L", t, static_cast<int>(s), me_l, c, {}, 0.0});
            const double me_u = numerics::min_eigen_sym(env[s].first - gc.blocks[s]);
            if (me_u < kSlack)
                rep.violations.push_back({"P1.3U", t, static_cast<int>(s), me_u, c, {}, 0.0});
        }
    }
    return rep;
}

}  // namespace gabp
