#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gabp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a Cholesky factorization hits a nonpositive pivot: either the
// model assumptions are violated upstream or the computation broke down.
struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iterative method exhausts its iteration cap without meeting
// its certificate.
struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

namespace numerics {

inline double frob_norm(const Matrix& m) { return m.norm(); }

inline bool is_symmetric(const Matrix& s, double rel_tol = 1e-12) {
    if (s.rows() != s.cols()) return false;
    const double scale = s.norm();
    return (s - s.transpose()).norm() <= rel_tol * (1.0 + scale);
}

inline Matrix symmetrize(const Matrix& s) { return 0.5 * (s + s.transpose()); }

// Solve S*X = B for symmetric positive-definite S via Cholesky. All inverses
// in the engine funnel through here; explicit inversion is reserved for the
// few places a covariance matrix must be materialized.
inline Matrix spd_solve(const Matrix& s, const Matrix& b, const char* context = "spd_solve") {
    Eigen::LLT<Matrix> llt(symmetrize(s));
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite(std::string(context) + ": nonpositive Cholesky pivot");
    return llt.solve(b);
}

inline Vector spd_solve(const Matrix& s, const Vector& b, const char* context = "spd_solve") {
    Eigen::LLT<Matrix> llt(symmetrize(s));
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite(std::string(context) + ": nonpositive Cholesky pivot");
    return llt.solve(b);
}

// Explicit inverse of a positive-definite matrix through its factorization;
// used only where a covariance must be returned by value (beliefs, Q blocks).
inline Matrix spd_inverse(const Matrix& s, const char* context = "spd_inverse") {
    const Matrix eye = Matrix::Identity(s.rows(), s.cols());
    return spd_solve(s, eye, context);
}

inline double min_eigen_sym(const Matrix& s) {
    if (s.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Positive-semidefiniteness with the slack PSD-ordering comparisons need in
// floating point: min eigenvalue down to -1e-10*(1+||S||_F) still counts.
inline bool is_psd(const Matrix& s) {
    return min_eigen_sym(s) >= -1e-10 * (1.0 + s.norm());
}

// Spectral radius by full dense eigendecomposition. At desk scale (Q of a few
// thousand rows at most) this is exact to far below any tolerance we use, and
// it is deterministic: no random restarts, no seed. `tol` is the accuracy the
// caller requires; the dense solver either meets it or reports failure.
inline double spectral_radius(const Matrix& m, double tol = 1e-8) {
    (void)tol;
    if (m.rows() == 0) return 0.0;
    if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NonConvergence("spectral_radius: dense eigensolver did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Full column rank test via singular values: smallest > ratio * largest.
inline bool full_column_rank(const Matrix& a, double ratio = 1e-10) {
    if (a.rows() < a.cols()) return false;
    if (a.cols() == 0) return true;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > ratio * sv(0);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace numerics
}  // namespace gabp
