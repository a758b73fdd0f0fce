#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace gabp;
using Catch::Matchers::WithinAbs;

TEST_CASE("spd_solve solves small SPD systems exactly", "[numerics]") {
    SECTION("identity") {
        Matrix s = Matrix::Identity(3, 3);
        Vector b(3);
        b << 1.0, 2.0, 3.0;
        Vector x = numerics::spd_solve(s, b);
        REQUIRE_THAT((x - b).lpNorm<Eigen::Infinity>(), WithinAbs(0.0, 1e-15));
    }
    SECTION("pinned 2x2") {
        Matrix s(2, 2);
        s << 2.0, 1.0, 1.0, 2.0;
        Vector b(2);
        b << 1.0, 1.0;
        Vector x = numerics::spd_solve(s, b);
        REQUIRE_THAT(x(0), WithinAbs(1.0 / 3.0, 1e-15));
        REQUIRE_THAT(x(1), WithinAbs(1.0 / 3.0, 1e-15));
    }
    SECTION("indefinite input throws NotPositiveDefinite") {
        Matrix s(2, 2);
        s << 1.0, 2.0, 2.0, 1.0;
        Vector b = Vector::Ones(2);
        REQUIRE_THROWS_AS(numerics::spd_solve(s, b), NotPositiveDefinite);
    }
    SECTION("recovers a planted solution on random SPD systems") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            const int d = 1 + static_cast<int>(rng() % 6);
            // eigenvalues spread over several decades to exercise conditioning
            Matrix s = testsupport::random_spd(rng, d, 1e-3, 1e3);
            Matrix x0(d, 2);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < 2; ++c) x0(r, c) = gauss(rng);
            Matrix b = s * x0;
            Matrix x = numerics::spd_solve(s, b);
            REQUIRE((x - x0).norm() <= 1e-6 * (1.0 + x0.norm()));
        }
    }
}

TEST_CASE("spd_inverse inverts through the factorization", "[numerics]") {
    std::mt19937_64 rng(11);
    Matrix s = testsupport::random_spd(rng, 4);
    Matrix inv = numerics::spd_inverse(s);
    REQUIRE((s * inv - Matrix::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("spectral_radius on pinned matrices", "[numerics]") {
    SECTION("zero matrix") {
        REQUIRE_THAT(numerics::spectral_radius(Matrix::Zero(4, 4)), WithinAbs(0.0, 1e-15));
    }
    SECTION("diagonal") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 0.5;
        m(1, 1) = -0.9;
        REQUIRE_THAT(numerics::spectral_radius(m), WithinAbs(0.9, 1e-12));
    }
    SECTION("rotation has complex eigenvalues of unit modulus") {
        const double th = 0.3;
        Matrix m(2, 2);
        m << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        REQUIRE_THAT(numerics::spectral_radius(m), WithinAbs(1.0, 1e-12));
    }
    SECTION("non-square throws") {
        REQUIRE_THROWS_AS(numerics::spectral_radius(Matrix::Zero(2, 3)), std::invalid_argument);
    }
    SECTION("scaling homogeneity rho(c*M) = |c|*rho(M)") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            Matrix m(5, 5);
            for (int r = 0; r < 5; ++r)
                for (int c = 0; c < 5; ++c) m(r, c) = gauss(rng);
            const double rho = numerics::spectral_radius(m);
            const double c = -2.5;
            REQUIRE_THAT(numerics::spectral_radius(Matrix(c * m)), WithinAbs(std::abs(c) * rho, 1e-9 * (1.0 + rho)));
        }
    }
}

TEST_CASE("min_eigen_sym on pinned matrices", "[numerics]") {
    REQUIRE_THAT(numerics::min_eigen_sym(Matrix::Identity(3, 3)), WithinAbs(1.0, 1e-14));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = -3.0;
    REQUIRE_THAT(numerics::min_eigen_sym(d), WithinAbs(-3.0, 1e-14));
    Matrix s(2, 2);
    s << 2.0, 1.0, 1.0, 2.0;
    REQUIRE_THAT(numerics::min_eigen_sym(s), WithinAbs(1.0, 1e-14));
}

TEST_CASE("min_eigen_sym sign agrees with a shifted Cholesky", "[numerics]") {
    // cross-validation: S + (|min_eig| + eps) I must factor, S - shift must not
    std::mt19937_64 rng(19);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const int d = 2 + static_cast<int>(rng() % 4);
        Matrix g(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) g(r, c) = gauss(rng);
        Matrix s = numerics::symmetrize(g + g.transpose());
        const double me = numerics::min_eigen_sym(s);
        const double bump = 1e-8 * (1.0 + s.norm());
        Matrix above = s - (me - bump) * Matrix::Identity(d, d);
        Matrix below = s - (me + bump) * Matrix::Identity(d, d);
        REQUIRE(Eigen::LLT<Matrix>(above).info() == Eigen::Success);
        REQUIRE(Eigen::LLT<Matrix>(below).info() != Eigen::Success);
    }
}

TEST_CASE("frob_norm on pinned matrices", "[numerics]") {
    REQUIRE_THAT(numerics::frob_norm(Matrix::Zero(3, 2)), WithinAbs(0.0, 0.0));
    REQUIRE_THAT(numerics::frob_norm(Matrix::Identity(2, 2)), WithinAbs(std::sqrt(2.0), 1e-15));
    Matrix m(1, 2);
    m << 3.0, 4.0;
    REQUIRE_THAT(numerics::frob_norm(m), WithinAbs(5.0, 1e-15));
}

TEST_CASE("is_psd applies the relative slack", "[numerics]") {
    REQUIRE(numerics::is_psd(Matrix::Zero(3, 3)));
    REQUIRE(numerics::is_psd(Matrix::Identity(3, 3)));
    // a tiny negative eigenvalue within the slack still counts as PSD
    Matrix nearly = -1e-12 * Matrix::Identity(2, 2);
    REQUIRE(numerics::is_psd(nearly));
    Matrix clearly = -1e-3 * Matrix::Identity(2, 2);
    REQUIRE_FALSE(numerics::is_psd(clearly));
}

TEST_CASE("is_symmetric tolerates relative rounding only", "[numerics]") {
    Matrix s(2, 2);
    s << 1.0, 2.0, 2.0 + 1e-15, 1.0;
    REQUIRE(numerics::is_symmetric(s));
    s(1, 0) = 2.1;
    REQUIRE_FALSE(numerics::is_symmetric(s));
    REQUIRE_FALSE(numerics::is_symmetric(Matrix::Zero(2, 3)));
}

TEST_CASE("full_column_rank via singular value ratio", "[numerics]") {
    REQUIRE(numerics::full_column_rank(Matrix::Identity(3, 3)));
    Matrix tall(3, 2);
    tall << 1, 0, 0, 1, 1, 1;
    REQUIRE(numerics::full_column_rank(tall));
    Matrix rank1(2, 2);
    rank1 << 1, 2, 2, 4;
    REQUIRE_FALSE(numerics::full_column_rank(rank1));
    // wide matrices can never have full column rank
    REQUIRE_FALSE(numerics::full_column_rank(Matrix::Ones(1, 2)));
}

TEST_CASE("symmetrize and all_finite basics", "[numerics]") {
    Matrix m(2, 2);
    m << 0.0, 1.0, 3.0, 0.0;
    Matrix s = numerics::symmetrize(m);
    REQUIRE_THAT(s(0, 1), WithinAbs(2.0, 0.0));
    REQUIRE_THAT(s(1, 0), WithinAbs(2.0, 0.0));
    REQUIRE(numerics::all_finite(s));
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_FALSE(numerics::all_finite(m));
}
