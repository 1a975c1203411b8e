#include <doctest.h>

#include <cmath>
#include <vector>

#include "drpt/linalg.hpp"
#include "drpt/matrix.hpp"
#include "drpt/rng.hpp"
#include "oracles.hpp"

using drpt::Matrix;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    }
    return worst;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
            c.at(i, j) = s;
        }
    }
    return c;
}

void check_svd_invariants(const Matrix& a) {
    const drpt::Svd dec = drpt::svd(a);
    const std::size_t m = a.rows(), n = a.cols();
    REQUIRE(dec.u.rows() == m);
    REQUIRE(dec.u.cols() == m);
    REQUIRE(dec.vt.rows() == n);
    REQUIRE(dec.vt.cols() == n);
    REQUIRE(dec.sigma.size() == std::min(m, n));
    for (std::size_t i = 0; i + 1 < dec.sigma.size(); ++i) {
        CHECK(dec.sigma[i] >= dec.sigma[i + 1]);
    }
    CHECK(dec.sigma.back() >= 0.0);

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < m; ++k) dot += dec.u.at(k, i) * dec.u.at(k, j);
            CHECK(std::fabs(dot - (i == j ? 1.0 : 0.0)) <= 1e-10);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += dec.vt.at(i, k) * dec.vt.at(j, k);
            CHECK(std::fabs(dot - (i == j ? 1.0 : 0.0)) <= 1e-10);
        }
    }

    Matrix us(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < std::min(m, n); ++j) {
            us.at(i, j) = dec.u.at(i, j) * dec.sigma[j];
        }
    }
    const Matrix recon = multiply(us, dec.vt);
    double worst = 0.0;
    for (std::size_t i = 0; i < m * n; ++i) {
        worst = std::max(worst, std::fabs(recon.data()[i] - a.data()[i]));
    }
    CHECK(worst <= 1e-8 * (1.0 + drpt::spectral_norm(a)));
}

}  // namespace

TEST_CASE("svd of identity") {
    const Matrix eye(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const drpt::Svd dec = drpt::svd(eye);
    for (double s : dec.sigma) CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("svd of diag(3,2)") {
    const Matrix a(2, 2, {3, 0, 0, 2});
    const drpt::Svd dec = drpt::svd(a);
    CHECK(dec.sigma[0] == doctest::Approx(3.0));
    CHECK(dec.sigma[1] == doctest::Approx(2.0));
    // U and V are signed permutations for a diagonal matrix.
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::fabs(std::fabs(dec.u.at(i, j)) - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("svd invariants and reconstruction on random shapes") {
    drpt::Rng rng(1);
    check_svd_invariants(oracle::random_matrix(4, 7, rng));
    check_svd_invariants(oracle::random_matrix(7, 4, rng));
    check_svd_invariants(oracle::random_matrix(5, 5, rng));
}

TEST_CASE("svd is deterministic") {
    drpt::Rng rng(2);
    const Matrix a = oracle::random_matrix(6, 9, rng);
    const drpt::Svd d1 = drpt::svd(a);
    const drpt::Svd d2 = drpt::svd(a);
    CHECK(d1.u == d2.u);
    CHECK(d1.sigma == d2.sigma);
    CHECK(d1.vt == d2.vt);
}

TEST_CASE("pinv_apply forces equal components on [1 1]") {
    const Matrix a(1, 2, {1, 1});
    const auto x = drpt::pinv_apply(a, {2});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("pinv_apply equals the inverse on a square matrix") {
    const Matrix a(2, 2, {2, 1, 1, 3});
    // inverse of [[2,1],[1,3]] is [[3,-1],[-1,2]]/5
    const auto x = drpt::pinv_apply(a, {5, 10});
    CHECK(x[0] == doctest::Approx((3 * 5 - 1 * 10) / 5.0));
    CHECK(x[1] == doctest::Approx((-1 * 5 + 2 * 10) / 5.0));
}

TEST_CASE("pinv_apply matches the normal-equations oracle") {
    drpt::Rng rng(3);
    const Matrix a = oracle::random_matrix(5, 40, rng);
    const auto b = oracle::random_vector(5, rng);
    const auto x = drpt::pinv_apply(a, b);
    const auto want = oracle::pinv_normal_equations(a, b);
    CHECK(max_abs_diff(x, want) <= 1e-8);
}

TEST_CASE("pinv_apply rejects mismatched dimensions") {
    const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(drpt::pinv_apply(a, {1, 2, 3}), drpt::ShapeError);
}

TEST_CASE("pinv_apply solution properties on full-row-rank systems") {
    drpt::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 3 + rng.next_u64() % 5;
        const std::size_t n = m + 4 + rng.next_u64() % 20;
        const Matrix a = oracle::random_matrix(m, n, rng);
        const auto b = oracle::random_vector(m, rng);
        const auto x = drpt::pinv_apply(a, b);

        // Exact solvability: b lies in range(A).
        std::vector<double> resid(m);
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a.at(i, j) * x[j];
            resid[i] = s - b[i];
        }
        CHECK(norm2(resid) <= 1e-8 * (1.0 + norm2(b)));

        // Minimality against 100 random kernel directions from the SVD basis.
        const drpt::Svd dec = drpt::svd(a);
        const std::size_t rank = drpt::rank_info(dec, m, n).numerical_rank;
        drpt::Rng zr(100 + trial);
        for (int zi = 0; zi < 100; ++zi) {
            std::vector<double> z(n, 0.0);
            for (std::size_t r = rank; r < n; ++r) {
                const double c = zr.uniform(-1, 1);
                for (std::size_t j = 0; j < n; ++j) z[j] += c * dec.vt.at(r, j);
            }
            std::vector<double> xz(n);
            for (std::size_t j = 0; j < n; ++j) xz[j] = x[j] + z[j];
            CHECK(norm2(xz) >= norm2(x) - 1e-10);
        }
    }
}

TEST_CASE("weight identity x_i = <F_i, z>") {
    drpt::Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 3 + rng.next_u64() % 8;
        const std::size_t n = 20 + rng.next_u64() % 30;
        const Matrix a = oracle::random_matrix(m, n, rng);
        const auto b = oracle::random_vector(m, rng);
        const auto x = drpt::pinv_apply(a, b);
        const auto z = oracle::normal_equations_z(a, b);
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t r = 0; r < m; ++r) dot += a.at(r, i) * z[r];
            CHECK(std::fabs(x[i] - dot) <= 1e-8);
        }
    }
}

TEST_CASE("rank_info counts singular values above tolerance") {
    drpt::Svd dec;
    dec.sigma = {3, 2, 1e-20};
    const drpt::RankInfo info = drpt::rank_info(dec, 3, 3);
    CHECK(info.numerical_rank == 2);
    CHECK(info.sigma_min_effective == doctest::Approx(2.0));
    CHECK(info.sigma_max == doctest::Approx(3.0));
    CHECK(info.tolerance ==
          doctest::Approx(3 * std::numeric_limits<double>::epsilon() * 3.0));
}

TEST_CASE("rank_info on the identity") {
    const Matrix eye(4, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
    const drpt::RankInfo info = drpt::rank_info(drpt::svd(eye), 4, 4);
    CHECK(info.numerical_rank == 4);
    CHECK(info.sigma_min_effective == doctest::Approx(1.0));
}

TEST_CASE("rank_info with exact zeros") {
    drpt::Svd dec;
    dec.sigma = {1, 0, 0};
    CHECK(drpt::rank_info(dec, 3, 3).numerical_rank == 1);
}

TEST_CASE("rank_info rejects the zero matrix") {
    drpt::Svd dec;
    dec.sigma = {0, 0};
    CHECK_THROWS_AS(drpt::rank_info(dec, 2, 2), drpt::RankError);
}

TEST_CASE("spectral_norm basics") {
    CHECK(drpt::spectral_norm(Matrix(2, 2, {5, 0, 0, 1})) == doctest::Approx(5.0));
    CHECK(drpt::spectral_norm(Matrix(3, 4)) == doctest::Approx(0.0));
}

TEST_CASE("spectral_norm matches power iteration") {
    drpt::Rng rng(6);
    const Matrix a = oracle::random_matrix(3, 6, rng);
    const double got = drpt::spectral_norm(a);
    CHECK(std::fabs(got - oracle::power_iteration_norm(a)) <= 1e-6 * got);
}

TEST_CASE("augmented_solve on the trivial wide system") {
    const auto x = drpt::augmented_solve(Matrix(1, 2, {1, 1}), {2});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("augmented_solve equals the inverse on a square system") {
    const Matrix a(2, 2, {2, 1, 1, 3});
    const auto x = drpt::augmented_solve(a, {5, 10});
    const auto want = drpt::pinv_apply(a, {5, 10});
    CHECK(max_abs_diff(x, want) <= 1e-10);
}

TEST_CASE("augmented_solve agrees with pinv_apply on random wide systems") {
    drpt::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 3 + rng.next_u64() % 4;
        const std::size_t n = m + 10 + rng.next_u64() % 15;
        const Matrix a = oracle::random_matrix(m, n, rng);
        const auto b = oracle::random_vector(m, rng);
        const auto x = drpt::augmented_solve(a, b);
        const auto want = drpt::pinv_apply(a, b);
        CHECK(max_abs_diff(x, want) <= 1e-6 * (1.0 + norm2(want)));
    }
}

TEST_CASE("augmented_solve rejects rank-deficient input") {
    // Duplicate rows.
    const Matrix a(2, 3, {1, 2, 3, 1, 2, 3});
    CHECK_THROWS_AS(drpt::augmented_solve(a, {1, 1}), drpt::SingularSystemError);
}
