#pragma once

#include <cstddef>
#include <vector>

#include "drpt/matrix.hpp"

namespace drpt {

// Full singular value decomposition A = U * diag(sigma) * Vt.
// U is rows x rows, Vt is cols x cols, sigma has min(rows, cols) entries
// in nonincreasing order.
struct Svd {
    Matrix u;
    std::vector<double> sigma;
    Matrix vt;
};

struct RankInfo {
    std::size_t numerical_rank = 0;
    double sigma_min_effective = 0.0;  // smallest singular value above tolerance
    double sigma_max = 0.0;
    double tolerance = 0.0;            // max(m,n) * eps * sigma_max
};

Svd svd(const Matrix& a);

// Minimum-2-norm least-squares solution x = A+ b via the SVD.
std::vector<double> pinv_apply(const Matrix& a, const std::vector<double>& b);

// Same, reusing a precomputed decomposition of a.
std::vector<double> pinv_apply(const Svd& dec, std::size_t rows, std::size_t cols,
                               const std::vector<double>& b);

RankInfo rank_info(const Svd& dec, std::size_t rows, std::size_t cols);

double spectral_norm(const Matrix& a);

// Solves the block system [[I, At], [A, 0]] [x; y] = [0; b] and returns x.
// Requires full row rank.
std::vector<double> augmented_solve(const Matrix& a, const std::vector<double>& b);

}  // namespace drpt
