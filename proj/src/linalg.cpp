#include "drpt/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>

namespace drpt {

namespace {

using EMatrix = Eigen::MatrixXd;
using EVector = Eigen::VectorXd;
using ConstMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

EMatrix to_eigen(const Matrix& a) {
    return ConstMap(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                    static_cast<Eigen::Index>(a.cols()));
}

Matrix from_eigen(const EMatrix& e) {
    Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return out;
}

}  // namespace

Svd svd(const Matrix& a) {
    if (a.empty()) throw ShapeError("svd: empty matrix");
    if (a.has_non_finite()) throw ValidationError("svd: matrix has non-finite entries");

    Eigen::JacobiSVD<EMatrix> dec(to_eigen(a), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (dec.info() != Eigen::Success) {
        throw DecompositionError("svd did not converge for " + a.shape_str() + " matrix");
    }

    Svd out;
    out.u = from_eigen(dec.matrixU());
    out.vt = from_eigen(dec.matrixV().transpose());
    const auto& s = dec.singularValues();
    out.sigma.assign(s.data(), s.data() + s.size());
    return out;
}

RankInfo rank_info(const Svd& dec, std::size_t rows, std::size_t cols) {
    RankInfo info;
    info.sigma_max = dec.sigma.empty() ? 0.0 : dec.sigma.front();
    info.tolerance = static_cast<double>(std::max(rows, cols)) *
                     std::numeric_limits<double>::epsilon() * info.sigma_max;
    for (double s : dec.sigma) {
        if (s > info.tolerance) {
            ++info.numerical_rank;
            info.sigma_min_effective = s;
        }
    }
    if (info.numerical_rank == 0) {
        throw RankError("rank_info: all singular values below tolerance (zero matrix)");
    }
    return info;
}

std::vector<double> pinv_apply(const Svd& dec, std::size_t rows, std::size_t cols,
                               const std::vector<double>& b) {
    if (b.size() != rows) {
        throw ShapeError("pinv_apply: b has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(rows));
    }
    const RankInfo info = rank_info(dec, rows, cols);

    const EMatrix u = to_eigen(dec.u);
    const EMatrix vt = to_eigen(dec.vt);
    const EVector bv = Eigen::Map<const EVector>(b.data(), static_cast<Eigen::Index>(rows));

    // x = V * Sigma+ * Ut * b, truncating singular values at the rank tolerance.
    EVector coeff = EVector::Zero(static_cast<Eigen::Index>(cols));
    for (std::size_t k = 0; k < info.numerical_rank; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        coeff(ki) = u.col(ki).dot(bv) / dec.sigma[k];
    }
    EVector x = vt.transpose() * coeff;
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> pinv_apply(const Matrix& a, const std::vector<double>& b) {
    return pinv_apply(svd(a), a.rows(), a.cols(), b);
}

double spectral_norm(const Matrix& a) {
    if (a.empty()) throw ShapeError("spectral_norm: empty matrix");
    Eigen::JacobiSVD<EMatrix> dec(to_eigen(a));
    return dec.singularValues().size() ? dec.singularValues()(0) : 0.0;
}

std::vector<double> augmented_solve(const Matrix& a, const std::vector<double>& b) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m) {
        throw ShapeError("augmented_solve: b has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(m));
    }

    const Svd dec = svd(a);
    const RankInfo info = rank_info(dec, m, n);
    if (info.numerical_rank < m) {
        throw SingularSystemError("augmented_solve: matrix is rank-deficient (rank " +
                                  std::to_string(info.numerical_rank) + " < " +
                                  std::to_string(m) + " rows)");
    }

    const EMatrix ae = to_eigen(a);
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ni = static_cast<Eigen::Index>(n);

    EMatrix block = EMatrix::Zero(mi + ni, mi + ni);
    block.topLeftCorner(ni, ni).setIdentity();
    block.topRightCorner(ni, mi) = ae.transpose();
    block.bottomLeftCorner(mi, ni) = ae;

    EVector rhs = EVector::Zero(mi + ni);
    rhs.tail(mi) = Eigen::Map<const EVector>(b.data(), mi);

    EVector sol = block.partialPivLu().solve(rhs);
    return std::vector<double>(sol.data(), sol.data() + ni);
}

}  // namespace drpt
