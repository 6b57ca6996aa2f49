#pragma once

// Test-only oracles, independent of the library's solver paths: a cyclic
// Jacobi eigensolver for dense symmetric matrices and fixture builders for
// block-structured data.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ispca/matrix.hpp"
#include "ispca/rng.hpp"

namespace ispca::test {

struct JacobiResult {
    Vector values;   // descending
    Matrix vectors;  // columns match values
};

/// Cyclic Jacobi rotations until the off-diagonal is annihilated. Slow but
/// simple; used only as an oracle against the library's eigensolves.
inline JacobiResult jacobi_eigen(Matrix A, int max_sweeps = 100) {
    const Index n = A.rows();
    Matrix V = Matrix::Identity(n, n);
    const double scale = std::max(1e-300, A.cwiseAbs().maxCoeff());

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) off = std::max(off, std::abs(A(i, j)));
        }
        if (off <= 1e-15 * scale) break;

        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) <= 1e-18 * scale) continue;
                double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (Index i = 0; i < n; ++i) {
                    double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (Index i = 0; i < n; ++i) {
                    double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (Index i = 0; i < n; ++i) {
                    double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return A(a, a) > A(b, b); });

    JacobiResult result;
    result.values.resize(n);
    result.vectors.resize(n, n);
    for (Index j = 0; j < n; ++j) {
        result.values(j) = A(order[static_cast<std::size_t>(j)],
                             order[static_cast<std::size_t>(j)]);
        result.vectors.col(j) = V.col(order[static_cast<std::size_t>(j)]);
    }
    return result;
}

inline Matrix random_gaussian(CounterRng& rng, Index rows, Index cols) {
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) M(i, j) = rng.next_gaussian();
    }
    return M;
}

inline Matrix random_symmetric(CounterRng& rng, Index n, double magnitude = 1.0) {
    Matrix A = random_gaussian(rng, n, n);
    return ((A + A.transpose()) * (0.5 * magnitude)).eval();
}

inline Matrix random_spd(CounterRng& rng, Index n) {
    Matrix A = random_gaussian(rng, n, n);
    return (A * A.transpose() / static_cast<double>(n) +
            0.1 * Matrix::Identity(n, n)).eval();
}

/// Random orthonormal columns, all orthogonal to the ones vector so the
/// spanned data is exactly mean-zero by construction.
inline Matrix orthonormal_mean_zero(CounterRng& rng, Index n, Index r) {
    Matrix U(n, r);
    Vector ones = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (Index j = 0; j < r; ++j) {
        Vector v(n);
        while (true) {
            for (Index i = 0; i < n; ++i) v(i) = rng.next_gaussian();
            v -= ones * ones.dot(v);
            for (Index prev = 0; prev < j; ++prev) {
                v -= U.col(prev) * U.col(prev).dot(v);
            }
            // Re-orthogonalize once; classical Gram-Schmidt alone drifts.
            v -= ones * ones.dot(v);
            for (Index prev = 0; prev < j; ++prev) {
                v -= U.col(prev) * U.col(prev).dot(v);
            }
            if (v.norm() > 1e-6) break;
        }
        U.col(j) = v / v.norm();
    }
    return U;
}

/// Random orthonormal p x r factor (no mean-zero constraint).
inline Matrix orthonormal(CounterRng& rng, Index p, Index r) {
    Matrix V(p, r);
    for (Index j = 0; j < r; ++j) {
        Vector v(p);
        while (true) {
            for (Index i = 0; i < p; ++i) v(i) = rng.next_gaussian();
            for (Index prev = 0; prev < j; ++prev) {
                v -= V.col(prev) * V.col(prev).dot(v);
            }
            for (Index prev = 0; prev < j; ++prev) {
                v -= V.col(prev) * V.col(prev).dot(v);
            }
            if (v.norm() > 1e-6) break;
        }
        V.col(j) = v / v.norm();
    }
    return V;
}

struct BlockFixture {
    DataMatrix X;                      // centered, exactly uncorrelated blocks
    std::vector<std::vector<Index>> blocks;  // contiguous column groups
};

/// Data whose sample covariance is block-diagonal to machine precision:
/// each block is U_i D_i V_i^T with the U_i drawn from one shared
/// orthonormal, mean-zero basis, so cross-block Gram products vanish.
/// Requires n >= p + 1.
inline BlockFixture exact_block_fixture(CounterRng& rng, Index n,
                                        const std::vector<Index>& block_sizes) {
    Index p = 0;
    for (Index s : block_sizes) p += s;
    Matrix U = orthonormal_mean_zero(rng, n, p);

    Matrix X(n, p);
    std::vector<std::vector<Index>> blocks;
    Index col = 0;
    for (Index s : block_sizes) {
        Matrix Vi = orthonormal(rng, s, s);
        Vector d(s);
        for (Index j = 0; j < s; ++j) d(j) = 0.5 + 4.0 * rng.next_double();
        X.block(0, col, n, s) = U.middleCols(col, s) * d.asDiagonal() * Vi.transpose() *
                                std::sqrt(static_cast<double>(n));
        std::vector<Index> idx(static_cast<std::size_t>(s));
        std::iota(idx.begin(), idx.end(), col);
        blocks.push_back(std::move(idx));
        col += s;
    }
    return BlockFixture{DataMatrix::as_centered(std::move(X)), std::move(blocks)};
}

}  // namespace ispca::test
