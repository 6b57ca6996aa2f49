#include "ispca/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "ispca/rng.hpp"

namespace ispca {

std::string to_string(SvdMethod method) {
    return method == SvdMethod::Exact ? "exact" : "cdm";
}

SvdMethod svd_method_from_string(const std::string& name) {
    if (name == "exact") return SvdMethod::Exact;
    if (name == "cdm") return SvdMethod::Cdm;
    throw UsageError("unknown svd method '" + name + "' (expected exact|cdm)");
}

namespace detail {

void apply_sign_convention(Matrix& loadings) {
    for (Index j = 0; j < loadings.cols(); ++j) {
        Index arg = 0;
        loadings.col(j).cwiseAbs().maxCoeff(&arg);
        if (loadings(arg, j) < 0.0) loadings.col(j) = -loadings.col(j);
    }
}

void symmetric_eigen_descending(const Matrix& S, Vector& eigenvalues, Matrix& eigenvectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver failed to converge");
    }
    // Eigen returns ascending order.
    Index p = S.rows();
    eigenvalues.resize(p);
    eigenvectors.resize(p, p);
    for (Index j = 0; j < p; ++j) {
        eigenvalues(j) = solver.eigenvalues()(p - 1 - j);
        eigenvectors.col(j) = solver.eigenvectors().col(p - 1 - j);
    }
}

double max_abs_cross_product(const Matrix& V) {
    double worst = 0.0;
    for (Index i = 0; i < V.cols(); ++i) {
        for (Index j = i + 1; j < V.cols(); ++j) {
            worst = std::max(worst, std::abs(V.col(i).dot(V.col(j))));
        }
    }
    return worst;
}

}  // namespace detail

SpectralEstimate exact_svd(const DataMatrix& X, Index k) {
    if (!X.centered()) {
        throw UsageError("exact_svd requires a centered data matrix");
    }
    const Index n = X.rows();
    const Index p = X.cols();
    if (k < 1 || k > std::min(n, p)) {
        throw UsageError("exact_svd: k must be in [1, min(n, p)]");
    }

    const Matrix& M = X.values();
    Vector gram_eigenvalues;
    Matrix gram_vectors;
    SpectralEstimate out;
    out.method = SvdMethod::Exact;
    out.rank_used = k;
    out.loadings.resize(p, k);
    out.eigenvalues.resize(k);

    if (n < p) {
        // Gram problem on XX^T; loadings recovered as X^T u / ||X^T u||.
        detail::symmetric_eigen_descending(M * M.transpose(), gram_eigenvalues, gram_vectors);
        double scale = std::max(gram_eigenvalues(0), 0.0);
        double rank_tol = static_cast<double>(std::max(n, p)) * 1e-16 * std::max(scale, 1e-300);
        for (Index j = 0; j < k; ++j) {
            double ev = std::max(gram_eigenvalues(j), 0.0);
            if (ev <= rank_tol) {
                throw NumericalError(
                    "exact_svd: requested rank " + std::to_string(k) +
                    " exceeds the numerical rank of the centered data");
            }
            out.eigenvalues(j) = ev / static_cast<double>(n);
            out.loadings.col(j) = (M.transpose() * gram_vectors.col(j)) / std::sqrt(ev);
            out.loadings.col(j).normalize();
        }
    } else {
        detail::symmetric_eigen_descending(M.transpose() * M, gram_eigenvalues, gram_vectors);
        for (Index j = 0; j < k; ++j) {
            out.eigenvalues(j) = std::max(gram_eigenvalues(j), 0.0) / static_cast<double>(n);
            out.loadings.col(j) = gram_vectors.col(j);
        }
    }

    detail::apply_sign_convention(out.loadings);
    out.max_cross_product = detail::max_abs_cross_product(out.loadings);
    return out;
}

SpectralEstimate cdm_svd(const DataMatrix& X, Index k,
                         std::optional<std::uint64_t> shuffle_seed) {
    if (!X.centered()) {
        throw UsageError("cdm_svd requires a centered data matrix");
    }
    const Index n = X.rows();
    const Index p = X.cols();
    if (n < 4) {
        throw UsageError("cdm_svd requires at least 4 observations");
    }
    if (k < 1 || k > n / 2) {
        throw UsageError("cdm_svd: k must be in [1, floor(n/2)]");
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    if (shuffle_seed) {
        CounterRng rng(*shuffle_seed, 0x5a5a5a5aULL);
        for (Index i = n - 1; i > 0; --i) {
            Index j = static_cast<Index>(rng.next_index(static_cast<std::uint64_t>(i) + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
    }

    const Index n1 = (n + 1) / 2;
    const Index n2 = n - n1;
    Matrix X1(n1, p), X2(n2, p);
    for (Index i = 0; i < n1; ++i) X1.row(i) = X.values().row(order[static_cast<std::size_t>(i)]);
    for (Index i = 0; i < n2; ++i) {
        X2.row(i) = X.values().row(order[static_cast<std::size_t>(n1 + i)]);
    }

    Matrix C = (X1 * X2.transpose()) /
               std::sqrt(static_cast<double>(n1) * static_cast<double>(n2));
    if (C.cwiseAbs().maxCoeff() == 0.0) {
        throw NumericalError("cdm_svd: cross data matrix is identically zero");
    }

    Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(k - 1) <= 0.0) {
        throw NumericalError("cdm_svd: cross data matrix has rank below the requested k");
    }

    SpectralEstimate out;
    out.method = SvdMethod::Cdm;
    out.rank_used = k;
    out.eigenvalues.resize(k);
    out.loadings.resize(p, k);
    for (Index j = 0; j < k; ++j) {
        out.eigenvalues(j) = svd.singularValues()(j);
        Vector u1 = svd.matrixU().col(j);
        Vector u2 = svd.matrixV().col(j);
        // Sign-align the two halves: u1^T C u2 must be positive. The SVD
        // already guarantees u1^T C u2 = sigma_j > 0, so this only fires on
        // pathological round-off.
        if (u1.dot(C * u2) < 0.0) u2 = -u2;
        Vector v = X1.transpose() * u1 + X2.transpose() * u2;
        double norm = v.norm();
        if (norm == 0.0) {
            throw NumericalError("cdm_svd: degenerate loading for component " +
                                 std::to_string(j + 1));
        }
        out.loadings.col(j) = v / norm;
    }

    detail::apply_sign_convention(out.loadings);
    out.max_cross_product = detail::max_abs_cross_product(out.loadings);
    return out;
}

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) {
        throw UsageError("spectral_norm: empty matrix");
    }
    if (!M.allFinite()) {
        throw DataError("spectral_norm: matrix has non-finite entries");
    }
    if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    // Power iteration on the smaller of M^T M / M M^T.
    const bool tall = M.rows() >= M.cols();
    const Index dim = tall ? M.cols() : M.rows();

    CounterRng rng(0x9d2c5680ULL, static_cast<std::uint64_t>(dim));
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = rng.next_gaussian();
    v.normalize();

    double theta = 0.0;
    constexpr int kMaxIter = 10000;
    for (int it = 0; it < kMaxIter; ++it) {
        Vector w = tall ? Vector(M.transpose() * (M * v)) : Vector(M * (M.transpose() * v));
        double norm = w.norm();
        if (norm == 0.0) {
            // Start vector landed in the null space; reseed deterministically.
            for (Index i = 0; i < dim; ++i) v(i) = rng.next_gaussian();
            v.normalize();
            continue;
        }
        double next = v.dot(w);  // Rayleigh quotient for the Gram matrix
        v = w / norm;
        if (it > 0 && std::abs(next - theta) <= 1e-13 * std::max(next, 1e-300)) {
            return std::sqrt(next);
        }
        theta = next;
    }
    throw NumericalError("spectral_norm: power iteration did not converge");
}

double cosine_similarity(const Vector& v, const Vector& w) {
    if (v.size() != w.size()) {
        throw UsageError("cosine_similarity: dimension mismatch");
    }
    double nv = v.norm();
    double nw = w.norm();
    if (nv == 0.0 || nw == 0.0) {
        throw UsageError("cosine_similarity: zero vector");
    }
    return std::min(1.0, std::abs(v.dot(w)) / (nv * nw));
}

double eigenvalue_ratio(double estimated, double truth) {
    if (!(truth > 0.0)) {
        throw UsageError("eigenvalue_ratio: truth must be positive");
    }
    return estimated / truth;
}

WeylReport weyl_gap_check(const CovarianceMatrix& Sigma, const Matrix& E) {
    const Index p = Sigma.dim();
    if (E.rows() != p || E.cols() != p) {
        throw UsageError("weyl_gap_check: dimension mismatch");
    }
    if ((E - E.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, E.cwiseAbs().maxCoeff())) {
        throw UsageError("weyl_gap_check: perturbation matrix is not symmetric");
    }

    Vector lambda, l;
    Matrix dummy;
    detail::symmetric_eigen_descending(Sigma.values(), lambda, dummy);
    detail::symmetric_eigen_descending(Sigma.values() + E, l, dummy);

    WeylReport report;
    report.bound = spectral_norm(E);
    for (Index j = 0; j < p; ++j) {
        double gap = std::abs(lambda(j) - l(j));
        if (gap > report.max_gap) {
            report.max_gap = gap;
            report.worst_index = j;
        }
    }
    report.holds = report.max_gap <= report.bound + 1e-9;
    return report;
}

}  // namespace ispca
