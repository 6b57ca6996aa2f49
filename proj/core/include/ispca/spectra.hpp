#pragma once

#include <string>

#include "ispca/matrix.hpp"

namespace ispca {

enum class SvdMethod { Exact, Cdm };

std::string to_string(SvdMethod method);
SvdMethod svd_method_from_string(const std::string& name);

/// Top-k spectral estimate of the sample covariance S = X^T X / n:
/// descending eigenvalues with matching unit-norm loading columns.
struct SpectralEstimate {
    Vector eigenvalues;   // descending, >= 0
    Matrix loadings;      // p x k, unit-norm columns
    SvdMethod method = SvdMethod::Exact;
    Index rank_used = 0;

    /// max |v_i^T v_j| over i != j. Exact loadings are orthogonal so this is
    /// ~0; for CDM it is the orthogonality diagnostic the estimator only
    /// satisfies approximately in the sample.
    double max_cross_product = 0.0;
};

struct AccuracyMetrics {
    double cosine_similarity = 0.0;  // in [0, 1]
    double eigenvalue_ratio = 0.0;   // > 0
};

/// Exact top-k eigenpairs of S via the smaller Gram problem (XX^T when
/// n < p, X^T X otherwise) with back-projection of the eigenvectors.
SpectralEstimate exact_svd(const DataMatrix& X, Index k);

/// Cross-data-matrix estimator: rows are split into halves X1 (ceil(n/2)
/// rows) and X2, eigenvalues are estimated by the singular values of
/// C = (n1*n2)^{-1/2} X1 X2^T, and loadings by back-projection of both
/// halves' singular vectors, renormalized to unit norm. Reduces the upward
/// eigenvalue bias of the exact estimator when p >> n.
///
/// shuffle_seed, when set, applies a seeded row shuffle before the split;
/// the default keeps the first-ceil(n/2)-rows split for reproducibility.
SpectralEstimate cdm_svd(const DataMatrix& X, Index k,
                         std::optional<std::uint64_t> shuffle_seed = {});

/// Largest singular value by power iteration on the smaller Gram matrix;
/// deterministic start, at most 10000 iterations.
double spectral_norm(const Matrix& M);

/// |v^T w| / (||v|| ||w||), clamped to [0, 1]. Sign-invariant on purpose:
/// singular vectors are only defined up to sign.
double cosine_similarity(const Vector& v, const Vector& w);

/// estimated / truth; > 1 flags overestimation, < 1 underestimation.
double eigenvalue_ratio(double estimated, double truth);

struct WeylReport {
    bool holds = false;
    double max_gap = 0.0;        // max_j |lambda_j - l_j|
    double bound = 0.0;          // ||E||_2
    Index worst_index = 0;       // j attaining max_gap
};

/// Checks |lambda_j(Sigma) - lambda_j(Sigma + E)| <= ||E||_2 for all j
/// (with 1e-9 absolute slack). Any failure is an implementation bug, not a
/// property of the inputs.
WeylReport weyl_gap_check(const CovarianceMatrix& Sigma, const Matrix& E);

namespace detail {
/// Flips each column so its largest-magnitude entry is positive; removes
/// SVD sign ambiguity from file outputs and tests.
void apply_sign_convention(Matrix& loadings);
/// Dense eigendecomposition of a symmetric matrix, eigenvalues descending.
void symmetric_eigen_descending(const Matrix& S, Vector& eigenvalues, Matrix& eigenvectors);
}  // namespace detail

}  // namespace ispca
