#pragma once

#include <vector>

#include "ispca/block_detect.hpp"
#include "ispca/matrix.hpp"
#include "ispca/spectra.hpp"

namespace ispca {

/// Per-block component budget used by fit().
struct KPolicy {
    enum class Kind { FixedPerBlock, GlobalTopK, FullRank };

    Kind kind = Kind::GlobalTopK;
    Index k = 2;

    static KPolicy fixed_per_block(Index k) { return {Kind::FixedPerBlock, k}; }
    static KPolicy global_top(Index k) { return {Kind::GlobalTopK, k}; }
    static KPolicy full_rank() { return {Kind::FullRank, 0}; }
};

struct FitOptions {
    SvdMethod method = SvdMethod::Exact;
    KPolicy k_policy = KPolicy::global_top(2);

    /// With method = Cdm, a block only uses the cross-data-matrix estimator
    /// when p_i > cdm_threshold_ratio * n; smaller blocks fall back to the
    /// exact solver (CDM on tiny blocks wastes half the sample). Set to 0 to
    /// force CDM everywhere.
    double cdm_threshold_ratio = 1.0;

    /// Seeded row shuffle before the CDM half-split; default keeps the
    /// deterministic first-half/second-half split.
    std::optional<std::uint64_t> cdm_shuffle_seed;
};

/// Inherently sparse PCA model: zero-padded per-block loadings, globally
/// eigenvalue-sorted. Cross-block orthogonality is structural (disjoint
/// supports); within-block orthonormality comes from the per-block solver.
class IsPcaModel {
public:
    IsPcaModel(Matrix loadings, Vector eigenvalues, std::vector<Index> component_block,
               BlockPartition partition, SvdMethod method, Vector column_means);

    Index p() const { return loadings_.rows(); }
    Index k() const { return loadings_.cols(); }
    const Matrix& loadings() const { return loadings_; }
    const Vector& eigenvalues() const { return eigenvalues_; }
    const std::vector<Index>& component_block() const { return component_block_; }
    const BlockPartition& partition() const { return partition_; }
    SvdMethod svd_method() const { return method_; }
    const Vector& column_means() const { return column_means_; }

    /// max |v_i^T v_j| over same-block component pairs; the CDM
    /// orthogonality diagnostic (exact-method models report ~0).
    double max_within_block_cross() const;

private:
    Matrix loadings_;
    Vector eigenvalues_;
    std::vector<Index> component_block_;
    BlockPartition partition_;
    SvdMethod method_;
    Vector column_means_;
};

/// Procedure-2 fit: per-block spectral estimation, zero-padded assembly,
/// global eigenvalue sort (ties broken by block id, then within-block
/// index).
IsPcaModel fit(const DataMatrix& X, const BlockPartition& part, const FitOptions& options);

/// Sparse PC scores Z = X V. A centered input is used as-is; otherwise the
/// stored training means are subtracted first.
Matrix scores(const IsPcaModel& model, const DataMatrix& X);

/// Entry (i, j) = |corr(sparse loading i, dense loading j)|.
Matrix loading_correlations(const IsPcaModel& model, const SpectralEstimate& dense);

/// Zero-padded embedding of per-block loading matrices into p rows.
Matrix assemble_loadings(Index p,
                         const std::vector<std::pair<ColumnIndexSet, Matrix>>& block_loadings);

}  // namespace ispca
