#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ispca/matrix.hpp"

namespace ispca {

/// Disjoint column blocks covering [0, p) plus the induced permutation
/// mapping original column order to block-contiguous order.
class BlockPartition {
public:
    BlockPartition(Index p, std::vector<ColumnIndexSet> blocks);

    Index p() const { return p_; }
    Index block_count() const { return static_cast<Index>(blocks_.size()); }
    const std::vector<ColumnIndexSet>& blocks() const { return blocks_; }
    const ColumnIndexSet& block(Index i) const { return blocks_[static_cast<std::size_t>(i)]; }

    /// Concatenation of the blocks: position j of the permutation names the
    /// original column that lands at block-contiguous position j.
    const Permutation& permutation() const { return permutation_; }

    bool operator==(const BlockPartition& other) const {
        return p_ == other.p_ && blocks_ == other.blocks_;
    }

private:
    Index p_ = 0;
    std::vector<ColumnIndexSet> blocks_;
    Permutation permutation_;
};

enum class DetectorStrategy { Oracle, ThresholdGraph, SparseSplit };

std::string to_string(DetectorStrategy s);
DetectorStrategy detector_strategy_from_string(const std::string& name);

struct DetectorConfig {
    DetectorStrategy strategy = DetectorStrategy::SparseSplit;

    /// Correlation threshold for ThresholdGraph; when unset the universal
    /// rate 2*sqrt(log(p)/n) is used.
    std::optional<double> threshold;

    /// Ascending L1 budgets for the PMD grid; empty means 20 log-spaced
    /// values in [1, sqrt(m)] for the m columns currently being split.
    std::vector<double> penalty_grid;
    double hbic_scale = 2.0;

    Index max_iter = 1000;
    double tol = 1e-8;

    void validate() const;
};

/// Wraps a known partition (the Oracle-Block simulation arm).
BlockPartition detect_oracle(Index p, std::vector<ColumnIndexSet> blocks);

/// Merges adjacent blocks pairwise, halving the block count (the
/// False-Negative simulation arm). Requires an even number of blocks.
BlockPartition merge_pairs(const BlockPartition& part);

/// Connected components of the graph with an edge (i, j) whenever the
/// sample correlation satisfies |r_ij| > threshold. Zero-variance columns
/// become singleton blocks and are reported through zero_variance_out.
BlockPartition detect_threshold_graph(const DataMatrix& X, double threshold,
                                      std::vector<Index>* zero_variance_out = nullptr);

double default_correlation_threshold(Index n, Index p);

struct PmdResult {
    Vector u;  // n-vector, ||u||_2 <= 1
    Vector v;  // p-vector, ||v||_2 <= 1 and ||v||_1 <= c
    double d = 0.0;  // u^T X v at the returned iterate
    bool converged = false;
    Index iterations = 0;
    std::vector<double> objective_history;  // one entry per iteration
};

/// Rank-1 penalized matrix decomposition (alternating soft-thresholding):
/// maximize u^T X v subject to ||u||_2 <= 1, ||v||_2 <= 1, ||v||_1 <= c.
/// The v-update soft-thresholds X^T u with the threshold found by bisection
/// so the L1 constraint binds (0 when slack). Non-convergence returns the
/// best iterate with converged = false.
PmdResult pmd_rank1(const DataMatrix& X, double c, Index max_iter = 1000, double tol = 1e-8);

/// Recursive sparse-split detector: on each column set, pick the
/// HBIC-minimal PMD vector over the penalty grid; a strict nonempty support
/// splits the set into support vs. complement and both sides recurse.
/// HBIC(v) = n*log(RSS(v)/n) + ||v||_0 * hbic_scale * log(log n) * log m,
/// with RSS(v) = ||X - X v v^T||_F^2 and m the current column count.
BlockPartition detect_sparse_split(const DataMatrix& X, const DetectorConfig& cfg);

namespace detail {
/// Soft-thresholding S(g, delta)_i = sign(g_i) * max(|g_i| - delta, 0).
Vector soft_threshold(const Vector& g, double delta);
std::vector<double> default_penalty_grid(Index m);
/// a_np = scale * log(log n) * log m (n clamped at 3 so the factor stays
/// positive).
double hbic_penalty_factor(Index n, Index m, double scale);
}  // namespace detail

}  // namespace ispca
