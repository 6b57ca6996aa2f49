#pragma once

#include <string>
#include <vector>

#include "ispca/block_detect.hpp"
#include "ispca/matrix.hpp"

namespace ispca {

enum class VarianceMethod { Trace, Eigen };

std::string to_string(VarianceMethod m);

/// Block-level explained variance. Entries are sorted by descending share;
/// expected_share is the size-proportional baseline p_i / p the observed
/// share is compared against.
struct BlockShare {
    Index block_id = 0;      // index into the partition's block list
    Index block_size = 0;
    double variance = 0.0;   // sum of variances (trace) or eigenvalues
    double share = 0.0;
    double expected_share = 0.0;
};

struct VarianceReport {
    std::vector<BlockShare> per_block;
    double total_variance = 0.0;
    VarianceMethod method = VarianceMethod::Trace;
};

/// Procedure-1 shares: per-block sums of column variances over the total.
/// No eigendecomposition is performed.
VarianceReport explained_variance_trace(const DataMatrix& X, const BlockPartition& part);

/// Same shares through per-block eigenvalue sums; identical to the trace
/// method by the trace identity and kept as an independent route.
VarianceReport explained_variance_eigen(const DataMatrix& X, const BlockPartition& part);

/// Ids of blocks with share >= min_share, in descending-share order.
std::vector<Index> select_principal(const VarianceReport& report, double min_share);

}  // namespace ispca
