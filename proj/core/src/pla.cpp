#include "ispca/pla.hpp"

#include <algorithm>

#include "ispca/spectra.hpp"

namespace ispca {

std::string to_string(VarianceMethod m) {
    return m == VarianceMethod::Trace ? "trace" : "eigen";
}

namespace {

VarianceReport build_report(const BlockPartition& part, const std::vector<double>& block_sums,
                            VarianceMethod method) {
    double total = 0.0;
    for (double v : block_sums) total += v;
    if (total <= 0.0) {
        throw DataError("total variance is zero; shares are undefined");
    }

    VarianceReport report;
    report.method = method;
    report.total_variance = total;
    report.per_block.reserve(block_sums.size());
    for (Index i = 0; i < part.block_count(); ++i) {
        BlockShare entry;
        entry.block_id = i;
        entry.block_size = part.block(i).size();
        entry.variance = block_sums[static_cast<std::size_t>(i)];
        entry.share = entry.variance / total;
        entry.expected_share =
            static_cast<double>(entry.block_size) / static_cast<double>(part.p());
        report.per_block.push_back(entry);
    }
    std::stable_sort(report.per_block.begin(), report.per_block.end(),
                     [](const BlockShare& a, const BlockShare& b) { return a.share > b.share; });
    return report;
}

void check_inputs(const DataMatrix& X, const BlockPartition& part) {
    if (!X.centered()) {
        throw UsageError("explained variance requires a centered data matrix");
    }
    if (part.p() != X.cols()) {
        throw UsageError("partition does not match the matrix column count");
    }
}

}  // namespace

VarianceReport explained_variance_trace(const DataMatrix& X, const BlockPartition& part) {
    check_inputs(X, part);
    Vector vars = column_variances(X);
    std::vector<double> sums(static_cast<std::size_t>(part.block_count()), 0.0);
    for (Index i = 0; i < part.block_count(); ++i) {
        for (Index j : part.block(i).indices()) {
            sums[static_cast<std::size_t>(i)] += vars(j);
        }
    }
    return build_report(part, sums, VarianceMethod::Trace);
}

VarianceReport explained_variance_eigen(const DataMatrix& X, const BlockPartition& part) {
    check_inputs(X, part);
    std::vector<double> sums(static_cast<std::size_t>(part.block_count()), 0.0);
    for (Index i = 0; i < part.block_count(); ++i) {
        DataMatrix sub = select_columns(X, part.block(i));
        CovarianceMatrix Si = covariance(sub);
        Vector eigenvalues;
        Matrix eigenvectors;
        detail::symmetric_eigen_descending(Si.values(), eigenvalues, eigenvectors);
        sums[static_cast<std::size_t>(i)] = eigenvalues.sum();
    }
    return build_report(part, sums, VarianceMethod::Eigen);
}

std::vector<Index> select_principal(const VarianceReport& report, double min_share) {
    if (min_share < 0.0) {
        throw UsageError("min_share must be nonnegative");
    }
    std::vector<Index> ids;
    for (const auto& entry : report.per_block) {
        if (entry.share >= min_share) ids.push_back(entry.block_id);
    }
    return ids;
}

}  // namespace ispca
