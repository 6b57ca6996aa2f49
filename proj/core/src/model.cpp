#include "ispca/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ispca {

IsPcaModel::IsPcaModel(Matrix loadings, Vector eigenvalues, std::vector<Index> component_block,
                       BlockPartition partition, SvdMethod method, Vector column_means)
    : loadings_(std::move(loadings)),
      eigenvalues_(std::move(eigenvalues)),
      component_block_(std::move(component_block)),
      partition_(std::move(partition)),
      method_(method),
      column_means_(std::move(column_means)) {
    const Index p = loadings_.rows();
    const Index k = loadings_.cols();
    if (eigenvalues_.size() != k || static_cast<Index>(component_block_.size()) != k) {
        throw UsageError("model: eigenvalue/component-block size mismatch");
    }
    if (partition_.p() != p || column_means_.size() != p) {
        throw UsageError("model: partition or mean vector does not match p");
    }
    for (Index j = 0; j < k; ++j) {
        if (j > 0 && eigenvalues_(j) > eigenvalues_(j - 1)) {
            throw UsageError("model: eigenvalues must be descending");
        }
        Index b = component_block_[static_cast<std::size_t>(j)];
        if (b < 0 || b >= partition_.block_count()) {
            throw UsageError("model: component block id out of range");
        }
        const ColumnIndexSet& block = partition_.block(b);
        for (Index r = 0; r < p; ++r) {
            if (loadings_(r, j) != 0.0 && !block.contains(r)) {
                throw UsageError("model: loading support escapes its block");
            }
        }
        if (std::abs(loadings_.col(j).norm() - 1.0) > 1e-10) {
            throw UsageError("model: loading column is not unit norm");
        }
    }
}

double IsPcaModel::max_within_block_cross() const {
    double worst = 0.0;
    for (Index i = 0; i < k(); ++i) {
        for (Index j = i + 1; j < k(); ++j) {
            if (component_block_[static_cast<std::size_t>(i)] !=
                component_block_[static_cast<std::size_t>(j)]) {
                continue;
            }
            worst = std::max(worst, std::abs(loadings_.col(i).dot(loadings_.col(j))));
        }
    }
    return worst;
}

Matrix assemble_loadings(Index p,
                         const std::vector<std::pair<ColumnIndexSet, Matrix>>& block_loadings) {
    Index k_total = 0;
    for (const auto& [block, V] : block_loadings) {
        if (V.rows() != block.size()) {
            throw UsageError("assemble_loadings: block matrix row count does not match support");
        }
        if (block.indices().back() >= p) {
            throw UsageError("assemble_loadings: block support exceeds p");
        }
        for (Index j = 0; j < V.cols(); ++j) {
            if (std::abs(V.col(j).norm() - 1.0) > 1e-10) {
                throw UsageError("assemble_loadings: block loading column is not unit norm");
            }
        }
        k_total += V.cols();
    }

    Matrix out = Matrix::Zero(p, k_total);
    Index col = 0;
    for (const auto& [block, V] : block_loadings) {
        for (Index j = 0; j < V.cols(); ++j, ++col) {
            for (Index r = 0; r < block.size(); ++r) {
                out(block.indices()[static_cast<std::size_t>(r)], col) = V(r, j);
            }
        }
    }
    return out;
}

namespace {

Index exact_rank_cap(Index n, Index p_i) {
    // Centered data has rank <= n - 1; back-projection through XX^T needs
    // strictly positive Gram eigenvalues, so wide blocks cap at n - 1.
    return p_i <= n ? p_i : n - 1;
}

Index cdm_rank_cap(Index n, Index p_i) { return std::min(p_i, n / 2); }

}  // namespace

IsPcaModel fit(const DataMatrix& X, const BlockPartition& part, const FitOptions& options) {
    if (!X.centered()) {
        throw UsageError("fit requires a centered data matrix");
    }
    if (part.p() != X.cols()) {
        throw UsageError("fit: partition does not match the matrix column count");
    }
    if (options.k_policy.kind != KPolicy::Kind::FullRank && options.k_policy.k < 1) {
        throw UsageError("fit: k must be >= 1");
    }

    const Index n = X.rows();
    const Index p = X.cols();
    const Index b = part.block_count();

    struct Component {
        double eigenvalue;
        Index block;
        Index within;
        Index assembled_col;
    };
    std::vector<Component> components;
    std::vector<std::pair<ColumnIndexSet, Matrix>> block_loadings;
    block_loadings.reserve(static_cast<std::size_t>(b));

    Index assembled = 0;
    for (Index i = 0; i < b; ++i) {
        const ColumnIndexSet& block = part.block(i);
        const Index p_i = block.size();

        bool use_cdm = options.method == SvdMethod::Cdm &&
                       static_cast<double>(p_i) >
                           options.cdm_threshold_ratio * static_cast<double>(n);
        Index cap = use_cdm ? cdm_rank_cap(n, p_i) : exact_rank_cap(n, p_i);
        Index request = options.k_policy.kind == KPolicy::Kind::FullRank
                            ? cap
                            : std::min(options.k_policy.k, cap);
        if (request < 1) {
            throw UsageError("fit: block " + std::to_string(i + 1) +
                             " admits no components under the requested method");
        }

        DataMatrix sub = select_columns(X, block);
        SpectralEstimate est;
        try {
            est = use_cdm ? cdm_svd(sub, request, options.cdm_shuffle_seed)
                          : exact_svd(sub, request);
        } catch (const Error& e) {
            throw NumericalError("fit: block " + std::to_string(i + 1) + ": " + e.what());
        }

        for (Index j = 0; j < est.rank_used; ++j) {
            components.push_back({est.eigenvalues(j), i, j, assembled + j});
        }
        block_loadings.emplace_back(block, est.loadings);
        assembled += est.rank_used;
    }

    Matrix all_loadings = assemble_loadings(p, block_loadings);

    std::stable_sort(components.begin(), components.end(),
                     [](const Component& a, const Component& b) {
                         if (a.eigenvalue != b.eigenvalue) return a.eigenvalue > b.eigenvalue;
                         if (a.block != b.block) return a.block < b.block;
                         return a.within < b.within;
                     });

    Index k_keep = static_cast<Index>(components.size());
    if (options.k_policy.kind == KPolicy::Kind::GlobalTopK) {
        k_keep = std::min(k_keep, options.k_policy.k);
    }

    Matrix loadings(p, k_keep);
    Vector eigenvalues(k_keep);
    std::vector<Index> component_block(static_cast<std::size_t>(k_keep));
    for (Index j = 0; j < k_keep; ++j) {
        const Component& comp = components[static_cast<std::size_t>(j)];
        loadings.col(j) = all_loadings.col(comp.assembled_col);
        eigenvalues(j) = comp.eigenvalue;
        component_block[static_cast<std::size_t>(j)] = comp.block;
    }

    return IsPcaModel(std::move(loadings), std::move(eigenvalues), std::move(component_block),
                      part, options.method, X.means());
}

Matrix scores(const IsPcaModel& model, const DataMatrix& X) {
    if (X.cols() != model.p()) {
        throw UsageError("scores: column count does not match the model");
    }
    if (X.centered()) {
        return X.values() * model.loadings();
    }
    return (X.values().rowwise() - model.column_means().transpose()) * model.loadings();
}

namespace {

// Pearson correlation of two loading vectors treated as samples.
double abs_corr(const Vector& a, const Vector& b) {
    Vector ac = a.array() - a.mean();
    Vector bc = b.array() - b.mean();
    double na = ac.norm();
    double nb = bc.norm();
    if (na == 0.0 || nb == 0.0) {
        throw DataError("loading_correlations: constant loading vector");
    }
    return std::min(1.0, std::abs(ac.dot(bc)) / (na * nb));
}

}  // namespace

Matrix loading_correlations(const IsPcaModel& model, const SpectralEstimate& dense) {
    if (dense.loadings.rows() != model.p()) {
        throw UsageError("loading_correlations: dimension mismatch");
    }
    Matrix out(model.k(), dense.loadings.cols());
    for (Index i = 0; i < model.k(); ++i) {
        for (Index j = 0; j < dense.loadings.cols(); ++j) {
            out(i, j) = abs_corr(model.loadings().col(i), dense.loadings.col(j));
        }
    }
    return out;
}

}  // namespace ispca
