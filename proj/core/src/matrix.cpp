#include "ispca/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace ispca {

namespace {

void check_finite(const Matrix& values) {
    if (!values.allFinite()) {
        throw DataError("data matrix contains non-finite entries");
    }
}

void check_shape(const Matrix& values) {
    if (values.rows() < 2 || values.cols() < 1) {
        throw DataError("data matrix must have at least 2 rows and 1 column");
    }
}

void check_labels(const Matrix& values,
                  const std::optional<std::vector<std::string>>& labels) {
    if (labels && static_cast<Index>(labels->size()) != values.cols()) {
        throw DataError("column label count does not match column count");
    }
}

}  // namespace

DataMatrix::DataMatrix(Matrix values, std::optional<std::vector<std::string>> col_labels) {
    check_shape(values);
    check_finite(values);
    check_labels(values, col_labels);
    values_ = std::move(values);
    col_labels_ = std::move(col_labels);
    means_ = Vector::Zero(values_.cols());
    centered_ = false;
}

DataMatrix DataMatrix::as_centered(Matrix values,
                                   std::optional<std::vector<std::string>> col_labels,
                                   bool validate) {
    check_shape(values);
    check_finite(values);
    check_labels(values, col_labels);
    if (validate) {
        for (Index j = 0; j < values.cols(); ++j) {
            double scale = std::max(1.0, values.col(j).cwiseAbs().maxCoeff());
            if (std::abs(values.col(j).mean()) > 1e-12 * scale) {
                throw DataError("column " + std::to_string(j + 1) +
                                " is not mean zero; call center_columns first");
            }
        }
    }
    DataMatrix X;
    X.values_ = std::move(values);
    X.col_labels_ = std::move(col_labels);
    X.means_ = Vector::Zero(X.values_.cols());
    X.centered_ = true;
    return X;
}

DataMatrix center_columns(const DataMatrix& X) {
    DataMatrix out;
    out.means_ = X.values_.colwise().mean();
    out.values_ = X.values_.rowwise() - out.means_.transpose();
    out.col_labels_ = X.col_labels_;
    out.centered_ = true;
    return out;
}

ColumnIndexSet::ColumnIndexSet(std::vector<Index> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) {
        throw UsageError("column index set must be nonempty");
    }
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] < 0) {
            throw UsageError("column index set contains a negative index");
        }
        if (i > 0 && indices_[i] <= indices_[i - 1]) {
            throw UsageError("column index set must be strictly increasing");
        }
    }
}

bool ColumnIndexSet::contains(Index j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
}

CovarianceMatrix::CovarianceMatrix(Matrix values) {
    if (values.rows() != values.cols()) {
        throw UsageError("covariance matrix must be square");
    }
    if ((values - values.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff())) {
        throw DataError("covariance matrix is not symmetric");
    }
    values_ = std::move(values);
    // Mirror one triangle so symmetry is exact, not just within tolerance.
    for (Index i = 0; i < values_.rows(); ++i) {
        for (Index j = i + 1; j < values_.cols(); ++j) {
            values_(j, i) = values_(i, j);
        }
    }
}

namespace detail {

CovarianceMatrix covariance_with_divisor(const DataMatrix& X, double divisor) {
    if (!X.centered()) {
        throw UsageError("covariance requires a centered data matrix");
    }
    Matrix S = (X.values().transpose() * X.values()) / divisor;
    // Enforce exact symmetry before handing over to the constructor.
    S = ((S + S.transpose()) * 0.5).eval();
    return CovarianceMatrix(std::move(S));
}

void validate_permutation(const Permutation& perm, Index p) {
    if (static_cast<Index>(perm.size()) != p) {
        throw UsageError("permutation length does not match column count");
    }
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    for (Index v : perm) {
        if (v < 0 || v >= p || seen[static_cast<std::size_t>(v)]) {
            throw UsageError("permutation is not a bijection on [0, p)");
        }
        seen[static_cast<std::size_t>(v)] = true;
    }
}

}  // namespace detail

CovarianceMatrix covariance(const DataMatrix& X) {
    return detail::covariance_with_divisor(X, static_cast<double>(X.rows()));
}

Vector column_variances(const DataMatrix& X) {
    if (!X.centered()) {
        throw UsageError("column_variances requires a centered data matrix");
    }
    return X.values().colwise().squaredNorm() / static_cast<double>(X.rows());
}

DataMatrix select_columns(const DataMatrix& X, const std::vector<Index>& cols) {
    if (cols.empty()) {
        throw UsageError("select_columns requires at least one index");
    }
    std::vector<bool> seen(static_cast<std::size_t>(X.cols()), false);
    for (Index j : cols) {
        if (j < 0 || j >= X.cols()) {
            throw UsageError("column index " + std::to_string(j) + " out of range [0, " +
                             std::to_string(X.cols()) + ")");
        }
        if (seen[static_cast<std::size_t>(j)]) {
            throw UsageError("duplicate column index " + std::to_string(j));
        }
        seen[static_cast<std::size_t>(j)] = true;
    }

    DataMatrix out;
    out.values_.resize(X.rows(), static_cast<Index>(cols.size()));
    out.means_.resize(static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.values_.col(static_cast<Index>(k)) = X.values().col(cols[k]);
        out.means_(static_cast<Index>(k)) = X.means()(cols[k]);
    }
    if (X.col_labels()) {
        std::vector<std::string> labels;
        labels.reserve(cols.size());
        for (Index j : cols) labels.push_back((*X.col_labels())[static_cast<std::size_t>(j)]);
        out.col_labels_ = std::move(labels);
    }
    out.centered_ = X.centered();
    return out;
}

DataMatrix select_columns(const DataMatrix& X, const ColumnIndexSet& cols) {
    return select_columns(X, cols.indices());
}

Matrix apply_permutation(const Matrix& M, const Permutation& perm) {
    detail::validate_permutation(perm, M.cols());
    Matrix out(M.rows(), M.cols());
    for (Index j = 0; j < M.cols(); ++j) {
        out.col(j) = M.col(perm[static_cast<std::size_t>(j)]);
    }
    return out;
}

Permutation inverse_permutation(const Permutation& perm) {
    detail::validate_permutation(perm, static_cast<Index>(perm.size()));
    Permutation inv(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) {
        inv[static_cast<std::size_t>(perm[j])] = static_cast<Index>(j);
    }
    return inv;
}

}  // namespace ispca
