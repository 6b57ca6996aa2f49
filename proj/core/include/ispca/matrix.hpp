#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "ispca/error.hpp"

namespace ispca {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Permutation = std::vector<Index>;

/// n x p observations-by-variables matrix. Immutable after construction;
/// centering returns a new object and keeps the original column means so a
/// fitted model can center score-time data identically.
class DataMatrix {
public:
    DataMatrix(Matrix values, std::optional<std::vector<std::string>> col_labels = {});

    /// Marks already mean-zero data as centered without subtracting anything.
    /// With validate=true every column mean must be 0 within 1e-12 of the
    /// column max-abs scale.
    static DataMatrix as_centered(Matrix values,
                                  std::optional<std::vector<std::string>> col_labels = {},
                                  bool validate = true);

    Index rows() const { return values_.rows(); }
    Index cols() const { return values_.cols(); }
    const Matrix& values() const { return values_; }
    bool centered() const { return centered_; }

    /// Column means of the data the matrix was centered from (zeros if the
    /// matrix was constructed directly as centered).
    const Vector& means() const { return means_; }

    const std::optional<std::vector<std::string>>& col_labels() const { return col_labels_; }

private:
    DataMatrix() = default;

    Matrix values_;
    std::optional<std::vector<std::string>> col_labels_;
    Vector means_;
    bool centered_ = false;

    friend DataMatrix center_columns(const DataMatrix& X);
    friend DataMatrix select_columns(const DataMatrix& X, const std::vector<Index>& cols);
};

/// Sorted, duplicate-free set of column indices in [0, p).
class ColumnIndexSet {
public:
    explicit ColumnIndexSet(std::vector<Index> indices);

    const std::vector<Index>& indices() const { return indices_; }
    Index size() const { return static_cast<Index>(indices_.size()); }
    Index smallest() const { return indices_.front(); }
    bool contains(Index j) const;

    bool operator==(const ColumnIndexSet& other) const { return indices_ == other.indices_; }

private:
    std::vector<Index> indices_;
};

/// Symmetric p x p sample covariance with divisor n (the convention used
/// throughout: S = X^T X / n on centered data).
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(Matrix values);

    const Matrix& values() const { return values_; }
    Index dim() const { return values_.rows(); }

private:
    Matrix values_;
};

DataMatrix center_columns(const DataMatrix& X);

CovarianceMatrix covariance(const DataMatrix& X);

Vector column_variances(const DataMatrix& X);

/// Submatrix with columns taken in the order given (indices may be any
/// duplicate-free arrangement, not necessarily sorted).
DataMatrix select_columns(const DataMatrix& X, const std::vector<Index>& cols);
DataMatrix select_columns(const DataMatrix& X, const ColumnIndexSet& cols);

/// Column reordering: result.col(j) = M.col(perm[j]).
Matrix apply_permutation(const Matrix& M, const Permutation& perm);

Permutation inverse_permutation(const Permutation& perm);

namespace detail {
// Test hook: the covariance divisor is fixed to n everywhere in the library.
CovarianceMatrix covariance_with_divisor(const DataMatrix& X, double divisor);
void validate_permutation(const Permutation& perm, Index p);
}  // namespace detail

}  // namespace ispca
