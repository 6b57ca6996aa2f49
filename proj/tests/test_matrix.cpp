#include "ispca/matrix.hpp"

#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace ispca;

TEST(CenterColumns, SubtractsMeans) {
    Matrix values(3, 1);
    values << 1, 2, 3;
    DataMatrix X(values);
    DataMatrix centered = center_columns(X);
    EXPECT_DOUBLE_EQ(centered.values()(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(centered.values()(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(centered.values()(2, 0), 1.0);
    EXPECT_TRUE(centered.centered());
    EXPECT_DOUBLE_EQ(centered.means()(0), 2.0);
    // Original untouched.
    EXPECT_DOUBLE_EQ(X.values()(0, 0), 1.0);
    EXPECT_FALSE(X.centered());
}

TEST(CenterColumns, Idempotent) {
    CounterRng rng(11, 0);
    DataMatrix X(test::random_gaussian(rng, 6, 3));
    DataMatrix once = center_columns(X);
    DataMatrix twice = center_columns(once);
    EXPECT_LT((once.values() - twice.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CenterColumns, ColumnSumsVanish) {
    // Direct summation oracle on a random 5x3 matrix.
    CounterRng rng(12, 0);
    DataMatrix X(test::random_gaussian(rng, 5, 3));
    DataMatrix centered = center_columns(X);
    for (Index j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (Index i = 0; i < 5; ++i) sum += centered.values()(i, j);
        EXPECT_LT(std::abs(sum), 1e-12);
    }
}

TEST(DataMatrix, RejectsBadInputs) {
    EXPECT_THROW(DataMatrix(Matrix::Zero(1, 3)), DataError);
    Matrix bad = Matrix::Zero(3, 2);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(DataMatrix(bad), DataError);
    EXPECT_THROW(DataMatrix(Matrix::Zero(3, 2), std::vector<std::string>{"a"}), DataError);
    // as_centered validates column means unless told otherwise.
    Matrix off(2, 1);
    off << 1, 2;
    EXPECT_THROW(DataMatrix::as_centered(off), DataError);
    EXPECT_NO_THROW(DataMatrix::as_centered(off, {}, false));
}

TEST(Covariance, HandComputedCases) {
    Matrix values(2, 2);
    values << 1, -1, -1, 1;
    CovarianceMatrix S = covariance(DataMatrix::as_centered(values));
    EXPECT_DOUBLE_EQ(S.values()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(S.values()(0, 1), -1.0);
    EXPECT_DOUBLE_EQ(S.values()(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(S.values()(1, 1), 1.0);

    Matrix column(3, 1);
    column << -1, 0, 1;
    CovarianceMatrix s = covariance(DataMatrix::as_centered(column));
    EXPECT_DOUBLE_EQ(s.values()(0, 0), 2.0 / 3.0);
}

TEST(Covariance, MatchesTripleLoopOracle) {
    CounterRng rng(13, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 6, 4)));
    CovarianceMatrix S = covariance(X);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 4; ++j) {
            double sum = 0.0;
            for (Index a = 0; a < 6; ++a) sum += X.values()(a, i) * X.values()(a, j);
            EXPECT_NEAR(S.values()(i, j), sum / 6.0, 1e-14);
        }
    }
}

TEST(Covariance, RejectsNonCentered) {
    CounterRng rng(14, 0);
    DataMatrix X(test::random_gaussian(rng, 5, 3));
    EXPECT_THROW(covariance(X), UsageError);
}

TEST(Covariance, ExactlySymmetric) {
    CounterRng rng(15, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 7, 5)));
    CovarianceMatrix S = covariance(X);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            EXPECT_EQ(S.values()(i, j), S.values()(j, i));
        }
    }
}

TEST(ColumnVariances, KnownValues) {
    Matrix values(3, 2);
    values << -1, 0, 0, 0, 1, 0;
    Vector vars = column_variances(DataMatrix::as_centered(values));
    EXPECT_DOUBLE_EQ(vars(0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(vars(1), 0.0);
}

TEST(ColumnVariances, MatchesCovarianceDiagonal) {
    CounterRng rng(16, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 8, 5)));
    Vector vars = column_variances(X);
    CovarianceMatrix S = covariance(X);
    for (Index j = 0; j < 5; ++j) {
        EXPECT_NEAR(vars(j), S.values()(j, j), 1e-12);
    }
    // Trace identity.
    EXPECT_NEAR(vars.sum(), S.values().trace(), 1e-12 * std::abs(S.values().trace()));
}

TEST(SelectColumns, IdentityAndSingle) {
    CounterRng rng(17, 0);
    DataMatrix X = center_columns(
        DataMatrix(test::random_gaussian(rng, 5, 3),
                   std::vector<std::string>{"a", "b", "c"}));
    DataMatrix all = select_columns(X, std::vector<Index>{0, 1, 2});
    EXPECT_EQ((all.values() - X.values()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(all.centered());

    DataMatrix second = select_columns(X, std::vector<Index>{1});
    EXPECT_EQ(second.cols(), 1);
    EXPECT_EQ((second.values().col(0) - X.values().col(1)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(second.col_labels()->at(0), "b");
}

TEST(SelectColumns, ReorderRoundTrip) {
    CounterRng rng(18, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 4, 3)));
    DataMatrix reordered = select_columns(X, std::vector<Index>{2, 0});
    DataMatrix back = select_columns(reordered, std::vector<Index>{1, 0});
    EXPECT_EQ((back.values().col(0) - X.values().col(0)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.values().col(1) - X.values().col(2)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SelectColumns, PrincipalSubmatrixOfCovariance) {
    CounterRng rng(19, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 9, 6)));
    std::vector<Index> cols{1, 3, 4};
    CovarianceMatrix full = covariance(X);
    CovarianceMatrix sub = covariance(select_columns(X, cols));
    for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            EXPECT_NEAR(sub.values()(static_cast<Index>(a), static_cast<Index>(b)),
                        full.values()(cols[a], cols[b]), 1e-12);
        }
    }
}

TEST(SelectColumns, Errors) {
    CounterRng rng(20, 0);
    DataMatrix X(test::random_gaussian(rng, 4, 3));
    EXPECT_THROW(select_columns(X, std::vector<Index>{3}), UsageError);
    EXPECT_THROW(select_columns(X, std::vector<Index>{0, 0}), UsageError);
    EXPECT_THROW(select_columns(X, std::vector<Index>{}), UsageError);
}

TEST(ApplyPermutation, IdentityAndInvolution) {
    CounterRng rng(21, 0);
    Matrix M = test::random_gaussian(rng, 3, 4);
    EXPECT_EQ((apply_permutation(M, {0, 1, 2, 3}) - M).cwiseAbs().maxCoeff(), 0.0);
    Permutation swap{1, 0, 2, 3};
    EXPECT_EQ((apply_permutation(apply_permutation(M, swap), swap) - M).cwiseAbs().maxCoeff(),
              0.0);
}

TEST(ApplyPermutation, RandomComposition) {
    CounterRng rng(22, 0);
    Matrix M = test::random_gaussian(rng, 4, 4);
    Permutation perm{2, 0, 3, 1};
    Matrix restored = apply_permutation(apply_permutation(M, perm), inverse_permutation(perm));
    EXPECT_EQ((restored - M).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyPermutation, RejectsNonBijection) {
    Matrix M = Matrix::Zero(2, 3);
    EXPECT_THROW(apply_permutation(M, {0, 0, 1}), UsageError);
    EXPECT_THROW(apply_permutation(M, {0, 1}), UsageError);
    EXPECT_THROW(apply_permutation(M, {0, 1, 3}), UsageError);
}

TEST(ColumnIndexSet, Validation) {
    EXPECT_NO_THROW(ColumnIndexSet({0, 2, 5}));
    EXPECT_THROW(ColumnIndexSet({2, 0}), UsageError);
    EXPECT_THROW(ColumnIndexSet({0, 0}), UsageError);
    EXPECT_THROW(ColumnIndexSet({-1}), UsageError);
    EXPECT_THROW(ColumnIndexSet(std::vector<Index>{}), UsageError);
}
