#include "ispca/block_detect.hpp"

#include <gtest/gtest.h>

#include <set>

#include "ispca/simulation.hpp"
#include "ispca/spectra.hpp"
#include "support/oracles.hpp"

using namespace ispca;

namespace {

// Partition equality as a set of sets, ignoring block order.
std::set<std::vector<Index>> as_set(const BlockPartition& part) {
    std::set<std::vector<Index>> out;
    for (const auto& block : part.blocks()) out.insert(block.indices());
    return out;
}

// Brute-force oracle: thresholded |R| graph, components by BFS.
std::set<std::vector<Index>> threshold_components_oracle(const DataMatrix& X, double threshold) {
    const Index p = X.cols();
    Matrix R = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            double num = X.values().col(i).dot(X.values().col(j));
            R(i, j) = num / (X.values().col(i).norm() * X.values().col(j).norm());
        }
    }
    std::set<std::vector<Index>> blocks;
    std::vector<bool> visited(static_cast<std::size_t>(p), false);
    for (Index start = 0; start < p; ++start) {
        if (visited[static_cast<std::size_t>(start)]) continue;
        std::vector<Index> component{start};
        visited[static_cast<std::size_t>(start)] = true;
        for (std::size_t q = 0; q < component.size(); ++q) {
            for (Index j = 0; j < p; ++j) {
                if (visited[static_cast<std::size_t>(j)]) continue;
                if (std::abs(R(component[q], j)) > threshold) {
                    visited[static_cast<std::size_t>(j)] = true;
                    component.push_back(j);
                }
            }
        }
        std::sort(component.begin(), component.end());
        blocks.insert(component);
    }
    return blocks;
}

}  // namespace

TEST(DetectOracle, WrapsPartition) {
    BlockPartition part = detect_oracle(4, {ColumnIndexSet({0, 1}), ColumnIndexSet({2, 3})});
    EXPECT_EQ(part.block_count(), 2);
    EXPECT_EQ(part.permutation(), (Permutation{0, 1, 2, 3}));

    BlockPartition swapped = detect_oracle(3, {ColumnIndexSet({1}), ColumnIndexSet({0, 2})});
    EXPECT_EQ(swapped.permutation(), (Permutation{1, 0, 2}));
}

TEST(DetectOracle, RejectsOverlapAndGap) {
    EXPECT_THROW(detect_oracle(2, {ColumnIndexSet({0}), ColumnIndexSet({0, 1})}), UsageError);
    EXPECT_THROW(detect_oracle(3, {ColumnIndexSet({0, 1})}), UsageError);
    EXPECT_THROW(detect_oracle(2, {ColumnIndexSet({0, 1, 2})}), UsageError);
}

TEST(MergePairs, HalvesBlockCount) {
    std::vector<ColumnIndexSet> blocks;
    for (Index i = 0; i < 4; ++i) blocks.push_back(ColumnIndexSet({2 * i, 2 * i + 1}));
    BlockPartition merged = merge_pairs(BlockPartition(8, std::move(blocks)));
    EXPECT_EQ(merged.block_count(), 2);
    EXPECT_EQ(merged.block(0).indices(), (std::vector<Index>{0, 1, 2, 3}));
    EXPECT_EQ(merged.block(1).indices(), (std::vector<Index>{4, 5, 6, 7}));

    BlockPartition whole = merge_pairs(merged);
    EXPECT_EQ(whole.block_count(), 1);
    EXPECT_EQ(whole.block(0).size(), 8);
}

TEST(MergePairs, RejectsOddCount) {
    BlockPartition three(3, {ColumnIndexSet({0}), ColumnIndexSet({1}), ColumnIndexSet({2})});
    EXPECT_THROW(merge_pairs(three), UsageError);
}

TEST(ThresholdGraph, IndependentColumnsGiveSingletons) {
    CounterRng rng(61, 0);
    // Exactly orthogonal columns: every correlation is 0.
    Matrix X = test::orthonormal_mean_zero(rng, 12, 5) * 3.0;
    BlockPartition part =
        detect_threshold_graph(DataMatrix::as_centered(std::move(X)), 0.05);
    EXPECT_EQ(part.block_count(), 5);
}

TEST(ThresholdGraph, PerfectCorrelationPairs) {
    CounterRng rng(62, 0);
    Matrix base = test::orthonormal_mean_zero(rng, 10, 2);
    Matrix X(10, 4);
    X.col(0) = base.col(0);
    X.col(1) = 2.0 * base.col(0);   // duplicate direction of column 1
    X.col(2) = base.col(1);
    X.col(3) = -0.5 * base.col(1);  // duplicate direction of column 3
    BlockPartition part = detect_threshold_graph(DataMatrix::as_centered(std::move(X)), 0.5);
    EXPECT_EQ(part.block_count(), 2);
    EXPECT_EQ(part.block(0).indices(), (std::vector<Index>{0, 1}));
    EXPECT_EQ(part.block(1).indices(), (std::vector<Index>{2, 3}));
}

TEST(ThresholdGraph, MatchesBruteForceOracle) {
    SimConfig cfg;
    cfg.n = 60;
    cfg.p = 24;
    cfg.b = 4;
    cfg.replicates = 1;
    cfg.seed = 404;
    for (Index rep = 0; rep < 10; ++rep) {
        SimSample sample = sample_block_gaussian(cfg, rep);
        BlockPartition part = detect_threshold_graph(sample.X, 0.25);
        EXPECT_EQ(as_set(part), threshold_components_oracle(sample.X, 0.25));
    }
}

TEST(ThresholdGraph, ZeroVarianceColumnsBecomeSingletons) {
    CounterRng rng(63, 0);
    Matrix X(8, 3);
    X.col(0) = test::orthonormal_mean_zero(rng, 8, 1).col(0);
    X.col(1) = Vector::Zero(8);
    X.col(2) = 3.0 * X.col(0);
    std::vector<Index> reported;
    BlockPartition part =
        detect_threshold_graph(DataMatrix::as_centered(std::move(X)), 0.5, &reported);
    EXPECT_EQ(reported, (std::vector<Index>{1}));
    EXPECT_EQ(part.block_count(), 2);
    EXPECT_EQ(part.block(0).indices(), (std::vector<Index>{0, 2}));
    EXPECT_EQ(part.block(1).indices(), (std::vector<Index>{1}));
}

TEST(ThresholdGraph, RaisingThresholdNeverMerges) {
    SimConfig cfg;
    cfg.n = 40;
    cfg.p = 20;
    cfg.b = 4;
    cfg.seed = 777;
    SimSample sample = sample_block_gaussian(cfg, 0);
    BlockPartition coarse = detect_threshold_graph(sample.X, 0.1);
    BlockPartition fine = detect_threshold_graph(sample.X, 0.4);
    // Every fine block must sit inside one coarse block.
    for (const auto& f : fine.blocks()) {
        bool contained = false;
        for (const auto& c : coarse.blocks()) {
            bool all = true;
            for (Index j : f.indices()) {
                if (!c.contains(j)) all = false;
            }
            if (all) contained = true;
        }
        EXPECT_TRUE(contained);
    }
}

TEST(ThresholdGraph, PermutationInvariantUpToRelabeling) {
    SimConfig cfg;
    cfg.n = 50;
    cfg.p = 20;
    cfg.b = 4;
    cfg.seed = 888;
    SimSample sample = sample_block_gaussian(cfg, 0);
    Permutation perm{5, 17, 2, 8, 0, 13, 19, 4, 10, 1, 6, 15, 3, 12, 18, 7, 11, 9, 16, 14};
    DataMatrix permuted =
        DataMatrix::as_centered(apply_permutation(sample.X.values(), perm));

    BlockPartition base = detect_threshold_graph(sample.X, 0.25);
    BlockPartition relabeled = detect_threshold_graph(permuted, 0.25);

    // Map the permuted partition back to original labels.
    std::set<std::vector<Index>> mapped;
    for (const auto& block : relabeled.blocks()) {
        std::vector<Index> original;
        for (Index j : block.indices()) original.push_back(perm[static_cast<std::size_t>(j)]);
        std::sort(original.begin(), original.end());
        mapped.insert(original);
    }
    EXPECT_EQ(mapped, as_set(base));
}

TEST(ThresholdGraph, RejectsBadThreshold) {
    CounterRng rng(64, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 6, 3)));
    EXPECT_THROW(detect_threshold_graph(X, 0.0), UsageError);
    EXPECT_THROW(detect_threshold_graph(X, 1.0), UsageError);
}

TEST(SoftThreshold, Definition) {
    Vector g(3);
    g << 3.0, -1.0, 0.2;
    Vector out = detail::soft_threshold(g, 0.5);
    EXPECT_DOUBLE_EQ(out(0), 2.5);
    EXPECT_DOUBLE_EQ(out(1), -0.5);
    EXPECT_DOUBLE_EQ(out(2), 0.0);
}

TEST(PmdRank1, UnconstrainedLimitMatchesLeadingSingularVector) {
    CounterRng rng(65, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 20, 9)));
    PmdResult res = pmd_rank1(X, std::sqrt(9.0));

    test::JacobiResult oracle = test::jacobi_eigen(covariance(X).values());
    EXPECT_NEAR(cosine_similarity(res.v, oracle.vectors.col(0)), 1.0, 1e-6);
    // d is the top singular value of X at the optimum.
    EXPECT_NEAR(res.d * res.d / 20.0, oracle.values(0), 1e-6 * oracle.values(0));
}

TEST(PmdRank1, UnitBudgetPicksBestColumn) {
    CounterRng rng(66, 0);
    for (int rep = 0; rep < 10; ++rep) {
        DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 12, 7)));
        PmdResult res = pmd_rank1(X, 1.0);

        Index nnz = 0;
        Index support = -1;
        for (Index j = 0; j < 7; ++j) {
            if (res.v(j) != 0.0) {
                ++nnz;
                support = j;
            }
        }
        EXPECT_EQ(nnz, 1);

        // Brute force over all coordinate vectors.
        Index best = 0;
        double best_norm = -1.0;
        for (Index j = 0; j < 7; ++j) {
            double norm = X.values().col(j).norm();
            if (norm > best_norm) {
                best_norm = norm;
                best = j;
            }
        }
        EXPECT_EQ(support, best);
        EXPECT_NEAR(std::abs(res.d), best_norm, 1e-8 * best_norm);
    }
}

TEST(PmdRank1, ConstraintsAndMonotoneAscent) {
    CounterRng rng(67, 0);
    for (int rep = 0; rep < 20; ++rep) {
        Index n = 8 + static_cast<Index>(rng.next_index(20));
        Index p = 3 + static_cast<Index>(rng.next_index(20));
        DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, n, p)));
        double c = 1.0 + (std::sqrt(static_cast<double>(p)) - 1.0) * rng.next_double();
        PmdResult res = pmd_rank1(X, c);

        EXPECT_LE(res.v.norm(), 1.0 + 1e-8);
        EXPECT_LE(res.v.lpNorm<1>(), c * (1.0 + 1e-8));
        EXPECT_LE(res.u.norm(), 1.0 + 1e-8);
        for (std::size_t t = 1; t < res.objective_history.size(); ++t) {
            EXPECT_GE(res.objective_history[t],
                      res.objective_history[t - 1] -
                          1e-12 * std::max(1.0, std::abs(res.objective_history[t])));
        }
    }
}

TEST(PmdRank1, RejectsBadBudget) {
    CounterRng rng(68, 0);
    DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, 6, 4)));
    EXPECT_THROW(pmd_rank1(X, 0.5), UsageError);
    EXPECT_THROW(pmd_rank1(X, 2.5), UsageError);  // sqrt(4) = 2
}

TEST(SparseSplit, SingleStrongBlockStaysWhole) {
    // One compound-symmetric block with a strong spike: the HBIC-minimal
    // vector is dense, so no split happens.
    SimConfig cfg;
    cfg.n = 100;
    cfg.p = 20;
    cfg.b = 1;
    cfg.omega_lo = 0.35;
    cfg.omega_hi = 0.45;
    cfg.seed = 31;
    SimSample sample = sample_block_gaussian(cfg, 0);
    BlockPartition part = detect_sparse_split(sample.X, DetectorConfig{});
    EXPECT_EQ(part.block_count(), 1);
}

TEST(SparseSplit, TwoBlocksMatchThresholdOracle) {
    SimConfig cfg;
    cfg.n = 100;
    cfg.p = 50;
    cfg.b = 2;
    cfg.omega_lo = 0.25;
    cfg.omega_hi = 0.35;
    cfg.seed = 32;
    int agreements = 0;
    for (Index rep = 0; rep < 10; ++rep) {
        SimSample sample = sample_block_gaussian(cfg, rep);
        BlockPartition split = detect_sparse_split(sample.X, DetectorConfig{});
        BlockPartition graph = detect_threshold_graph(sample.X, 0.2);
        if (as_set(split) == as_set(graph)) ++agreements;
    }
    EXPECT_GE(agreements, 9);
}

TEST(SparseSplit, SingleColumnShortCircuits) {
    Matrix one(5, 1);
    one << 1, -1, 2, -2, 0;
    BlockPartition part =
        detect_sparse_split(DataMatrix::as_centered(std::move(one)), DetectorConfig{});
    EXPECT_EQ(part.block_count(), 1);
    EXPECT_EQ(part.block(0).size(), 1);
}

TEST(SparseSplit, OutputIsAlwaysAPartition) {
    CounterRng rng(69, 0);
    for (int rep = 0; rep < 5; ++rep) {
        Index n = 20 + static_cast<Index>(rng.next_index(30));
        Index p = 5 + static_cast<Index>(rng.next_index(20));
        DataMatrix X = center_columns(DataMatrix(test::random_gaussian(rng, n, p)));
        BlockPartition part = detect_sparse_split(X, DetectorConfig{});
        // The BlockPartition constructor validates the disjoint cover; reaching
        // here means the invariant held. Spot-check the permutation too.
        EXPECT_EQ(static_cast<Index>(part.permutation().size()), p);
    }
}

TEST(DetectorConfig, Validation) {
    DetectorConfig cfg;
    cfg.threshold = 1.5;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.threshold.reset();
    cfg.penalty_grid = {2.0, 1.5};
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.penalty_grid = {1.0, 2.0};
    cfg.hbic_scale = -1.0;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.hbic_scale = 2.0;
    EXPECT_NO_THROW(cfg.validate());
}

TEST(DefaultThreshold, UniversalRate) {
    EXPECT_NEAR(default_correlation_threshold(100, 50),
                2.0 * std::sqrt(std::log(50.0) / 100.0), 1e-15);
}

TEST(DetectorStrategyNames, RoundTrip) {
    for (auto s : {DetectorStrategy::Oracle, DetectorStrategy::ThresholdGraph,
                   DetectorStrategy::SparseSplit}) {
        EXPECT_EQ(detector_strategy_from_string(to_string(s)), s);
    }
    EXPECT_THROW(detector_strategy_from_string("bogus"), UsageError);
}
