#include "ispca/block_detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ispca {

BlockPartition::BlockPartition(Index p, std::vector<ColumnIndexSet> blocks)
    : p_(p), blocks_(std::move(blocks)) {
    if (p_ < 1) {
        throw UsageError("block partition requires p >= 1");
    }
    if (blocks_.empty()) {
        throw UsageError("block partition requires at least one block");
    }
    std::vector<bool> seen(static_cast<std::size_t>(p_), false);
    Index covered = 0;
    for (const auto& block : blocks_) {
        for (Index j : block.indices()) {
            if (j >= p_) {
                throw UsageError("block column index out of range");
            }
            if (seen[static_cast<std::size_t>(j)]) {
                throw UsageError("blocks overlap at column " + std::to_string(j + 1));
            }
            seen[static_cast<std::size_t>(j)] = true;
            ++covered;
        }
    }
    if (covered != p_) {
        throw UsageError("blocks do not cover all " + std::to_string(p_) + " columns");
    }
    permutation_.reserve(static_cast<std::size_t>(p_));
    for (const auto& block : blocks_) {
        permutation_.insert(permutation_.end(), block.indices().begin(), block.indices().end());
    }
}

std::string to_string(DetectorStrategy s) {
    switch (s) {
        case DetectorStrategy::Oracle: return "oracle";
        case DetectorStrategy::ThresholdGraph: return "threshold";
        case DetectorStrategy::SparseSplit: return "sparse-split";
    }
    return "sparse-split";
}

DetectorStrategy detector_strategy_from_string(const std::string& name) {
    if (name == "oracle") return DetectorStrategy::Oracle;
    if (name == "threshold") return DetectorStrategy::ThresholdGraph;
    if (name == "sparse-split") return DetectorStrategy::SparseSplit;
    throw UsageError("unknown detector '" + name + "' (expected oracle|threshold|sparse-split)");
}

void DetectorConfig::validate() const {
    if (threshold && (*threshold <= 0.0 || *threshold >= 1.0)) {
        throw UsageError("correlation threshold must lie in (0, 1)");
    }
    for (std::size_t i = 0; i < penalty_grid.size(); ++i) {
        if (penalty_grid[i] < 1.0) {
            throw UsageError("penalty grid values must be >= 1");
        }
        if (i > 0 && penalty_grid[i] <= penalty_grid[i - 1]) {
            throw UsageError("penalty grid must be strictly ascending");
        }
    }
    if (hbic_scale <= 0.0) {
        throw UsageError("hbic_scale must be positive");
    }
    if (max_iter < 1 || tol <= 0.0) {
        throw UsageError("solver settings require max_iter >= 1 and tol > 0");
    }
}

BlockPartition detect_oracle(Index p, std::vector<ColumnIndexSet> blocks) {
    return BlockPartition(p, std::move(blocks));
}

BlockPartition merge_pairs(const BlockPartition& part) {
    if (part.block_count() % 2 != 0) {
        throw UsageError("merge_pairs requires an even number of blocks");
    }
    std::vector<ColumnIndexSet> merged;
    merged.reserve(static_cast<std::size_t>(part.block_count() / 2));
    for (Index i = 0; i < part.block_count(); i += 2) {
        std::vector<Index> joined = part.block(i).indices();
        const auto& next = part.block(i + 1).indices();
        joined.insert(joined.end(), next.begin(), next.end());
        std::sort(joined.begin(), joined.end());
        merged.emplace_back(std::move(joined));
    }
    return BlockPartition(part.p(), std::move(merged));
}

namespace {

struct UnionFind {
    explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), Index{0});
    }
    Index find(Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(Index a, Index b) {
        Index ra = find(a), rb = find(b);
        if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }
    std::vector<Index> parent;
};

std::vector<ColumnIndexSet> components_to_blocks(UnionFind& uf, Index p) {
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        groups[static_cast<std::size_t>(uf.find(j))].push_back(j);
    }
    std::vector<ColumnIndexSet> blocks;
    for (auto& g : groups) {
        if (!g.empty()) blocks.emplace_back(std::move(g));
    }
    // groups are indexed by their smallest member, so this order is already
    // ascending in the smallest member index.
    return blocks;
}

}  // namespace

double default_correlation_threshold(Index n, Index p) {
    return 2.0 * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

BlockPartition detect_threshold_graph(const DataMatrix& X, double threshold,
                                      std::vector<Index>* zero_variance_out) {
    if (!X.centered()) {
        throw UsageError("detect_threshold_graph requires a centered data matrix");
    }
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw UsageError("correlation threshold must lie in (0, 1)");
    }
    const Index p = X.cols();
    const Matrix& M = X.values();

    Vector norms(p);
    std::vector<bool> degenerate(static_cast<std::size_t>(p), false);
    for (Index j = 0; j < p; ++j) {
        norms(j) = M.col(j).norm();
        if (norms(j) == 0.0) {
            degenerate[static_cast<std::size_t>(j)] = true;
            if (zero_variance_out) zero_variance_out->push_back(j);
        }
    }

    UnionFind uf(p);
    for (Index i = 0; i < p; ++i) {
        if (degenerate[static_cast<std::size_t>(i)]) continue;
        for (Index j = i + 1; j < p; ++j) {
            if (degenerate[static_cast<std::size_t>(j)]) continue;
            double r = M.col(i).dot(M.col(j)) / (norms(i) * norms(j));
            if (std::abs(r) > threshold) uf.unite(i, j);
        }
    }
    return BlockPartition(p, components_to_blocks(uf, p));
}

namespace detail {

Vector soft_threshold(const Vector& g, double delta) {
    Vector out(g.size());
    for (Index i = 0; i < g.size(); ++i) {
        double mag = std::abs(g(i)) - delta;
        out(i) = mag > 0.0 ? (g(i) > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

std::vector<double> default_penalty_grid(Index m) {
    constexpr int kGridSize = 20;
    double hi = std::sqrt(static_cast<double>(m));
    std::vector<double> grid;
    if (hi <= 1.0) {
        grid.push_back(1.0);
        return grid;
    }
    grid.reserve(kGridSize);
    double log_hi = std::log(hi);
    for (int i = 0; i < kGridSize; ++i) {
        grid.push_back(std::exp(log_hi * static_cast<double>(i) /
                                static_cast<double>(kGridSize - 1)));
    }
    grid.front() = 1.0;
    grid.back() = hi;
    return grid;
}

double hbic_penalty_factor(Index n, Index m, double scale) {
    double nn = std::max<double>(3.0, static_cast<double>(n));
    return scale * std::log(std::log(nn)) * std::log(static_cast<double>(m));
}

}  // namespace detail

namespace {

// v(delta) = S(g, delta) normalized to unit L2 norm. ||v(delta)||_1 is
// non-increasing in delta, so a bisection from the feasible side (c >= 1
// makes the near-argmax endpoint always feasible) lands on the binding
// threshold.
Vector l1_constrained_unit_vector(const Vector& g, double c) {
    Vector v = detail::soft_threshold(g, 0.0);
    double norm = v.norm();
    if (norm == 0.0) return v;  // caller handles the degenerate case
    v /= norm;
    if (v.lpNorm<1>() <= c) return v;

    double lo = 0.0;
    double hi = g.cwiseAbs().maxCoeff();
    for (int iter = 0; iter < 60; ++iter) {
        double mid = 0.5 * (lo + hi);
        Vector cand = detail::soft_threshold(g, mid);
        double cand_norm = cand.norm();
        if (cand_norm == 0.0) {
            hi = mid;
            continue;
        }
        cand /= cand_norm;
        if (cand.lpNorm<1>() > c) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Vector out = detail::soft_threshold(g, hi);
    double out_norm = out.norm();
    if (out_norm == 0.0) {
        // hi collapsed onto max|g|; fall back to the argmax coordinate.
        Index arg = 0;
        g.cwiseAbs().maxCoeff(&arg);
        out = Vector::Zero(g.size());
        out(arg) = g(arg) >= 0.0 ? 1.0 : -1.0;
        return out;
    }
    return out / out_norm;
}

}  // namespace

PmdResult pmd_rank1(const DataMatrix& X, double c, Index max_iter, double tol) {
    if (!X.centered()) {
        throw UsageError("pmd_rank1 requires a centered data matrix");
    }
    const Index n = X.rows();
    const Index p = X.cols();
    double cmax = std::sqrt(static_cast<double>(p));
    if (c < 1.0 || c > cmax * (1.0 + 1e-12)) {
        throw UsageError("pmd_rank1: c must lie in [1, sqrt(p)]");
    }
    const Matrix& M = X.values();

    PmdResult res;
    res.u = Vector::Zero(n);
    res.v = Vector::Zero(p);
    if (M.cwiseAbs().maxCoeff() == 0.0) {
        res.converged = true;
        return res;
    }

    // Power-iteration start: leading right singular vector of X.
    Vector v = M.colwise().norm().transpose();
    v.normalize();
    for (int it = 0; it < 50; ++it) {
        Vector next = M.transpose() * (M * v);
        double norm = next.norm();
        if (norm == 0.0) break;
        next /= norm;
        double delta = (next - v).norm();
        v = next;
        if (delta < 1e-10) break;
    }

    double prev_obj = -1.0;
    for (Index it = 0; it < max_iter; ++it) {
        Vector xv = M * v;
        double xv_norm = xv.norm();
        if (xv_norm == 0.0) break;
        res.u = xv / xv_norm;

        Vector g = M.transpose() * res.u;
        Vector v_new = l1_constrained_unit_vector(g, c);
        if (v_new.norm() == 0.0) break;
        v = v_new;

        double obj = res.u.dot(M * v);
        res.objective_history.push_back(obj);
        res.iterations = it + 1;
        if (it > 0 && std::abs(obj - prev_obj) <= tol * std::max(1.0, std::abs(obj))) {
            res.converged = true;
            prev_obj = obj;
            break;
        }
        prev_obj = obj;
    }

    res.v = v;
    // Final u refresh keeps d = u^T X v consistent with the returned v.
    Vector xv = M * v;
    if (xv.norm() > 0.0) res.u = xv / xv.norm();
    res.d = res.u.dot(M * res.v);
    return res;
}

namespace {

struct HbicCandidate {
    std::vector<Index> support;  // within the current working set
    double hbic = 0.0;
    std::size_t grid_index = 0;
};

}  // namespace

BlockPartition detect_sparse_split(const DataMatrix& X, const DetectorConfig& cfg) {
    if (!X.centered()) {
        throw UsageError("detect_sparse_split requires a centered data matrix");
    }
    cfg.validate();
    const Index p = X.cols();
    const Index n = X.rows();

    std::vector<std::vector<Index>> finals;
    std::vector<std::vector<Index>> stack;
    {
        std::vector<Index> all(static_cast<std::size_t>(p));
        std::iota(all.begin(), all.end(), Index{0});
        stack.push_back(std::move(all));
    }

    while (!stack.empty()) {
        std::vector<Index> cols = std::move(stack.back());
        stack.pop_back();
        const Index m = static_cast<Index>(cols.size());
        if (m == 1) {
            finals.push_back(std::move(cols));
            continue;
        }

        DataMatrix sub = select_columns(X, cols);
        const double frob2 = sub.values().squaredNorm();
        if (frob2 == 0.0) {
            finals.push_back(std::move(cols));
            continue;
        }

        std::vector<double> grid;
        if (cfg.penalty_grid.empty()) {
            grid = detail::default_penalty_grid(m);
        } else {
            double cmax = std::sqrt(static_cast<double>(m));
            for (double c : cfg.penalty_grid) {
                if (c <= cmax * (1.0 + 1e-12)) grid.push_back(std::min(c, cmax));
            }
            if (grid.empty()) {
                throw UsageError("penalty grid has no feasible value for a " +
                                 std::to_string(m) + "-column set");
            }
        }

        double pen = detail::hbic_penalty_factor(n, m, cfg.hbic_scale);
        std::optional<HbicCandidate> best;
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            PmdResult sol = pmd_rank1(sub, grid[gi], cfg.max_iter, cfg.tol);
            std::vector<Index> support;
            for (Index j = 0; j < m; ++j) {
                if (sol.v(j) != 0.0) support.push_back(j);
            }
            if (support.empty()) continue;

            double rss = frob2 - (sub.values() * sol.v).squaredNorm();
            rss = std::max(rss, 1e-300);
            double hbic = static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
                          static_cast<double>(support.size()) * pen;

            bool better = !best || hbic < best->hbic ||
                          (hbic == best->hbic && (support.size() < best->support.size() ||
                                                  (support.size() == best->support.size() &&
                                                   gi < best->grid_index)));
            if (better) {
                best = HbicCandidate{std::move(support), hbic, gi};
            }
        }

        if (!best || static_cast<Index>(best->support.size()) == m) {
            finals.push_back(std::move(cols));
            continue;
        }

        std::vector<Index> inside, outside;
        inside.reserve(best->support.size());
        std::vector<bool> in_support(static_cast<std::size_t>(m), false);
        for (Index j : best->support) in_support[static_cast<std::size_t>(j)] = true;
        for (Index j = 0; j < m; ++j) {
            (in_support[static_cast<std::size_t>(j)] ? inside : outside)
                .push_back(cols[static_cast<std::size_t>(j)]);
        }
        stack.push_back(std::move(outside));
        stack.push_back(std::move(inside));
    }

    std::sort(finals.begin(), finals.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::vector<ColumnIndexSet> blocks;
    blocks.reserve(finals.size());
    for (auto& f : finals) blocks.emplace_back(std::move(f));
    return BlockPartition(p, std::move(blocks));
}

}  // namespace ispca
