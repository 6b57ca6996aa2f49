#include "ispca/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "ispca/model.hpp"
#include "ispca/parallel.hpp"
#include "ispca/rng.hpp"
#include "ispca/spectra.hpp"

namespace ispca {

std::string to_string(SimApproach a) {
    switch (a) {
        case SimApproach::Cdm: return "CDM";
        case SimApproach::OracleIsPca: return "OracleIsPca";
        case SimApproach::FalseNegIsPca: return "FalseNegIsPca";
        case SimApproach::PmdIsPca: return "PmdIsPca";
        case SimApproach::Pmd: return "Pmd";
    }
    return "CDM";
}

SimApproach sim_approach_from_string(const std::string& name) {
    for (SimApproach a : all_sim_approaches()) {
        if (to_string(a) == name) return a;
    }
    throw UsageError("unknown simulation approach '" + name + "'");
}

std::vector<SimApproach> all_sim_approaches() {
    return {SimApproach::Cdm, SimApproach::OracleIsPca, SimApproach::FalseNegIsPca,
            SimApproach::PmdIsPca, SimApproach::Pmd};
}

SimConfig SimConfig::desk(std::uint64_t seed) {
    SimConfig cfg;
    cfg.n = 50;
    cfg.p = 500;
    cfg.b = 10;
    cfg.replicates = 20;
    cfg.seed = seed;
    cfg.profile = ScaleProfile::Desk;
    return cfg;
}

SimConfig SimConfig::paper(std::uint64_t seed, Index b) {
    SimConfig cfg;
    cfg.n = 100;
    cfg.p = 10000;
    cfg.b = b;
    cfg.replicates = 100;
    cfg.seed = seed;
    cfg.profile = ScaleProfile::Paper;
    return cfg;
}

void SimConfig::validate() const {
    if (n < 4 || p < 1 || b < 1) {
        throw UsageError("simulation requires n >= 4, p >= 1, b >= 1");
    }
    if (p % b != 0) {
        throw UsageError("simulation requires p divisible by b (equal block sizes)");
    }
    if (!(0.0 < omega_lo && omega_lo < omega_hi && omega_hi < 0.5)) {
        throw UsageError("simulation requires 0 < omega_lo < omega_hi < 0.5");
    }
    if (replicates < 1) {
        throw UsageError("simulation requires at least one replicate");
    }
    if (approaches.empty()) {
        throw UsageError("simulation requires at least one approach");
    }
}

PopulationTruth population_truth(Index p_i, double omega) {
    if (p_i < 1) {
        throw UsageError("population_truth requires p_i >= 1");
    }
    if (!(omega > 0.0 && omega < 0.5)) {
        throw UsageError("population_truth requires omega in (0, 0.5)");
    }
    PopulationTruth truth;
    truth.omega = omega;
    truth.eigenvalues = Vector::Constant(p_i, 1.0 - omega);
    truth.eigenvalues(0) = (1.0 - omega) + 2.0 * omega * static_cast<double>(p_i);
    truth.leading_vector =
        Vector::Constant(p_i, 1.0 / std::sqrt(static_cast<double>(p_i)));
    return truth;
}

SimSample sample_block_gaussian(const SimConfig& cfg, Index rep) {
    cfg.validate();
    const Index p_i = cfg.p / cfg.b;

    Matrix raw(cfg.n, cfg.p);
    std::vector<PopulationTruth> truths;
    truths.reserve(static_cast<std::size_t>(cfg.b));
    std::vector<ColumnIndexSet> blocks;
    blocks.reserve(static_cast<std::size_t>(cfg.b));

    for (Index block = 0; block < cfg.b; ++block) {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(rep),
                       static_cast<std::uint64_t>(block));
        double omega = rng.next_uniform(cfg.omega_lo, cfg.omega_hi);
        truths.push_back(population_truth(p_i, omega));

        const double noise_scale = std::sqrt(1.0 - omega);
        const double spike_scale = std::sqrt(2.0 * omega);
        const Index offset = block * p_i;
        for (Index a = 0; a < cfg.n; ++a) {
            double w = rng.next_gaussian();
            for (Index j = 0; j < p_i; ++j) {
                raw(a, offset + j) = noise_scale * rng.next_gaussian() + spike_scale * w;
            }
        }

        std::vector<Index> cols(static_cast<std::size_t>(p_i));
        for (Index j = 0; j < p_i; ++j) cols[static_cast<std::size_t>(j)] = offset + j;
        blocks.emplace_back(std::move(cols));
    }

    return SimSample{center_columns(DataMatrix(std::move(raw))),
                     BlockPartition(cfg.p, std::move(blocks)), std::move(truths)};
}

namespace detail {

MetricSummary summarize(std::vector<double> values) {
    MetricSummary s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        double pos = q * (n - 1.0);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, values.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    s.q25 = quantile(0.25);
    s.median = quantile(0.5);
    s.q75 = quantile(0.75);
    return s;
}

}  // namespace detail

namespace {

Vector padded_truth_vector(const SimSample& sample, Index block) {
    const ColumnIndexSet& cols = sample.partition.block(block);
    Vector v = Vector::Zero(sample.partition.p());
    double value = 1.0 / std::sqrt(static_cast<double>(cols.size()));
    for (Index j : cols.indices()) v(j) = value;
    return v;
}

// Greedy best-cosine assignment of estimated components to blocks; ties
// resolved toward the lowest component then block index.
std::vector<std::pair<Index, Index>> greedy_match(const Matrix& cosines) {
    const Index rows = cosines.rows();
    const Index cols = cosines.cols();
    std::vector<bool> row_used(static_cast<std::size_t>(rows), false);
    std::vector<bool> col_used(static_cast<std::size_t>(cols), false);
    std::vector<std::pair<Index, Index>> assignment;
    const Index rounds = std::min(rows, cols);
    for (Index round = 0; round < rounds; ++round) {
        double best = -1.0;
        Index bi = -1, bj = -1;
        for (Index i = 0; i < rows; ++i) {
            if (row_used[static_cast<std::size_t>(i)]) continue;
            for (Index j = 0; j < cols; ++j) {
                if (col_used[static_cast<std::size_t>(j)]) continue;
                if (cosines(i, j) > best) {
                    best = cosines(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        row_used[static_cast<std::size_t>(bi)] = true;
        col_used[static_cast<std::size_t>(bj)] = true;
        assignment.emplace_back(bi, bj);
    }
    return assignment;
}

// HBIC-minimal PMD vector over the default penalty grid on the full
// matrix; the direct sparse-PCA baseline arm.
PmdResult pmd_select_hbic(const DataMatrix& X) {
    const Index n = X.rows();
    const Index m = X.cols();
    const double frob2 = X.values().squaredNorm();
    const double pen = ispca::detail::hbic_penalty_factor(n, m, 2.0);

    PmdResult best;
    double best_hbic = 0.0;
    bool have = false;
    for (double c : ispca::detail::default_penalty_grid(m)) {
        PmdResult sol = pmd_rank1(X, c);
        Index nnz = 0;
        for (Index j = 0; j < m; ++j) {
            if (sol.v(j) != 0.0) ++nnz;
        }
        if (nnz == 0) continue;
        double rss = std::max(frob2 - (X.values() * sol.v).squaredNorm(), 1e-300);
        double hbic = static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
                      static_cast<double>(nnz) * pen;
        if (!have || hbic < best_hbic) {
            best = std::move(sol);
            best_hbic = hbic;
            have = true;
        }
    }
    if (!have) {
        throw NumericalError("Pmd arm: no usable penalized solution on this replicate");
    }
    return best;
}

struct ReplicateOutput {
    std::vector<SimCell> cells;
    std::vector<SimFailure> failures;
};

void run_cdm_arm(const SimSample& sample, Index rep, ReplicateOutput& out) {
    const Index b = sample.partition.block_count();
    SpectralEstimate est = cdm_svd(sample.X, b);

    Matrix cosines(b, b);
    for (Index comp = 0; comp < b; ++comp) {
        for (Index block = 0; block < b; ++block) {
            cosines(comp, block) =
                cosine_similarity(est.loadings.col(comp), padded_truth_vector(sample, block));
        }
    }
    for (auto [comp, block] : greedy_match(cosines)) {
        out.cells.push_back({rep, SimApproach::Cdm, block, cosines(comp, block),
                             eigenvalue_ratio(est.eigenvalues(comp),
                                              sample.truths[static_cast<std::size_t>(block)]
                                                  .eigenvalues(0))});
    }
}

void run_oracle_arm(const SimSample& sample, Index rep, ReplicateOutput& out) {
    FitOptions options;
    options.method = SvdMethod::Cdm;
    options.cdm_threshold_ratio = 0.0;  // the paper computes every arm with CDM
    options.k_policy = KPolicy::fixed_per_block(1);
    IsPcaModel model = fit(sample.X, sample.partition, options);

    for (Index j = 0; j < model.k(); ++j) {
        Index block = model.component_block()[static_cast<std::size_t>(j)];
        double cos = cosine_similarity(model.loadings().col(j), padded_truth_vector(sample, block));
        double ratio = eigenvalue_ratio(
            model.eigenvalues()(j),
            sample.truths[static_cast<std::size_t>(block)].eigenvalues(0));
        out.cells.push_back({rep, SimApproach::OracleIsPca, block, cos, ratio});
    }
}

void run_false_negative_arm(const SimSample& sample, Index rep, ReplicateOutput& out) {
    BlockPartition merged = merge_pairs(sample.partition);

    FitOptions options;
    options.method = SvdMethod::Cdm;
    options.cdm_threshold_ratio = 0.0;
    options.k_policy = KPolicy::fixed_per_block(2);
    IsPcaModel model = fit(sample.X, merged, options);

    // Merged block m holds true blocks 2m and 2m+1; match its two
    // components to those two spikes by best cosine.
    for (Index m = 0; m < merged.block_count(); ++m) {
        std::vector<Index> comps;
        for (Index j = 0; j < model.k(); ++j) {
            if (model.component_block()[static_cast<std::size_t>(j)] == m) comps.push_back(j);
        }
        std::vector<Index> true_blocks = {2 * m, 2 * m + 1};
        Matrix cosines(static_cast<Index>(comps.size()), 2);
        for (Index ci = 0; ci < static_cast<Index>(comps.size()); ++ci) {
            for (Index bi = 0; bi < 2; ++bi) {
                cosines(ci, bi) = cosine_similarity(
                    model.loadings().col(comps[static_cast<std::size_t>(ci)]),
                    padded_truth_vector(sample, true_blocks[static_cast<std::size_t>(bi)]));
            }
        }
        for (auto [ci, bi] : greedy_match(cosines)) {
            Index comp = comps[static_cast<std::size_t>(ci)];
            Index block = true_blocks[static_cast<std::size_t>(bi)];
            out.cells.push_back(
                {rep, SimApproach::FalseNegIsPca, block, cosines(ci, bi),
                 eigenvalue_ratio(model.eigenvalues()(comp),
                                  sample.truths[static_cast<std::size_t>(block)].eigenvalues(0))});
        }
    }
}

// Only the leading component is evaluated for the two PMD-derived arms.
void record_best_block_cell(const SimSample& sample, Index rep, SimApproach approach,
                            const Vector& loading, double eigenvalue, ReplicateOutput& out) {
    const Index b = sample.partition.block_count();
    double best_cos = -1.0;
    Index best_block = 0;
    for (Index block = 0; block < b; ++block) {
        double cos = cosine_similarity(loading, padded_truth_vector(sample, block));
        if (cos > best_cos) {
            best_cos = cos;
            best_block = block;
        }
    }
    out.cells.push_back(
        {rep, approach, best_block, best_cos,
         eigenvalue_ratio(eigenvalue,
                          sample.truths[static_cast<std::size_t>(best_block)].eigenvalues(0))});
}

void run_pmd_ispca_arm(const SimSample& sample, Index rep, ReplicateOutput& out) {
    DetectorConfig det;
    BlockPartition detected = detect_sparse_split(sample.X, det);

    FitOptions options;
    options.method = SvdMethod::Cdm;
    options.cdm_threshold_ratio = 0.0;
    options.k_policy = KPolicy::global_top(1);
    IsPcaModel model = fit(sample.X, detected, options);

    record_best_block_cell(sample, rep, SimApproach::PmdIsPca, model.loadings().col(0),
                           model.eigenvalues()(0), out);
}

void run_pmd_arm(const SimSample& sample, Index rep, ReplicateOutput& out) {
    PmdResult sol = pmd_select_hbic(sample.X);
    double eigenvalue = sol.d * sol.d / static_cast<double>(sample.X.rows());
    record_best_block_cell(sample, rep, SimApproach::Pmd, sol.v, eigenvalue, out);
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg, unsigned threads) {
    cfg.validate();
    if (std::find(cfg.approaches.begin(), cfg.approaches.end(), SimApproach::FalseNegIsPca) !=
            cfg.approaches.end() &&
        cfg.b % 2 != 0) {
        throw UsageError("FalseNegIsPca requires an even number of blocks");
    }

    std::vector<ReplicateOutput> outputs(static_cast<std::size_t>(cfg.replicates));
    parallel_for(static_cast<std::size_t>(cfg.replicates), threads, [&](std::size_t rep_idx) {
        const Index rep = static_cast<Index>(rep_idx);
        ReplicateOutput& out = outputs[rep_idx];
        SimSample sample = sample_block_gaussian(cfg, rep);
        for (SimApproach approach : cfg.approaches) {
            try {
                switch (approach) {
                    case SimApproach::Cdm: run_cdm_arm(sample, rep, out); break;
                    case SimApproach::OracleIsPca: run_oracle_arm(sample, rep, out); break;
                    case SimApproach::FalseNegIsPca:
                        run_false_negative_arm(sample, rep, out);
                        break;
                    case SimApproach::PmdIsPca: run_pmd_ispca_arm(sample, rep, out); break;
                    case SimApproach::Pmd: run_pmd_arm(sample, rep, out); break;
                }
            } catch (const std::exception& e) {
                out.failures.push_back({rep, approach, e.what()});
            }
        }
    });

    SimResult result;
    result.config = cfg;
    for (auto& out : outputs) {
        result.cells.insert(result.cells.end(), out.cells.begin(), out.cells.end());
        result.failures.insert(result.failures.end(), out.failures.begin(), out.failures.end());
    }

    for (SimApproach approach : cfg.approaches) {
        std::vector<double> cosines, ratios;
        for (const SimCell& cell : result.cells) {
            if (cell.approach != approach) continue;
            cosines.push_back(cell.cosine);
            ratios.push_back(cell.ratio);
        }
        ApproachSummary summary;
        summary.approach = approach;
        summary.cells = static_cast<Index>(cosines.size());
        summary.cosine = detail::summarize(std::move(cosines));
        summary.ratio = detail::summarize(std::move(ratios));
        result.summaries.push_back(summary);
    }
    return result;
}

}  // namespace ispca
