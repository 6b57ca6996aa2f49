#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ispca/io.hpp"
#include "ispca/model.hpp"
#include "ispca/pla.hpp"

namespace ispca::cli {

namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Numerical: return 4;
    }
    return 4;
}

std::string error_json(const std::string& command, ErrorKind kind, const std::string& message) {
    nlohmann::json doc;
    std::string kind_name = kind == ErrorKind::Usage ? "usage"
                            : kind == ErrorKind::Data ? "data"
                                                      : "numerical";
    doc["error"] = {{"command", command}, {"kind", kind_name}, {"message", message}};
    return doc.dump();
}

std::pair<Index, Index> parse_component_pair(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw UsageError("component pair must look like 'i,j', got '" + text + "'");
    }
    try {
        Index i = std::stol(text.substr(0, comma));
        Index j = std::stol(text.substr(comma + 1));
        if (i < 1 || j < 1 || i == j) {
            throw UsageError("component pair needs two distinct indices >= 1");
        }
        return {i, j};
    } catch (const std::invalid_argument&) {
        throw UsageError("component pair must look like 'i,j', got '" + text + "'");
    } catch (const std::out_of_range&) {
        throw UsageError("component index out of range in '" + text + "'");
    }
}

namespace {

DataMatrix load_matrix(const RunConfig& cfg) {
    if (cfg.input_path.empty()) {
        throw UsageError("--input is required for this command");
    }
    CsvReadOptions options;
    options.has_header = cfg.has_header;
    options.transpose = cfg.transpose;
    options.center = !cfg.no_center;
    options.log2_transform = cfg.log2_transform;
    return read_matrix_csv(cfg.input_path, options);
}

BlockPartition make_partition(const RunConfig& cfg, const DataMatrix& X) {
    if (cfg.blocks_file) {
        return read_blocks_file(*cfg.blocks_file, X.cols());
    }
    switch (cfg.detector.strategy) {
        case DetectorStrategy::Oracle:
            throw UsageError("the oracle detector requires --blocks-file");
        case DetectorStrategy::ThresholdGraph: {
            double threshold = cfg.detector.threshold.value_or(
                std::min(0.99, default_correlation_threshold(X.rows(), X.cols())));
            std::vector<Index> zero_variance;
            BlockPartition part = detect_threshold_graph(X, threshold, &zero_variance);
            for (Index j : zero_variance) {
                std::cerr << "warning: column " << (j + 1)
                          << " has zero variance; kept as a singleton block\n";
            }
            return part;
        }
        case DetectorStrategy::SparseSplit:
            return detect_sparse_split(X, cfg.detector);
    }
    throw UsageError("unreachable detector strategy");
}

void ensure_output_dir(const RunConfig& cfg) {
    if (cfg.output_dir.empty()) {
        throw UsageError("--output-dir must not be empty");
    }
    fs::create_directories(cfg.output_dir);
}

FitOptions fit_options(const RunConfig& cfg) {
    FitOptions options;
    options.method = cfg.svd_method;
    options.k_policy = KPolicy::global_top(cfg.k);
    options.cdm_threshold_ratio = cfg.cdm_threshold_ratio;
    if (cfg.cdm_shuffle) options.cdm_shuffle_seed = cfg.seed;
    return options;
}

/// Dense counterpart with the same estimator family, rank-capped to what
/// the method supports on this matrix.
SpectralEstimate dense_estimate(const DataMatrix& X, SvdMethod method, Index k) {
    Index cap = method == SvdMethod::Cdm
                    ? X.rows() / 2
                    : (X.cols() <= X.rows() ? X.cols() : X.rows() - 1);
    Index k_dense = std::max<Index>(1, std::min(k, cap));
    return method == SvdMethod::Cdm ? cdm_svd(X, k_dense) : exact_svd(X, k_dense);
}

IsPcaModel fit_or_load_model(const RunConfig& cfg, const DataMatrix& X,
                             std::optional<BlockPartition>* partition_out = nullptr) {
    if (cfg.model_path) {
        std::ifstream in(*cfg.model_path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open model file: " + cfg.model_path->string());
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return model_from_json(buf.str());
    }
    BlockPartition part = make_partition(cfg, X);
    if (partition_out) *partition_out = part;
    return fit(X, part, fit_options(cfg));
}

void cmd_detect(const RunConfig& cfg) {
    DataMatrix X = load_matrix(cfg);
    BlockPartition part = make_partition(cfg, X);
    ensure_output_dir(cfg);
    write_text_atomic(cfg.output_dir / "partition.json", partition_to_json(part));

    std::cout << "detected " << part.block_count() << " blocks over " << part.p()
              << " columns\n";
    Index largest = 0;
    for (const auto& block : part.blocks()) largest = std::max(largest, block.size());
    std::cout << "largest block: " << largest << " columns\n";
    std::cout << "wrote " << (cfg.output_dir / "partition.json").string() << "\n";
}

void cmd_pla(const RunConfig& cfg) {
    DataMatrix X = load_matrix(cfg);
    BlockPartition part = make_partition(cfg, X);
    VarianceReport report = explained_variance_trace(X, part);
    ensure_output_dir(cfg);
    write_text_atomic(cfg.output_dir / "partition.json", partition_to_json(part));
    write_text_atomic(cfg.output_dir / "pla_report.json",
                      pla_report_to_json(report, cfg.min_share));
    write_text_atomic(cfg.output_dir / "pla_report.csv", pla_report_to_csv(report));

    std::vector<Index> selected = select_principal(report, cfg.min_share);
    std::cout << "blocks: " << part.block_count() << ", total variance "
              << format_double(report.total_variance) << "\n";
    std::size_t shown = std::min<std::size_t>(5, report.per_block.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& e = report.per_block[i];
        std::cout << "  block " << (e.block_id + 1) << " (" << e.block_size << " cols): share "
                  << format_double(e.share) << " (expected " << format_double(e.expected_share)
                  << ")\n";
    }
    std::cout << selected.size() << " block(s) at share >= " << format_double(cfg.min_share)
              << "\n";
}

void write_model_artifacts(const RunConfig& cfg, const DataMatrix& X,
                           const BlockPartition& part, const IsPcaModel& model) {
    ensure_output_dir(cfg);
    write_text_atomic(cfg.output_dir / "partition.json", partition_to_json(part));
    write_text_atomic(cfg.output_dir / "model.json", model_to_json(model));

    Matrix Z = scores(model, X);
    write_text_atomic(cfg.output_dir / "scores.csv", scores_to_csv(Z));
    write_text_atomic(cfg.output_dir / "loadings.csv", loadings_to_csv(model));

    double total = column_variances(X).sum();
    write_text_atomic(cfg.output_dir / "variance.json", variance_json(model, total));

    if (cfg.compare_dense) {
        SpectralEstimate dense = dense_estimate(X, cfg.svd_method, model.k());
        Matrix corr = loading_correlations(model, dense);
        write_text_atomic(cfg.output_dir / "loading_correlations.csv",
                          correlations_to_csv(corr));
    }
}

void cmd_ispca(const RunConfig& cfg) {
    DataMatrix X = load_matrix(cfg);
    BlockPartition part = make_partition(cfg, X);
    IsPcaModel model = fit(X, part, fit_options(cfg));
    write_model_artifacts(cfg, X, part, model);

    std::cout << "fit " << model.k() << " components over " << part.block_count()
              << " blocks (method " << to_string(model.svd_method()) << ")\n";
    if (model.svd_method() == SvdMethod::Cdm) {
        std::cout << "within-block orthogonality diagnostic: max |v_i^T v_j| = "
                  << format_double(model.max_within_block_cross()) << "\n";
    }
    std::cout << "wrote model.json, scores.csv, loadings.csv, variance.json in "
              << cfg.output_dir.string() << "\n";
}

void cmd_biplot_data(const RunConfig& cfg) {
    DataMatrix X = load_matrix(cfg);
    IsPcaModel model = fit_or_load_model(cfg, X);
    Matrix Z = scores(model, X);

    std::vector<std::string> labels;
    if (cfg.labels_path) labels = read_labels(*cfg.labels_path);

    std::vector<std::pair<Index, Index>> pairs = cfg.component_pairs;
    if (pairs.empty()) pairs.push_back({1, 2});

    ensure_output_dir(cfg);
    for (auto [i, j] : pairs) {
        std::string name = "biplot_" + std::to_string(i) + "_" + std::to_string(j) + ".csv";
        write_text_atomic(cfg.output_dir / name, biplot_csv(Z, i - 1, j - 1, labels));
        std::cout << "wrote " << (cfg.output_dir / name).string() << "\n";
    }
}

void cmd_simulate(const RunConfig& cfg) {
    SimResult result = run_simulation(cfg.sim, cfg.threads);
    ensure_output_dir(cfg);
    write_text_atomic(cfg.output_dir / "sim_results.csv", sim_results_to_csv(result));
    write_text_atomic(cfg.output_dir / "sim_summary.json", sim_summary_to_json(result));

    std::cout << "simulation: n = " << cfg.sim.n << ", p = " << cfg.sim.p << ", b = " << cfg.sim.b
              << ", replicates = " << cfg.sim.replicates << ", seed = " << cfg.sim.seed << "\n";
    for (const auto& s : result.summaries) {
        std::cout << "  " << to_string(s.approach) << ": mean cosine "
                  << format_double(s.cosine.mean) << ", mean ratio "
                  << format_double(s.ratio.mean) << " (" << s.cells << " cells)\n";
    }
    if (!result.failures.empty()) {
        std::cerr << result.failures.size() << " replicate failure(s) recorded\n";
        if (cfg.strict) {
            throw NumericalError("simulation recorded " +
                                 std::to_string(result.failures.size()) +
                                 " failures under --strict");
        }
    }
}

}  // namespace

void run(const RunConfig& cfg) {
    switch (cfg.command) {
        case Command::Detect: cmd_detect(cfg); return;
        case Command::Pla: cmd_pla(cfg); return;
        case Command::Ispca: cmd_ispca(cfg); return;
        case Command::Simulate: cmd_simulate(cfg); return;
        case Command::BiplotData: cmd_biplot_data(cfg); return;
    }
    throw UsageError("unknown command");
}

}  // namespace ispca::cli
