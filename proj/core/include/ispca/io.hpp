#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ispca/block_detect.hpp"
#include "ispca/matrix.hpp"
#include "ispca/model.hpp"
#include "ispca/pla.hpp"
#include "ispca/simulation.hpp"

namespace ispca {

struct CsvReadOptions {
    bool has_header = true;
    char delimiter = ',';
    bool transpose = false;  // for files distributed variables-as-rows
    bool center = true;
    bool log2_transform = false;  // applied before centering
};

/// Rectangular numeric CSV, observations as rows. Ragged rows and
/// non-numeric cells are rejected with their exact position.
DataMatrix read_matrix_csv(const std::filesystem::path& path, const CsvReadOptions& options = {});

/// One label per observation, plain text lines.
std::vector<std::string> read_labels(const std::filesystem::path& path);

// All files are written to a temporary sibling and atomically renamed, so
// failed stages never leave partial artifacts. CSV floats carry 17
// significant digits; JSON floats round-trip exactly.

void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_double(double value);  // %.17g

std::string partition_to_json(const BlockPartition& part);            // 1-based indices
BlockPartition partition_from_json(const std::string& text);
BlockPartition read_blocks_file(const std::filesystem::path& path, Index p);

std::string model_to_json(const IsPcaModel& model);
IsPcaModel model_from_json(const std::string& text);

std::string variance_json(const IsPcaModel& model, double total_variance);

std::string pla_report_to_json(const VarianceReport& report, double min_share);
std::string pla_report_to_csv(const VarianceReport& report);

std::string scores_to_csv(const Matrix& Z);
std::string loadings_to_csv(const IsPcaModel& model);  // sparse triplets
std::string correlations_to_csv(const Matrix& corr);

std::string biplot_csv(const Matrix& Z, Index comp_i, Index comp_j,
                       const std::vector<std::string>& labels);  // comps 0-based

std::string sim_results_to_csv(const SimResult& result);
std::string sim_summary_to_json(const SimResult& result);

}  // namespace ispca
