#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ispca/block_detect.hpp"
#include "ispca/simulation.hpp"
#include "ispca/spectra.hpp"

namespace ispca::cli {

enum class Command { Detect, Pla, Ispca, Simulate, BiplotData };

struct RunConfig {
    Command command = Command::Ispca;

    std::filesystem::path input_path;
    std::filesystem::path output_dir = ".";

    DetectorConfig detector;
    std::optional<std::filesystem::path> blocks_file;

    SvdMethod svd_method = SvdMethod::Exact;
    Index k = 2;
    double cdm_threshold_ratio = 1.0;
    bool cdm_shuffle = false;
    double min_share = 0.0;
    bool compare_dense = false;

    bool no_center = false;
    bool transpose = false;
    bool log2_transform = false;
    bool has_header = true;
    std::optional<std::filesystem::path> labels_path;
    std::optional<std::filesystem::path> model_path;
    std::vector<std::pair<Index, Index>> component_pairs;  // 1-based as given

    SimConfig sim = SimConfig::desk();
    bool strict = false;

    std::uint64_t seed = 20240901;
    unsigned threads = 1;
};

/// Runs one command end to end; throws ispca::Error subclasses on failure.
/// All primary artifacts are written atomically into output_dir.
void run(const RunConfig& cfg);

/// Exit code for an error class: usage 2, data 3, numerical 4.
int exit_code(ErrorKind kind);

/// Single-line machine-readable error document for stderr.
std::string error_json(const std::string& command, ErrorKind kind, const std::string& message);

std::pair<Index, Index> parse_component_pair(const std::string& text);

}  // namespace ispca::cli
