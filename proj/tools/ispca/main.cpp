#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "ispca/io.hpp"

namespace {

using ispca::Index;
using ispca::cli::RunConfig;
using nlohmann::json;

unsigned threads_from_env() {
    const char* raw = std::getenv("ISPCA_THREADS");
    if (!raw) return 1;
    try {
        long value = std::stol(raw);
        if (value < 1) return 1;
        return static_cast<unsigned>(value);
    } catch (const std::exception&) {
        throw ispca::UsageError("ISPCA_THREADS must be a positive integer");
    }
}

// Raw string-side flag values; converted into RunConfig after the
// config-file merge so that flags always win over the file.
struct FlagValues {
    std::string config_path;
    std::string input;
    std::string output_dir;
    std::string detector;
    double threshold = 0.0;
    double hbic_scale = 0.0;
    std::string svd;
    Index k = 0;
    double min_share = 0.0;
    std::uint64_t seed = 0;
    bool no_center = false;
    bool no_header = false;
    bool transpose = false;
    bool log2 = false;
    std::string blocks_file;
    bool compare_dense = false;
    bool cdm_shuffle = false;
    double cdm_ratio = 0.0;
    std::string labels;
    std::string model;
    std::vector<std::string> components;
    std::string profile;
    bool strict = false;
    Index sim_n = 0, sim_p = 0, sim_b = 0, replicates = 0;
    double omega_lo = 0.0, omega_hi = 0.0;
    std::vector<std::string> approaches;
};

void add_common_options(CLI::App* cmd, FlagValues& fv) {
    cmd->add_option("--config", fv.config_path, "JSON config file mirroring the flags");
    cmd->add_option("--output-dir", fv.output_dir, "Directory for output artifacts");
    cmd->add_option("--seed", fv.seed, "RNG seed");
}

void add_data_options(CLI::App* cmd, FlagValues& fv) {
    cmd->add_option("--input", fv.input, "Input CSV (observations as rows)");
    cmd->add_flag("--no-center", fv.no_center, "Skip column mean-centering");
    cmd->add_flag("--no-header", fv.no_header, "Input CSV has no header row");
    cmd->add_flag("--transpose", fv.transpose, "Input is variables-as-rows; transpose it");
    cmd->add_flag("--log2", fv.log2, "Apply log2 before centering");
}

void add_detector_options(CLI::App* cmd, FlagValues& fv) {
    cmd->add_option("--detector", fv.detector, "oracle|threshold|sparse-split")
        ->check(CLI::IsMember({"oracle", "threshold", "sparse-split"}));
    cmd->add_option("--threshold", fv.threshold, "Correlation threshold in (0,1)");
    cmd->add_option("--hbic-scale", fv.hbic_scale, "HBIC penalty scale (sparse-split)");
    cmd->add_option("--blocks-file", fv.blocks_file, "JSON file with an oracle partition");
}

void add_fit_options(CLI::App* cmd, FlagValues& fv) {
    cmd->add_option("--svd", fv.svd, "exact|cdm")->check(CLI::IsMember({"exact", "cdm"}));
    cmd->add_option("--k", fv.k, "Number of components (global top-k)");
    cmd->add_option("--cdm-threshold-ratio", fv.cdm_ratio,
                    "Blocks use CDM only when p_i > ratio * n (0 forces CDM)");
    cmd->add_flag("--cdm-shuffle", fv.cdm_shuffle, "Seeded row shuffle before the CDM split");
}

template <typename T>
void from_config(const json& cfg, const char* key, T& target) {
    if (cfg.contains(key)) target = cfg.at(key).get<T>();
}

void apply_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ispca::UsageError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    json cfg = json::parse(buf.str(), nullptr, false);
    if (cfg.is_discarded()) {
        throw ispca::UsageError("config file is not valid JSON: " + path);
    }

    if (cfg.contains("profile")) {
        std::string profile = cfg.at("profile").get<std::string>();
        rc.sim = profile == "paper" ? ispca::SimConfig::paper(rc.sim.seed)
                                    : ispca::SimConfig::desk(rc.sim.seed);
    }

    std::string text;
    text.clear();
    if (cfg.contains("input")) rc.input_path = cfg.at("input").get<std::string>();
    if (cfg.contains("output_dir")) rc.output_dir = cfg.at("output_dir").get<std::string>();
    if (cfg.contains("detector")) {
        rc.detector.strategy =
            ispca::detector_strategy_from_string(cfg.at("detector").get<std::string>());
    }
    if (cfg.contains("threshold")) rc.detector.threshold = cfg.at("threshold").get<double>();
    from_config(cfg, "hbic_scale", rc.detector.hbic_scale);
    if (cfg.contains("svd")) {
        rc.svd_method = ispca::svd_method_from_string(cfg.at("svd").get<std::string>());
    }
    from_config(cfg, "k", rc.k);
    from_config(cfg, "min_share", rc.min_share);
    from_config(cfg, "seed", rc.seed);
    from_config(cfg, "no_center", rc.no_center);
    from_config(cfg, "transpose", rc.transpose);
    from_config(cfg, "log2", rc.log2_transform);
    from_config(cfg, "compare_dense", rc.compare_dense);
    from_config(cfg, "cdm_shuffle", rc.cdm_shuffle);
    from_config(cfg, "cdm_threshold_ratio", rc.cdm_threshold_ratio);
    from_config(cfg, "strict", rc.strict);
    if (cfg.contains("blocks_file")) rc.blocks_file = cfg.at("blocks_file").get<std::string>();
    if (cfg.contains("labels")) rc.labels_path = cfg.at("labels").get<std::string>();
    if (cfg.contains("model")) rc.model_path = cfg.at("model").get<std::string>();
    if (cfg.contains("components")) {
        rc.component_pairs.clear();
        for (const auto& c : cfg.at("components")) {
            rc.component_pairs.push_back(
                ispca::cli::parse_component_pair(c.get<std::string>()));
        }
    }
    if (cfg.contains("sim")) {
        const json& sim = cfg.at("sim");
        from_config(sim, "n", rc.sim.n);
        from_config(sim, "p", rc.sim.p);
        from_config(sim, "b", rc.sim.b);
        from_config(sim, "replicates", rc.sim.replicates);
        from_config(sim, "omega_lo", rc.sim.omega_lo);
        from_config(sim, "omega_hi", rc.sim.omega_hi);
        if (sim.contains("approaches")) {
            rc.sim.approaches.clear();
            for (const auto& a : sim.at("approaches")) {
                rc.sim.approaches.push_back(
                    ispca::sim_approach_from_string(a.get<std::string>()));
            }
        }
    }
}

// Precedence: defaults < profile < config file < explicit flags.
RunConfig build_config(const CLI::App* cmd, const FlagValues& fv, ispca::cli::Command command) {
    RunConfig rc;
    rc.command = command;
    rc.threads = threads_from_env();

    auto given = [&](const char* name) {
        const CLI::Option* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };

    if (given("--profile")) {
        rc.sim = fv.profile == "paper" ? ispca::SimConfig::paper() : ispca::SimConfig::desk();
    }
    if (given("--config")) apply_config_file(rc, fv.config_path);

    if (given("--input")) rc.input_path = fv.input;
    if (given("--output-dir")) rc.output_dir = fv.output_dir;
    if (given("--detector")) {
        rc.detector.strategy = ispca::detector_strategy_from_string(fv.detector);
    }
    if (given("--threshold")) rc.detector.threshold = fv.threshold;
    if (given("--hbic-scale")) rc.detector.hbic_scale = fv.hbic_scale;
    if (given("--svd")) rc.svd_method = ispca::svd_method_from_string(fv.svd);
    if (given("--k")) rc.k = fv.k;
    if (given("--min-share")) rc.min_share = fv.min_share;
    if (given("--seed")) {
        rc.seed = fv.seed;
        rc.sim.seed = fv.seed;
    }
    if (fv.no_center) rc.no_center = true;
    if (fv.no_header) rc.has_header = false;
    if (fv.transpose) rc.transpose = true;
    if (fv.log2) rc.log2_transform = true;
    if (given("--blocks-file")) rc.blocks_file = fv.blocks_file;
    if (fv.compare_dense) rc.compare_dense = true;
    if (fv.cdm_shuffle) rc.cdm_shuffle = true;
    if (given("--cdm-threshold-ratio")) rc.cdm_threshold_ratio = fv.cdm_ratio;
    if (given("--labels")) rc.labels_path = fv.labels;
    if (given("--model")) rc.model_path = fv.model;
    if (given("--components")) {
        rc.component_pairs.clear();
        for (const auto& c : fv.components) {
            rc.component_pairs.push_back(ispca::cli::parse_component_pair(c));
        }
    }
    if (fv.strict) rc.strict = true;
    if (given("--sim-n")) rc.sim.n = fv.sim_n;
    if (given("--sim-p")) rc.sim.p = fv.sim_p;
    if (given("--sim-b")) rc.sim.b = fv.sim_b;
    if (given("--replicates")) rc.sim.replicates = fv.replicates;
    if (given("--omega-lo")) rc.sim.omega_lo = fv.omega_lo;
    if (given("--omega-hi")) rc.sim.omega_hi = fv.omega_hi;
    if (given("--approaches")) {
        rc.sim.approaches.clear();
        for (const auto& a : fv.approaches) {
            rc.sim.approaches.push_back(ispca::sim_approach_from_string(a));
        }
    }
    if (!given("--seed") && given("--config")) rc.sim.seed = rc.seed;

    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inherently sparse PCA: block detection, principal loading analysis, "
                 "per-block sparse components, and the estimator comparison harness"};
    app.require_subcommand(1);

    FlagValues fv;

    CLI::App* detect = app.add_subcommand("detect", "Detect uncorrelated column blocks");
    add_common_options(detect, fv);
    add_data_options(detect, fv);
    add_detector_options(detect, fv);

    CLI::App* pla = app.add_subcommand("pla", "Rank blocks by explained variance share");
    add_common_options(pla, fv);
    add_data_options(pla, fv);
    add_detector_options(pla, fv);
    pla->add_option("--min-share", fv.min_share, "Selection threshold on the variance share");

    CLI::App* ispca_cmd = app.add_subcommand("ispca", "Fit inherently sparse PCA");
    add_common_options(ispca_cmd, fv);
    add_data_options(ispca_cmd, fv);
    add_detector_options(ispca_cmd, fv);
    add_fit_options(ispca_cmd, fv);
    ispca_cmd->add_flag("--compare-dense", fv.compare_dense,
                        "Also write correlations against the dense loadings");

    CLI::App* biplot = app.add_subcommand("biplot-data", "Export score pairs for biplots");
    add_common_options(biplot, fv);
    add_data_options(biplot, fv);
    add_detector_options(biplot, fv);
    add_fit_options(biplot, fv);
    biplot->add_option("--model", fv.model, "Use a previously fitted model.json");
    biplot->add_option("--labels", fv.labels, "Observation labels, one per line");
    biplot->add_option("--components", fv.components,
                       "Component pair 'i,j' (repeatable; default 1,2)");

    CLI::App* simulate = app.add_subcommand("simulate", "Run the estimator comparison");
    add_common_options(simulate, fv);
    simulate->add_option("--profile", fv.profile, "desk|paper scale")
        ->check(CLI::IsMember({"desk", "paper"}));
    simulate->add_option("--sim-n", fv.sim_n, "Observations per replicate");
    simulate->add_option("--sim-p", fv.sim_p, "Variables per replicate");
    simulate->add_option("--sim-b", fv.sim_b, "Number of equal-size blocks");
    simulate->add_option("--replicates", fv.replicates, "Number of replicates");
    simulate->add_option("--omega-lo", fv.omega_lo, "Lower bound of the omega draw");
    simulate->add_option("--omega-hi", fv.omega_hi, "Upper bound of the omega draw");
    simulate->add_option("--approaches", fv.approaches,
                         "Subset of CDM,OracleIsPca,FalseNegIsPca,PmdIsPca,Pmd")
        ->delimiter(',');
    simulate->add_flag("--strict", fv.strict, "Nonzero exit if any replicate failed");

    std::string command_name = "ispca";
    try {
        app.parse(argc, argv);
        CLI::App* active = app.get_subcommands().front();
        command_name = active->get_name();

        ispca::cli::Command command;
        if (active == detect) command = ispca::cli::Command::Detect;
        else if (active == pla) command = ispca::cli::Command::Pla;
        else if (active == ispca_cmd) command = ispca::cli::Command::Ispca;
        else if (active == biplot) command = ispca::cli::Command::BiplotData;
        else command = ispca::cli::Command::Simulate;

        RunConfig rc = build_config(active, fv, command);
        ispca::cli::run(rc);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << ispca::cli::error_json(command_name, ispca::ErrorKind::Usage, e.what())
                  << "\n";
        return 2;
    } catch (const ispca::Error& e) {
        std::cerr << ispca::cli::error_json(command_name, e.kind(), e.what()) << "\n";
        return ispca::cli::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << ispca::cli::error_json(command_name, ispca::ErrorKind::Numerical, e.what())
                  << "\n";
        return 4;
    }
}
