#include "ispca/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ispca {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_json(const std::string& text, const std::string& what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw DataError("invalid JSON in " + what);
    }
    return doc;
}

std::vector<ColumnIndexSet> blocks_from_json(const json& doc, Index p, const std::string& what) {
    if (!doc.contains("blocks") || !doc["blocks"].is_array() || doc["blocks"].empty()) {
        throw DataError(what + ": missing nonempty 'blocks' array");
    }
    std::vector<ColumnIndexSet> blocks;
    for (const auto& arr : doc["blocks"]) {
        std::vector<Index> cols;
        for (const auto& v : arr) {
            if (!v.is_number_integer()) {
                throw DataError(what + ": block indices must be integers");
            }
            Index one_based = v.get<Index>();
            if (one_based < 1 || one_based > p) {
                throw DataError(what + ": column index " + std::to_string(one_based) +
                                " outside [1, " + std::to_string(p) + "]");
            }
            cols.push_back(one_based - 1);
        }
        std::sort(cols.begin(), cols.end());
        blocks.emplace_back(std::move(cols));
    }
    return blocks;
}

}  // namespace

DataMatrix read_matrix_csv(const std::filesystem::path& path, const CsvReadOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }

    std::vector<std::vector<double>> rows;
    std::optional<std::vector<std::string>> header;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && rows.empty() && !header) continue;

        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, options.delimiter)) cells.push_back(cell);
        if (!line.empty() && line.back() == options.delimiter) cells.push_back("");

        if (options.has_header && !header) {
            header = cells;
            width = cells.size();
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            throw DataError("ragged CSV: row " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(width));
        }

        std::vector<double> parsed;
        parsed.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& s = cells[c];
            std::size_t consumed = 0;
            double value = 0.0;
            bool ok = !s.empty();
            if (ok) {
                try {
                    value = std::stod(s, &consumed);
                    ok = consumed == s.size() && std::isfinite(value);
                } catch (const std::exception&) {
                    ok = false;
                }
            }
            if (!ok) {
                throw DataError("non-numeric cell '" + s + "' at row " + std::to_string(line_no) +
                                ", column " + std::to_string(c + 1));
            }
            parsed.push_back(value);
        }
        rows.push_back(std::move(parsed));
    }

    if (rows.empty()) {
        throw DataError("empty CSV file: " + path.string());
    }

    Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    if (options.transpose) {
        values = values.transpose().eval();
        header.reset();  // a header names the pre-transpose columns
    }
    if (options.log2_transform) {
        for (Index i = 0; i < values.rows(); ++i) {
            for (Index j = 0; j < values.cols(); ++j) {
                if (values(i, j) <= 0.0) {
                    throw DataError("log2 transform requires positive entries; found " +
                                    format_double(values(i, j)) + " at row " +
                                    std::to_string(i + 1) + ", column " + std::to_string(j + 1));
                }
                values(i, j) = std::log2(values(i, j));
            }
        }
    }

    DataMatrix X(std::move(values), std::move(header));
    return options.center ? center_columns(X) : X;
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open labels file: " + path.string());
    }
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        labels.push_back(line);
    }
    while (!labels.empty() && labels.back().empty()) labels.pop_back();
    if (labels.empty()) {
        throw DataError("labels file is empty: " + path.string());
    }
    return labels;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write file: " + tmp.string());
        }
        out << content;
        if (!out.good()) {
            throw DataError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string partition_to_json(const BlockPartition& part) {
    json doc;
    doc["p"] = part.p();
    doc["b"] = part.block_count();
    json blocks = json::array();
    for (const auto& block : part.blocks()) {
        json arr = json::array();
        for (Index j : block.indices()) arr.push_back(j + 1);
        blocks.push_back(std::move(arr));
    }
    doc["blocks"] = std::move(blocks);
    json perm = json::array();
    for (Index j : part.permutation()) perm.push_back(j + 1);
    doc["permutation"] = std::move(perm);
    return doc.dump(2) + "\n";
}

BlockPartition partition_from_json(const std::string& text) {
    json doc = parse_json(text, "partition");
    if (!doc.contains("p") || !doc["p"].is_number_integer()) {
        throw DataError("partition: missing integer 'p'");
    }
    Index p = doc["p"].get<Index>();
    return BlockPartition(p, blocks_from_json(doc, p, "partition"));
}

BlockPartition read_blocks_file(const std::filesystem::path& path, Index p) {
    json doc = parse_json(read_file(path), "blocks file");
    if (doc.contains("p") && doc["p"].is_number_integer() && doc["p"].get<Index>() != p) {
        throw DataError("blocks file declares p = " + std::to_string(doc["p"].get<Index>()) +
                        " but the data matrix has " + std::to_string(p) + " columns");
    }
    return BlockPartition(p, blocks_from_json(doc, p, "blocks file"));
}

std::string model_to_json(const IsPcaModel& model) {
    json doc;
    doc["format_version"] = 1;
    doc["svd_method"] = to_string(model.svd_method());
    doc["p"] = model.p();
    doc["k"] = model.k();

    json means = json::array();
    for (Index j = 0; j < model.p(); ++j) means.push_back(model.column_means()(j));
    doc["column_means"] = std::move(means);

    json blocks = json::array();
    for (const auto& block : model.partition().blocks()) {
        json arr = json::array();
        for (Index j : block.indices()) arr.push_back(j + 1);
        blocks.push_back(std::move(arr));
    }
    doc["partition"] = {{"blocks", std::move(blocks)}};

    json eigenvalues = json::array();
    json component_block = json::array();
    for (Index j = 0; j < model.k(); ++j) {
        eigenvalues.push_back(model.eigenvalues()(j));
        component_block.push_back(model.component_block()[static_cast<std::size_t>(j)] + 1);
    }
    doc["eigenvalues"] = std::move(eigenvalues);
    doc["component_block"] = std::move(component_block);

    json triplets = json::array();
    for (Index c = 0; c < model.k(); ++c) {
        for (Index r = 0; r < model.p(); ++r) {
            double v = model.loadings()(r, c);
            if (v != 0.0) triplets.push_back(json::array({r + 1, c + 1, v}));
        }
    }
    doc["loadings"] = {{"triplets", std::move(triplets)}};
    return doc.dump(2) + "\n";
}

IsPcaModel model_from_json(const std::string& text) {
    json doc = parse_json(text, "model");
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1) {
        throw DataError("model: unsupported or missing format_version");
    }
    Index p = doc.at("p").get<Index>();
    Index k = doc.at("k").get<Index>();
    SvdMethod method = svd_method_from_string(doc.at("svd_method").get<std::string>());

    Vector means(p);
    const auto& means_arr = doc.at("column_means");
    if (static_cast<Index>(means_arr.size()) != p) {
        throw DataError("model: column_means length mismatch");
    }
    for (Index j = 0; j < p; ++j) means(j) = means_arr[static_cast<std::size_t>(j)].get<double>();

    BlockPartition part(p, blocks_from_json(doc.at("partition"), p, "model partition"));

    const auto& eig_arr = doc.at("eigenvalues");
    const auto& cb_arr = doc.at("component_block");
    if (static_cast<Index>(eig_arr.size()) != k || static_cast<Index>(cb_arr.size()) != k) {
        throw DataError("model: eigenvalue/component_block length mismatch");
    }
    Vector eigenvalues(k);
    std::vector<Index> component_block(static_cast<std::size_t>(k));
    for (Index j = 0; j < k; ++j) {
        eigenvalues(j) = eig_arr[static_cast<std::size_t>(j)].get<double>();
        component_block[static_cast<std::size_t>(j)] =
            cb_arr[static_cast<std::size_t>(j)].get<Index>() - 1;
    }

    Matrix loadings = Matrix::Zero(p, k);
    for (const auto& t : doc.at("loadings").at("triplets")) {
        Index r = t.at(0).get<Index>() - 1;
        Index c = t.at(1).get<Index>() - 1;
        if (r < 0 || r >= p || c < 0 || c >= k) {
            throw DataError("model: loading triplet index out of range");
        }
        loadings(r, c) = t.at(2).get<double>();
    }

    return IsPcaModel(std::move(loadings), std::move(eigenvalues), std::move(component_block),
                      std::move(part), method, std::move(means));
}

std::string variance_json(const IsPcaModel& model, double total_variance) {
    json doc;
    doc["total_variance"] = total_variance;
    json comps = json::array();
    for (Index j = 0; j < model.k(); ++j) {
        json entry;
        entry["component"] = j + 1;
        entry["block"] = model.component_block()[static_cast<std::size_t>(j)] + 1;
        entry["eigenvalue"] = model.eigenvalues()(j);
        entry["share"] = model.eigenvalues()(j) / total_variance;
        comps.push_back(std::move(entry));
    }
    doc["components"] = std::move(comps);
    return doc.dump(2) + "\n";
}

std::string pla_report_to_json(const VarianceReport& report, double min_share) {
    json doc;
    doc["method"] = to_string(report.method);
    doc["total_variance"] = report.total_variance;
    doc["min_share"] = min_share;
    json blocks = json::array();
    for (const auto& entry : report.per_block) {
        json e;
        e["block"] = entry.block_id + 1;
        e["size"] = entry.block_size;
        e["variance"] = entry.variance;
        e["share"] = entry.share;
        e["expected_share"] = entry.expected_share;
        e["selected"] = entry.share >= min_share;
        blocks.push_back(std::move(e));
    }
    doc["blocks"] = std::move(blocks);
    return doc.dump(2) + "\n";
}

std::string pla_report_to_csv(const VarianceReport& report) {
    std::string out = "block,size,variance,share,expected_share\n";
    for (const auto& entry : report.per_block) {
        out += std::to_string(entry.block_id + 1) + "," + std::to_string(entry.block_size) + "," +
               format_double(entry.variance) + "," + format_double(entry.share) + "," +
               format_double(entry.expected_share) + "\n";
    }
    return out;
}

std::string scores_to_csv(const Matrix& Z) {
    std::string out;
    for (Index j = 0; j < Z.cols(); ++j) {
        out += (j == 0 ? "pc" : ",pc") + std::to_string(j + 1);
    }
    out += "\n";
    for (Index i = 0; i < Z.rows(); ++i) {
        for (Index j = 0; j < Z.cols(); ++j) {
            if (j > 0) out += ",";
            out += format_double(Z(i, j));
        }
        out += "\n";
    }
    return out;
}

std::string loadings_to_csv(const IsPcaModel& model) {
    std::string out = "row,component,value\n";
    for (Index c = 0; c < model.k(); ++c) {
        for (Index r = 0; r < model.p(); ++r) {
            double v = model.loadings()(r, c);
            if (v != 0.0) {
                out += std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
                       format_double(v) + "\n";
            }
        }
    }
    return out;
}

std::string correlations_to_csv(const Matrix& corr) {
    std::string out = "component";
    for (Index j = 0; j < corr.cols(); ++j) out += ",dense_" + std::to_string(j + 1);
    out += "\n";
    for (Index i = 0; i < corr.rows(); ++i) {
        out += std::to_string(i + 1);
        for (Index j = 0; j < corr.cols(); ++j) out += "," + format_double(corr(i, j));
        out += "\n";
    }
    return out;
}

std::string biplot_csv(const Matrix& Z, Index comp_i, Index comp_j,
                       const std::vector<std::string>& labels) {
    if (comp_i < 0 || comp_i >= Z.cols() || comp_j < 0 || comp_j >= Z.cols()) {
        throw UsageError("biplot: requested component exceeds k = " + std::to_string(Z.cols()));
    }
    if (!labels.empty() && static_cast<Index>(labels.size()) != Z.rows()) {
        throw DataError("biplot: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(Z.rows()) + " observations");
    }
    std::string out = "observation,pc" + std::to_string(comp_i + 1) + ",pc" +
                      std::to_string(comp_j + 1);
    if (!labels.empty()) out += ",label";
    out += "\n";
    for (Index i = 0; i < Z.rows(); ++i) {
        out += std::to_string(i + 1) + "," + format_double(Z(i, comp_i)) + "," +
               format_double(Z(i, comp_j));
        if (!labels.empty()) out += "," + labels[static_cast<std::size_t>(i)];
        out += "\n";
    }
    return out;
}

std::string sim_results_to_csv(const SimResult& result) {
    std::string out = "replicate,approach,block,cosine,eigenvalue_ratio\n";
    for (const SimCell& cell : result.cells) {
        out += std::to_string(cell.replicate + 1) + "," + to_string(cell.approach) + "," +
               std::to_string(cell.block + 1) + "," + format_double(cell.cosine) + "," +
               format_double(cell.ratio) + "\n";
    }
    return out;
}

namespace {

json summary_to_json(const MetricSummary& m) {
    return json{{"mean", m.mean}, {"sd", m.sd}, {"q25", m.q25},
                {"median", m.median}, {"q75", m.q75}};
}

}  // namespace

std::string sim_summary_to_json(const SimResult& result) {
    const SimConfig& cfg = result.config;
    json doc;
    doc["config"] = {
        {"n", cfg.n},
        {"p", cfg.p},
        {"b", cfg.b},
        {"omega_lo", cfg.omega_lo},
        {"omega_hi", cfg.omega_hi},
        {"replicates", cfg.replicates},
        {"seed", cfg.seed},
        {"profile", cfg.profile == ScaleProfile::Desk ? "desk" : "paper"},
    };
    json approaches = json::object();
    for (const auto& s : result.summaries) {
        approaches[to_string(s.approach)] = {
            {"cells", s.cells},
            {"cosine", summary_to_json(s.cosine)},
            {"eigenvalue_ratio", summary_to_json(s.ratio)},
        };
    }
    doc["approaches"] = std::move(approaches);
    json failures = json::array();
    for (const auto& f : result.failures) {
        failures.push_back({{"replicate", f.replicate + 1},
                            {"approach", to_string(f.approach)},
                            {"message", f.message}});
    }
    doc["failures"] = std::move(failures);
    return doc.dump(2) + "\n";
}

}  // namespace ispca
