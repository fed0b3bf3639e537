// fabisearch command-line tool.

#include "fabisearch/detection.hpp"
#include "fabisearch/errors.hpp"
#include "fabisearch/export.hpp"
#include "fabisearch/io.hpp"
#include "fabisearch/network.hpp"
#include "fabisearch/nmf.hpp"
#include "fabisearch/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fabisearch;

namespace {

enum class OutputFormat { json, table, csv };

struct Common {
    std::string format = "json";
    std::string output;  // empty: stdout
    std::uint64_t seed = 0;
    int threads = 0;
};

struct InputOptions {
    std::string path;
    std::string header = "auto";  // auto, yes, no
    bool row_names = false;
};

OutputFormat parse_format(const std::string& s) {
    if (s == "json") return OutputFormat::json;
    if (s == "table") return OutputFormat::table;
    if (s == "csv") return OutputFormat::csv;
    throw ParameterError("--format must be json, table or csv (got '" + s + "')");
}

TimeSeriesMatrix load_input(const InputOptions& in) {
    const TableFormat fmt = format_from_path(in.path);
    bool header = in.header == "yes";
    if (in.header == "auto") header = has_header_row(in.path, fmt);
    else if (in.header != "no") throw ParameterError("--header must be auto, yes or no");
    return load_matrix(in.path, fmt, header, in.row_names);
}

void add_input(CLI::App* app, InputOptions& in) {
    app->add_option("input", in.path, "Input matrix (CSV or TSV; rows are time points)")->required()->check(CLI::ExistingFile);
    app->add_option("--header", in.header, "Whether the first line holds column labels: auto, yes, no")
        ->capture_default_str();
    app->add_flag("--row-names", in.row_names, "First column holds row labels");
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--format", c.format, "Result format: json, table, csv")->capture_default_str();
    app->add_option("-o,--output", c.output, "Write the result here instead of stdout");
    app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app->add_option("--threads", c.threads, "Worker thread hint (0: FABISEARCH_THREADS or all cores)")
        ->capture_default_str();
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.output, std::ios::trunc);
    if (!out) throw ParseError("cannot open '" + c.output + "' for writing");
    out << text;
}

// Renders rows of cells either as an aligned table or as CSV.
std::string render_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                        OutputFormat fmt) {
    std::ostringstream out;
    if (fmt == OutputFormat::csv) {
        for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << '\n';
        }
        return out.str();
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            out << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << cells[c];
        out << '\n';
    };
    line(header);
    for (const auto& row : rows) line(row);
    return out.str();
}

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

std::vector<long> parse_index_list(const std::string& text, const char* what) {
    // "35,70" or ranges "1-30,45".
    std::vector<long> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        try {
            const auto dash = token.find('-', 1);
            if (dash == std::string::npos) {
                out.push_back(std::stol(token));
            } else {
                const long a = std::stol(token.substr(0, dash));
                const long b = std::stol(token.substr(dash + 1));
                if (b < a) throw ParameterError(std::string(what) + ": empty range '" + token + "'");
                for (long v = a; v <= b; ++v) out.push_back(v);
            }
        } catch (const std::logic_error&) {
            throw ParameterError(std::string(what) + ": cannot parse '" + token + "'");
        }
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ','))
        if (!token.empty()) out.push_back(token);
    return out;
}

json rank_json(const OptRankResult& r) {
    json losses = json::array();
    for (std::size_t k = 0; k < r.loss.size(); ++k) {
        json row = {{"rank", k + 1}, {"loss", r.loss[k]}, {"loss_permuted", r.loss_permuted[k]}};
        if (k > 0) {
            row["decrement"] = r.loss[k - 1] - r.loss[k];
            row["decrement_permuted"] = r.loss_permuted[k - 1] - r.loss_permuted[k];
        }
        losses.push_back(row);
    }
    return {{"rank", r.rank}, {"reached_max", r.reached_max}, {"max_rank", r.max_rank}, {"losses", losses}};
}

// ---- opt-rank ---------------------------------------------------------------

struct OptRankArgs {
    InputOptions in;
    Common common;
    int nruns = 50;
    int max_iterations = 2000;
    double tolerance = 1e-6;
};

void run_opt_rank(const OptRankArgs& a) {
    const auto Y = load_input(a.in);
    NmfConfig cfg;
    cfg.nruns = a.nruns;
    cfg.max_iterations = a.max_iterations;
    cfg.tolerance = a.tolerance;
    cfg.master_seed = a.common.seed;
    cfg.threads = a.common.threads;
    const OptRankResult r = opt_rank(Y, cfg);
    if (r.reached_max)
        std::cerr << "warning: rank search reached the maximum rank " << r.max_rank << " without stopping\n";

    const OutputFormat fmt = parse_format(a.common.format);
    if (fmt == OutputFormat::json) {
        emit(a.common, rank_json(r).dump(2) + "\n");
        return;
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 1; k < r.loss.size(); ++k)
        rows.push_back({std::to_string(k + 1), num(r.loss[k - 1] - r.loss[k]),
                        num(r.loss_permuted[k - 1] - r.loss_permuted[k])});
    std::string text = render_rows({"rank", "decrement", "decrement_permuted"}, rows, fmt);
    if (fmt == OutputFormat::table) text = "optimal rank: " + std::to_string(r.rank) + "\n" + text;
    emit(a.common, text);
}

// ---- detect-cps -------------------------------------------------------------

struct DetectArgs {
    InputOptions in;
    Common common;
    int mindist = 35;
    int nruns = 50;
    int nreps = 100;
    std::optional<double> alpha;
    std::optional<int> rank;
    std::string testtype = "welch_t";
    int max_iterations = 2000;
    double tolerance = 1e-6;
    std::string report;
    bool quiet = false;
};

json report_json(const ChangePointReport& r, const DetectionConfig& cfg) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"time", row.time},
                        {"p_value", row.p_value},
                        {"significant", row.significant ? json(*row.significant) : json(nullptr)},
                        {"loss_decrease", row.loss_decrease}});
    return {{"rank", r.rank_used},
            {"testtype", std::string(to_string(r.testtype))},
            {"alpha", r.alpha ? json(*r.alpha) : json(nullptr)},
            {"compute_time_seconds", r.compute_time.count()},
            {"change_points", rows},
            {"rank_selection", r.rank_selection ? rank_json(*r.rank_selection) : json(nullptr)},
            {"config",
             {{"mindist", cfg.mindist},
              {"nruns", cfg.nruns},
              {"nreps", cfg.nreps},
              {"seed", cfg.master_seed},
              {"max_iterations", cfg.max_iterations},
              {"tolerance", cfg.tolerance}}}};
}

void run_detect(const DetectArgs& a) {
    const auto Y = load_input(a.in);
    DetectionConfig cfg;
    cfg.mindist = a.mindist;
    cfg.nruns = a.nruns;
    cfg.nreps = a.nreps;
    cfg.alpha = a.alpha;
    cfg.rank = a.rank;
    cfg.testtype = parse_test_type(a.testtype);
    cfg.master_seed = a.common.seed;
    cfg.max_iterations = a.max_iterations;
    cfg.tolerance = a.tolerance;
    cfg.threads = a.common.threads;
    if (!a.quiet) cfg.progress = [](const std::string& line) { std::cerr << line << '\n'; };

    const ChangePointReport r = detect_cps(Y, cfg);
    const json doc = report_json(r, cfg);
    if (!a.report.empty()) {
        std::ofstream out(a.report, std::ios::trunc);
        if (!out) throw ParseError("cannot open '" + a.report + "' for writing");
        out << doc.dump(2) << '\n';
    }

    const OutputFormat fmt = parse_format(a.common.format);
    if (fmt == OutputFormat::json) {
        emit(a.common, doc.dump(2) + "\n");
        return;
    }
    // With alpha the table carries a significance column, otherwise p-values.
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : r.rows) {
        if (r.alpha) rows.push_back({std::to_string(row.time), *row.significant ? "TRUE" : "FALSE"});
        else rows.push_back({std::to_string(row.time), num(row.p_value)});
    }
    std::string text = render_rows({"T", r.alpha ? "significant" : "pval"}, rows, fmt);
    if (fmt == OutputFormat::table)
        text = "rank: " + std::to_string(r.rank_used) + "  compute time: " + num(r.compute_time.count()) + " s\n" + text;
    emit(a.common, text);
}

// ---- est-net ----------------------------------------------------------------

struct EstNetArgs {
    InputOptions in;
    Common common;
    std::string lambda;
    std::optional<int> rank;
    int nruns = 50;
    std::string changepoints;
    int max_iterations = 2000;
    double tolerance = 1e-6;
    std::string outdir = "networks";
    std::string write = "csv";  // csv, json, both
    std::string atlas;
    bool consensus = false;
};

std::string lambda_tag(const AdjacencyMatrix& A) {
    if (A.mode == AdjacencyMode::clusters) return "k" + std::to_string(static_cast<int>(A.parameter));
    return "lambda" + format_double(A.parameter);
}

void run_est_net(const EstNetArgs& a) {
    const auto Y = load_input(a.in);
    if (a.write != "csv" && a.write != "json" && a.write != "both")
        throw ParameterError("--write must be csv, json or both");
    EstNetOptions opt;
    opt.lambda = parse_lambda_spec(a.lambda);
    opt.rank = a.rank;
    opt.nruns = a.nruns;
    opt.changepoints = parse_index_list(a.changepoints, "--changepoints");
    opt.master_seed = a.common.seed;
    opt.max_iterations = a.max_iterations;
    opt.tolerance = a.tolerance;
    opt.threads = a.common.threads;

    std::optional<AtlasTable> atlas;
    if (!a.atlas.empty()) {
        atlas = load_atlas(a.atlas);
        if (static_cast<Eigen::Index>(atlas->size()) != Y.variables())
            throw AtlasMismatchError("atlas '" + a.atlas + "' has " + std::to_string(atlas->size()) +
                                     " nodes but the input has " + std::to_string(Y.variables()) + " variables");
    }

    const NetworkEstimate est = est_net(Y, opt);
    fs::create_directories(a.outdir);
    json files = json::array();
    std::vector<std::vector<std::string>> rows;
    for (std::size_t s = 0; s < est.segments.size(); ++s) {
        const auto& seg = est.segments[s];
        const std::string stem = "segment" + std::to_string(s + 1);
        if (a.consensus) {
            const std::string path = (fs::path(a.outdir) / (stem + "_consensus.csv")).string();
            save_matrix(path, seg.consensus.values);
            files.push_back({{"segment", s + 1}, {"kind", "consensus"}, {"path", path}});
        }
        for (const auto& A : seg.adjacency) {
            const std::string base = (fs::path(a.outdir) / (stem + "_" + lambda_tag(A))).string();
            json entry = {{"segment", s + 1},
                          {"time_range", {seg.range.first, seg.range.last}},
                          {"mode", A.mode == AdjacencyMode::threshold ? "threshold" : "clusters"},
                          {"parameter", A.parameter},
                          {"edges", A.edge_count()}};
            if (a.write != "json") {
                save_adjacency_csv(base + ".csv", A.values);
                entry["csv"] = base + ".csv";
            }
            if (a.write != "csv") {
                ExportMetadata meta;
                meta.segment = static_cast<long>(s + 1);
                meta.time_range = seg.range;
                meta.mode = A.mode;
                if (A.mode == AdjacencyMode::threshold) meta.lambda = A.parameter;
                else meta.k = static_cast<int>(A.parameter);
                meta.source = fs::path(a.in.path).filename().string();
                AtlasTable nodes;
                if (atlas) {
                    nodes = *atlas;
                } else {
                    // No atlas: every node at the origin, no community.
                    nodes.resize(static_cast<std::size_t>(A.values.rows()));
                }
                save_network_export(base + ".json", build_network_export(A.values, nodes, {}, {}, meta));
                entry["json"] = base + ".json";
            }
            files.push_back(entry);
            rows.push_back({std::to_string(s + 1), std::to_string(seg.range.first) + ":" + std::to_string(seg.range.last),
                            lambda_tag(A), std::to_string(A.edge_count())});
        }
    }
    const json manifest = {{"input", a.in.path}, {"rank", est.rank_used}, {"nruns", a.nruns}, {"seed", a.common.seed},
                           {"files", files}};
    const std::string manifest_path = (fs::path(a.outdir) / "manifest.json").string();
    std::ofstream(manifest_path, std::ios::trunc) << manifest.dump(2) << '\n';

    const OutputFormat fmt = parse_format(a.common.format);
    if (fmt == OutputFormat::json) emit(a.common, manifest.dump(2) + "\n");
    else emit(a.common, render_rows({"segment", "range", "lambda", "edges"}, rows, fmt));
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    Common common;
    long variables = 40;
    long time_points = 300;
    std::string changepoints;
    int clusters = 2;
    double within = 0.75;
    double between = 0.20;
    bool no_reshuffle = false;
    double target_mean = 100.0;
    double min_sd = 2.0;
    std::optional<double> factor;
    std::string matrix = "simulated.csv";
    std::string truth;
};

void run_simulate(const SimulateArgs& a) {
    SimulationSpec spec;
    spec.variables = a.variables;
    spec.time_points = a.time_points;
    spec.changepoints = parse_index_list(a.changepoints, "--changepoints");
    spec.clusters = a.clusters;
    spec.within_corr = a.within;
    spec.between_corr = a.between;
    spec.reshuffle = !a.no_reshuffle;
    spec.master_seed = a.common.seed;
    spec.rescale.target_mean = a.target_mean;
    spec.rescale.min_sd = a.min_sd;
    spec.rescale.factor = a.factor;
    const SimulatedData sim = simulate_dataset(spec);

    save_matrix(a.matrix, sim.data.values());
    const json truth = {{"matrix", a.matrix},
                        {"variables", spec.variables},
                        {"time_points", spec.time_points},
                        {"changepoints", sim.changepoints},
                        {"labels", sim.labels},
                        {"within_corr", spec.within_corr},
                        {"between_corr", spec.between_corr},
                        {"seed", spec.master_seed}};
    const std::string truth_path = a.truth.empty() ? fs::path(a.matrix).replace_extension(".truth.json").string() : a.truth;
    std::ofstream(truth_path, std::ios::trunc) << truth.dump(2) << '\n';

    const OutputFormat fmt = parse_format(a.common.format);
    if (fmt == OutputFormat::json) {
        emit(a.common, truth.dump(2) + "\n");
        return;
    }
    std::vector<std::vector<std::string>> rows;
    for (long c : sim.changepoints) rows.push_back({std::to_string(c)});
    emit(a.common, render_rows({"changepoint"}, rows, fmt));
}

// ---- export-viewer ----------------------------------------------------------

struct ExportArgs {
    std::string adjacency;
    std::string atlas;
    std::string communities;
    std::string nodes;
    std::string colors;
    std::string source;
    std::optional<long> segment;
    std::optional<double> lambda;
    std::string output = "network.json";
    std::string format = "json";
};

void run_export(const ExportArgs& a) {
    const BinaryMatrix A = load_adjacency_csv(a.adjacency);
    const AtlasTable atlas = load_atlas(a.atlas);
    ExportFilter filter;
    filter.communities = split_list(a.communities);
    filter.node_ids = parse_index_list(a.nodes, "--nodes");
    ExportMetadata meta;
    meta.segment = a.segment;
    if (a.lambda) {
        const LambdaValue v = parse_lambda_spec(format_double(*a.lambda)).front();
        meta.mode = v.mode;
        if (v.mode == AdjacencyMode::threshold) meta.lambda = v.value;
        else meta.k = static_cast<int>(v.value);
    }
    meta.source = a.source.empty() ? fs::path(a.adjacency).filename().string() : a.source;
    const NetworkExport e = build_network_export(A, atlas, filter, split_list(a.colors), meta);
    save_network_export(a.output, e);

    const OutputFormat fmt = parse_format(a.format);
    const json summary = {{"output", a.output}, {"nodes", e.nodes.size()}, {"edges", e.edges.size()}};
    if (fmt == OutputFormat::json) std::cout << summary.dump(2) << '\n';
    else std::cout << render_rows({"output", "nodes", "edges"},
                                  {{a.output, std::to_string(e.nodes.size()), std::to_string(e.edges.size())}}, fmt);
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
    if (dynamic_cast<const DataError*>(&e)) return "data_error";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension_error";
    if (dynamic_cast<const RankError*>(&e)) return "rank_error";
    if (dynamic_cast<const RangeError*>(&e)) return "range_error";
    if (dynamic_cast<const DegenerateSegmentError*>(&e)) return "degenerate_segment";
    if (dynamic_cast<const ParameterError*>(&e)) return "parameter_error";
    if (dynamic_cast<const RescaleError*>(&e)) return "rescale_error";
    if (dynamic_cast<const SpecError*>(&e)) return "spec_error";
    if (dynamic_cast<const AtlasMismatchError*>(&e)) return "atlas_mismatch";
    if (dynamic_cast<const SingularReconstructionError*>(&e)) return "singular_reconstruction";
    return "error";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change points and networks in multivariate nonnegative time series via NMF"};
    app.set_config("--config", "", "TOML-style file supplying option defaults ([subcommand] sections)");
    app.require_subcommand(1);

    OptRankArgs rank_args;
    auto* rank_cmd = app.add_subcommand("opt-rank", "Select the factorization rank");
    add_input(rank_cmd, rank_args.in);
    add_common(rank_cmd, rank_args.common);
    rank_cmd->add_option("--nruns", rank_args.nruns, "Restarts per rank")->capture_default_str();
    rank_cmd->add_option("--max-iter", rank_args.max_iterations)->capture_default_str();
    rank_cmd->add_option("--tol", rank_args.tolerance)->capture_default_str();

    DetectArgs det;
    auto* det_cmd = app.add_subcommand("detect-cps", "Detect and test change points");
    add_input(det_cmd, det.in);
    add_common(det_cmd, det.common);
    det_cmd->add_option("--mindist", det.mindist, "Minimum distance between change points")->capture_default_str();
    det_cmd->add_option("--nruns", det.nruns, "Restarts per fit during the search")->capture_default_str();
    det_cmd->add_option("--nreps", det.nreps, "Refit/permute repetitions per candidate")->capture_default_str();
    det_cmd->add_option("--alpha", det.alpha, "Significance level; omit to report adjusted p-values");
    det_cmd->add_option("--rank", det.rank, "Factorization rank; omit to select it");
    det_cmd->add_option("--testtype", det.testtype, "welch_t, wilcoxon or ks")->capture_default_str();
    det_cmd->add_option("--max-iter", det.max_iterations)->capture_default_str();
    det_cmd->add_option("--tol", det.tolerance)->capture_default_str();
    det_cmd->add_option("--report", det.report, "Also write the JSON report to this file");
    det_cmd->add_flag("-q,--quiet", det.quiet, "Suppress progress messages");

    EstNetArgs net;
    auto* net_cmd = app.add_subcommand("est-net", "Estimate one network per stationary segment");
    add_input(net_cmd, net.in);
    add_common(net_cmd, net.common);
    net_cmd->add_option("--lambda", net.lambda, "Cluster count, threshold, list a,b,c or range start:stop:step")
        ->required();
    net_cmd->add_option("--rank", net.rank, "Factorization rank; omit to select it");
    net_cmd->add_option("--nruns", net.nruns, "Restarts per consensus matrix")->capture_default_str();
    net_cmd->add_option("--changepoints", net.changepoints, "Comma-separated change points, e.g. 35,70");
    net_cmd->add_option("--max-iter", net.max_iterations)->capture_default_str();
    net_cmd->add_option("--tol", net.tolerance)->capture_default_str();
    net_cmd->add_option("--outdir", net.outdir, "Directory for adjacency files and manifest.json")
        ->capture_default_str();
    net_cmd->add_option("--write", net.write, "Adjacency files: csv, json or both")->capture_default_str();
    net_cmd->add_option("--atlas", net.atlas, "Atlas for JSON network exports")->check(CLI::ExistingFile);
    net_cmd->add_flag("--consensus", net.consensus, "Also write each segment's consensus matrix");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate block-correlated Gaussian data with change points");
    add_common(sim_cmd, sim.common);
    sim_cmd->add_option("--variables", sim.variables)->capture_default_str();
    sim_cmd->add_option("--time-points", sim.time_points)->capture_default_str();
    sim_cmd->add_option("--changepoints", sim.changepoints, "Comma-separated change points");
    sim_cmd->add_option("--clusters", sim.clusters)->capture_default_str();
    sim_cmd->add_option("--within", sim.within, "Correlation within a cluster")->capture_default_str();
    sim_cmd->add_option("--between", sim.between, "Correlation across clusters")->capture_default_str();
    sim_cmd->add_flag("--no-reshuffle", sim.no_reshuffle, "Keep node labels fixed across regimes");
    sim_cmd->add_option("--target-mean", sim.target_mean)->capture_default_str();
    sim_cmd->add_option("--min-sd", sim.min_sd)->capture_default_str();
    sim_cmd->add_option("--factor", sim.factor, "Explicit global scale factor");
    sim_cmd->add_option("--matrix", sim.matrix, "Output matrix CSV")->capture_default_str();
    sim_cmd->add_option("--truth", sim.truth, "Ground-truth JSON (default: <matrix>.truth.json)");

    ExportArgs ex;
    auto* ex_cmd = app.add_subcommand("export-viewer", "Join an adjacency matrix with an atlas for the viewer");
    ex_cmd->add_option("adjacency", ex.adjacency, "Adjacency CSV (0/1)")->required()->check(CLI::ExistingFile);
    ex_cmd->add_option("--atlas", ex.atlas, "Atlas CSV: community,x,y,z")->required()->check(CLI::ExistingFile);
    ex_cmd->add_option("--communities", ex.communities, "Keep only these communities, comma-separated");
    ex_cmd->add_option("--nodes", ex.nodes, "Keep only these node ids, e.g. 1-30");
    ex_cmd->add_option("--colors", ex.colors, "Comma-separated #rrggbb colors, one per community in order");
    ex_cmd->add_option("--source", ex.source, "Dataset name stored in the metadata");
    ex_cmd->add_option("--segment", ex.segment, "Segment index stored in the metadata");
    ex_cmd->add_option("--lambda", ex.lambda, "Threshold or cluster count stored in the metadata");
    ex_cmd->add_option("-o,--output", ex.output)->capture_default_str();
    ex_cmd->add_option("--format", ex.format, "Summary format: json, table, csv")->capture_default_str();

    for (auto* cmd : {rank_cmd, det_cmd, net_cmd, sim_cmd})
        if (auto* opt = cmd->get_option_no_throw("--threads")) opt->envname("FABISEARCH_THREADS");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*rank_cmd) run_opt_rank(rank_args);
        else if (*det_cmd) run_detect(det);
        else if (*net_cmd) run_est_net(net);
        else if (*sim_cmd) run_simulate(sim);
        else if (*ex_cmd) run_export(ex);
    } catch (const std::exception& e) {
        json err = {{"error", error_kind(e)}, {"message", e.what()}};
        if (const auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->row() >= 0) {
            err["row"] = pe->row();
            err["col"] = pe->col();
        }
        std::cerr << err.dump() << '\n';
        return 2;
    }
    return 0;
}
