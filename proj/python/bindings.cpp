#include "fabisearch/detection.hpp"
#include "fabisearch/errors.hpp"
#include "fabisearch/export.hpp"
#include "fabisearch/io.hpp"
#include "fabisearch/network.hpp"
#include "fabisearch/nmf.hpp"
#include "fabisearch/simulate.hpp"
#include "fabisearch/stats.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fabisearch;

namespace {

py::dict rank_dict(const OptRankResult& r) {
    py::dict d;
    d["rank"] = r.rank;
    d["reached_max"] = r.reached_max;
    d["max_rank"] = r.max_rank;
    d["loss"] = r.loss;
    d["loss_permuted"] = r.loss_permuted;
    return d;
}

NmfConfig make_nmf_config(int nruns, int max_iterations, double tolerance, std::uint64_t seed, int threads) {
    NmfConfig c;
    c.nruns = nruns;
    c.max_iterations = max_iterations;
    c.tolerance = tolerance;
    c.master_seed = seed;
    c.threads = threads;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Change point detection and network estimation for nonnegative multivariate time series";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<SingularReconstructionError>(m, "SingularReconstructionError", base.ptr());
    py::register_exception<RankError>(m, "RankError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<RangeError>(m, "RangeError", base.ptr());
    py::register_exception<DegenerateSegmentError>(m, "DegenerateSegmentError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<RescaleError>(m, "RescaleError", base.ptr());
    py::register_exception<SpecError>(m, "SpecError", base.ptr());
    py::register_exception<AtlasMismatchError>(m, "AtlasMismatchError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    m.def("kld_loss", py::overload_cast<const MatrixRef&, const MatrixRef&, const MatrixRef&>(&kld_loss),
          py::arg("X"), py::arg("W"), py::arg("H"));

    m.def(
        "nmf_fit",
        [](const Matrix& X, int rank, int nruns, int max_iterations, double tolerance, std::uint64_t seed, int threads) {
            const NmfFit f = nmf_fit_best(X, rank, make_nmf_config(nruns, max_iterations, tolerance, seed, threads));
            py::dict d;
            d["W"] = f.W;
            d["H"] = f.H;
            d["loss"] = f.loss;
            d["iterations"] = f.iterations;
            d["run_index"] = f.run_index;
            d["seed"] = f.seed;
            return d;
        },
        py::arg("X"), py::arg("rank"), py::arg("nruns") = 50, py::arg("max_iterations") = 2000,
        py::arg("tolerance") = 1e-6, py::arg("seed") = 0, py::arg("threads") = 0,
        "Best-of-nruns KL multiplicative-update NMF. Returns a dict with W, H, loss.");

    m.def("cluster_assign", [](const Matrix& H) { return cluster_assign(H); }, py::arg("H"));

    m.def(
        "opt_rank",
        [](const Matrix& Y, int nruns, int max_iterations, double tolerance, std::uint64_t seed, int threads) {
            py::gil_scoped_release release;
            const auto r = opt_rank(TimeSeriesMatrix(Y), make_nmf_config(nruns, max_iterations, tolerance, seed, threads));
            py::gil_scoped_acquire acquire;
            return rank_dict(r);
        },
        py::arg("Y"), py::arg("nruns") = 50, py::arg("max_iterations") = 2000, py::arg("tolerance") = 1e-6,
        py::arg("seed") = 0, py::arg("threads") = 0);

    m.def(
        "detect_cps",
        [](const Matrix& Y, int mindist, int nruns, int nreps, std::optional<double> alpha, std::optional<int> rank,
           const std::string& testtype, std::uint64_t seed, int max_iterations, double tolerance, int threads) {
            DetectionConfig cfg;
            cfg.mindist = mindist;
            cfg.nruns = nruns;
            cfg.nreps = nreps;
            cfg.alpha = alpha;
            cfg.rank = rank;
            cfg.testtype = parse_test_type(testtype);
            cfg.master_seed = seed;
            cfg.max_iterations = max_iterations;
            cfg.tolerance = tolerance;
            cfg.threads = threads;
            const TimeSeriesMatrix ts(Y);
            ChangePointReport r;
            {
                py::gil_scoped_release release;
                r = detect_cps(ts, cfg);
            }
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["time"] = row.time;
                d["p_value"] = row.p_value;
                d["significant"] = row.significant ? py::object(py::bool_(*row.significant)) : py::object(py::none());
                d["loss_decrease"] = row.loss_decrease;
                rows.append(d);
            }
            py::dict out;
            out["rank"] = r.rank_used;
            out["change_points"] = rows;
            out["compute_time"] = r.compute_time.count();
            out["alpha"] = r.alpha;
            out["testtype"] = std::string(to_string(r.testtype));
            out["rank_selection"] = r.rank_selection ? py::object(rank_dict(*r.rank_selection)) : py::object(py::none());
            return out;
        },
        py::arg("Y"), py::arg("mindist") = 35, py::arg("nruns") = 50, py::arg("nreps") = 100,
        py::arg("alpha") = py::none(), py::arg("rank") = py::none(), py::arg("testtype") = "welch_t",
        py::arg("seed") = 0, py::arg("max_iterations") = 2000, py::arg("tolerance") = 1e-6, py::arg("threads") = 0);

    m.def(
        "est_net",
        [](const Matrix& Y, const std::string& lambda, std::optional<int> rank, int nruns,
           const std::vector<long>& changepoints, std::uint64_t seed, int threads) {
            EstNetOptions opt;
            opt.lambda = parse_lambda_spec(lambda);
            opt.rank = rank;
            opt.nruns = nruns;
            opt.changepoints = changepoints;
            opt.master_seed = seed;
            opt.threads = threads;
            const TimeSeriesMatrix ts(Y);
            NetworkEstimate est;
            {
                py::gil_scoped_release release;
                est = est_net(ts, opt);
            }
            py::list segments;
            for (const auto& seg : est.segments) {
                py::dict d;
                d["range"] = py::make_tuple(seg.range.first, seg.range.last);
                d["consensus"] = seg.consensus.values;
                py::list adj;
                for (const auto& A : seg.adjacency) adj.append(py::cast(A.values));
                d["adjacency"] = adj;
                segments.append(d);
            }
            py::dict out;
            out["rank"] = est.rank_used;
            out["segments"] = segments;
            return out;
        },
        py::arg("Y"), py::arg("lambda_"), py::arg("rank") = py::none(), py::arg("nruns") = 50,
        py::arg("changepoints") = std::vector<long>{}, py::arg("seed") = 0, py::arg("threads") = 0,
        "lambda_ accepts a cluster count, a threshold, a comma list or start:stop:step.");

    m.def(
        "simulate",
        [](long variables, long time_points, const std::vector<long>& changepoints, int clusters, double within,
           double between, bool reshuffle, std::uint64_t seed) {
            SimulationSpec spec;
            spec.variables = variables;
            spec.time_points = time_points;
            spec.changepoints = changepoints;
            spec.clusters = clusters;
            spec.within_corr = within;
            spec.between_corr = between;
            spec.reshuffle = reshuffle;
            spec.master_seed = seed;
            const SimulatedData sim = simulate_dataset(spec);
            py::dict out;
            out["data"] = sim.data.values();
            out["changepoints"] = sim.changepoints;
            out["labels"] = sim.labels;
            return out;
        },
        py::arg("variables") = 40, py::arg("time_points") = 300, py::arg("changepoints") = std::vector<long>{},
        py::arg("clusters") = 2, py::arg("within_corr") = 0.75, py::arg("between_corr") = 0.20,
        py::arg("reshuffle") = true, py::arg("seed") = 0);

    m.def(
        "rescale",
        [](const Matrix& raw, double target_mean, double min_sd, std::optional<double> factor) {
            RescaleOptions o;
            o.target_mean = target_mean;
            o.min_sd = min_sd;
            o.factor = factor;
            return rescale(raw, o).values();
        },
        py::arg("raw"), py::arg("target_mean") = 100.0, py::arg("min_sd") = 2.0, py::arg("factor") = py::none());

    m.def("bh_adjust", [](const std::vector<double>& p) { return bh_adjust(p); }, py::arg("pvalues"));
    m.def(
        "welch_t_test",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto r = welch_t_test(x, y);
            return py::make_tuple(r.t, r.df, r.p);
        },
        py::arg("x"), py::arg("y"), "Returns (t, df, p) for H1: mean(x) < mean(y).");
    m.def(
        "rank_sum_test",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto r = rank_sum_test(x, y);
            return py::make_tuple(r.w, r.p);
        },
        py::arg("x"), py::arg("y"));
    m.def(
        "ks_test",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto r = ks_test_greater(x, y);
            return py::make_tuple(r.d_plus, r.p);
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "consensus_matrix",
        [](const Matrix& segment, int rank, int nruns, std::uint64_t seed) {
            return consensus_matrix(segment, rank, nruns, seed).values;
        },
        py::arg("segment"), py::arg("rank"), py::arg("nruns") = 50, py::arg("seed") = 0);

    m.def(
        "export_network",
        [](const BinaryMatrix& A, const std::string& atlas_path, const std::vector<std::string>& communities,
           const std::vector<long>& node_ids, const std::vector<std::string>& colors, const std::string& source) {
            ExportFilter filter{communities, node_ids};
            ExportMetadata meta;
            meta.source = source;
            return to_json_string(build_network_export(A, load_atlas(atlas_path), filter, colors, meta));
        },
        py::arg("adjacency"), py::arg("atlas_path"), py::arg("communities") = std::vector<std::string>{},
        py::arg("node_ids") = std::vector<long>{}, py::arg("colors") = std::vector<std::string>{},
        py::arg("source") = "", "Returns the network export as a JSON string.");
}
