#include "fabisearch/errors.hpp"
#include "fabisearch/export.hpp"
#include "fabisearch/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace fabisearch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("fabisearch_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content = {}) const {
        const std::string p = (path / name).string();
        if (!content.empty()) std::ofstream(p) << content;
        return p;
    }
};

// 333 nodes over a handful of named communities plus unlabelled ones.
AtlasTable synthetic_atlas() {
    const std::vector<std::string> names{"Default", "SMhand", "Visual", "FrontoParietal", "Auditory",
                                         "CinguloOperc", "DorsalAttn", "Salience"};
    AtlasTable atlas;
    for (int i = 0; i < 333; ++i) {
        AtlasNode n;
        if (i % 9 == 4) n.community = std::nullopt;
        else if (i % 11 == 0) n.community = "None";
        else n.community = names[static_cast<std::size_t>(i) % names.size()];
        n.x = i * 0.5 - 80;
        n.y = -i * 0.25;
        n.z = (i % 7) * 3.0;
        atlas.push_back(n);
    }
    return atlas;
}

BinaryMatrix random_adjacency(long p, std::uint64_t seed, double density = 0.1) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(density);
    BinaryMatrix A = BinaryMatrix::Zero(p, p);
    for (long i = 0; i < p; ++i)
        for (long j = i + 1; j < p; ++j) A(i, j) = A(j, i) = b(rng) ? 1 : 0;
    return A;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("load a small csv") {
    TempDir dir;
    const auto m = load_matrix(dir.file("y.csv", "1,2\n3,4\n5,6\n"), TableFormat::csv, false);
    CHECK(m.time_points() == 3);
    CHECK(m.variables() == 2);
    CHECK(m.values()(2, 1) == 6.0);

    const auto labelled = load_matrix(dir.file("h.csv", "a,\"b,c\"\n1,2\n3,4\n"), TableFormat::csv, true);
    CHECK(labelled.column_labels() == std::vector<std::string>{"a", "b,c"});
    CHECK(has_header_row(dir.file("h2.csv", "a,b\n1,2\n"), TableFormat::csv));
    CHECK_FALSE(has_header_row(dir.file("n.csv", "1,2\n3,4\n"), TableFormat::csv));

    const auto tsv = load_matrix(dir.file("r.tsv", "t1\t1\t2\nt2\t3\t4\n"), TableFormat::tsv, false, true);
    CHECK(tsv.row_labels() == std::vector<std::string>{"t1", "t2"});
    CHECK(tsv.values()(1, 0) == 3.0);
    CHECK(format_from_path("x.tsv") == TableFormat::tsv);
    CHECK(format_from_path("x.csv") == TableFormat::csv);
}

TEST_CASE("a non-positive entry is reported with its cell") {
    TempDir dir;
    try {
        load_matrix(dir.file("z.csv", "1,2\n3,0\n5,6\n"), TableFormat::csv, false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.col() == 2);
        CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
    }
}

TEST_CASE("malformed tables") {
    TempDir dir;
    CHECK_THROWS_AS(read_table(dir.file("ragged.csv", "1,2\n3\n"), TableFormat::csv, false), ParseError);
    try {
        read_table(dir.file("text.csv", "1,2\n3,x\n"), TableFormat::csv, false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.col() == 2);
    }
    CHECK_THROWS_AS(read_table(dir.file("empty.csv", "\n"), TableFormat::csv, false), ParseError);
    CHECK_THROWS_AS(read_table((dir.path / "missing.csv").string(), TableFormat::csv, false), ParseError);
}

TEST_CASE("save then load is the identity") {
    TempDir dir;
    std::mt19937_64 rng(1);
    std::lognormal_distribution<double> d(3.0, 2.0);
    Matrix Y(17, 5);
    for (Eigen::Index k = 0; k < Y.size(); ++k) Y.data()[k] = d(rng);
    Y(0, 0) = 1e-300;
    Y(1, 1) = 0.1;
    const std::string path = dir.file("y.csv");
    save_matrix(path, Y);
    CHECK(load_matrix(path, TableFormat::csv, false).values() == Y);
    save_matrix(path, Y, TableFormat::csv, {"a", "b", "c", "d", "e"});
    const auto back = load_matrix(path, TableFormat::csv, true);
    CHECK(back.values() == Y);
    CHECK(back.column_labels().back() == "e");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("adjacency csv round trip and validation") {
    TempDir dir;
    const BinaryMatrix A = random_adjacency(9, 3, 0.4);
    const std::string path = dir.file("a.csv");
    save_adjacency_csv(path, A);
    CHECK(load_adjacency_csv(path) == A);
    save_adjacency_csv(path, A, true);
    CHECK(load_adjacency_csv(path) == A);
    CHECK_THROWS_AS(load_adjacency_csv(dir.file("asym.csv", "0,1\n0,0\n")), ParseError);
    CHECK_THROWS_AS(load_adjacency_csv(dir.file("diag.csv", "1,0\n0,0\n")), ParseError);
    CHECK_THROWS_AS(load_adjacency_csv(dir.file("two.csv", "0,2\n2,0\n")), ParseError);
    CHECK_THROWS_AS(load_adjacency_csv(dir.file("rect.csv", "0,1,0\n1,0,0\n")), DimensionError);
}

TEST_CASE("atlas files") {
    TempDir dir;
    const AtlasTable atlas =
        load_atlas(dir.file("atlas.csv", "community,x,y,z\nVisual,1,2,3\n,4,5,6\nNone,-1.5,0,2\n"));
    REQUIRE(atlas.size() == 3);
    CHECK(atlas[0].community == std::optional<std::string>("Visual"));
    CHECK_FALSE(atlas[1].community.has_value());
    CHECK(atlas[2].community == std::optional<std::string>("None"));
    CHECK(atlas[2].x == -1.5);
    CHECK_THROWS_AS(load_atlas(dir.file("bad.csv", "name,x,y,z\nA,1,2,3\n")), ParseError);
    CHECK_THROWS_AS(load_atlas(dir.file("nan.csv", "community,x,y,z\nA,1,q,3\n")), ParseError);

    const std::string path = dir.file("saved.csv");
    save_atlas(path, atlas);
    const AtlasTable back = load_atlas(path);
    REQUIRE(back.size() == 3);
    CHECK_FALSE(back[1].community.has_value());
    CHECK(back[2].x == -1.5);
}

}  // TEST_SUITE

TEST_SUITE("export") {

TEST_CASE("full export of a 333-node network") {
    const AtlasTable atlas = synthetic_atlas();
    const BinaryMatrix A = random_adjacency(333, 7, 0.05);
    const NetworkExport e = build_network_export(A, atlas);
    CHECK(e.schema_version == kNetworkExportSchemaVersion);
    CHECK(e.nodes.size() == 333);
    long expected_edges = 0;
    for (long i = 0; i < 333; ++i)
        for (long j = i + 1; j < 333; ++j) expected_edges += A(i, j);
    CHECK(static_cast<long>(e.edges.size()) == expected_edges);
    for (const auto& [i, j] : e.edges) {
        CHECK(i < j);
        CHECK(A(i - 1, j - 1) == 1);
    }
    CHECK(std::is_sorted(e.edges.begin(), e.edges.end()));
    // Communities in first-appearance order: "None" (node 1), then the named ones.
    REQUIRE(e.communities.size() == 10);
    CHECK(e.communities[0].first == std::optional<std::string>("None"));
    CHECK(e.communities[0].second == default_palette()[0]);
    CHECK(e.nodes[0].id == 1);
    CHECK(e.nodes[4].community == std::nullopt);
}

TEST_CASE("community filter keeps edges within the kept set") {
    const AtlasTable atlas = synthetic_atlas();
    const BinaryMatrix A = random_adjacency(333, 8, 0.08);
    ExportFilter filter;
    filter.communities = {"None", "Visual"};
    const NetworkExport e = build_network_export(A, atlas, filter);
    std::set<long> kept;
    for (const auto& n : e.nodes) {
        CHECK((n.community == std::optional<std::string>("None") || n.community == std::optional<std::string>("Visual")));
        kept.insert(n.id);
    }
    long expected = 0;
    for (long i = 0; i < 333; ++i) {
        const auto& c = atlas[static_cast<std::size_t>(i)].community;
        expected += c == std::optional<std::string>("None") || c == std::optional<std::string>("Visual");
    }
    CHECK(static_cast<long>(kept.size()) == expected);
    long edges = 0;
    for (long i : kept)
        for (long j : kept)
            if (i < j) edges += A(i - 1, j - 1);
    CHECK(static_cast<long>(e.edges.size()) == edges);
    for (const auto& [i, j] : e.edges) {
        CHECK(kept.count(i) == 1);
        CHECK(kept.count(j) == 1);
    }
}

TEST_CASE("node filter and stable colors") {
    const AtlasTable atlas = synthetic_atlas();
    const BinaryMatrix A = random_adjacency(333, 9);
    ExportFilter filter;
    for (long k = 1; k <= 30; ++k) filter.node_ids.push_back(k);
    filter.node_ids.push_back(999);  // outside the atlas, ignored
    const NetworkExport part = build_network_export(A, atlas, filter);
    CHECK(part.nodes.size() == 30);
    const NetworkExport full = build_network_export(A, atlas);
    CHECK(part.communities == full.communities);
    for (const auto& n : part.nodes) CHECK(n.color == full.nodes[static_cast<std::size_t>(n.id - 1)].color);

    const NetworkExport custom = build_network_export(A, atlas, {}, {"#000000", "#ffffff"});
    CHECK(custom.communities[0].second == "#000000");
    CHECK(custom.communities[1].second == "#ffffff");
    CHECK(custom.communities[2].second == "#000000");
    CHECK_THROWS_AS(build_network_export(A, atlas, {}, {"red"}), ParameterError);
    ExportFilter both = filter;
    both.communities = {"Visual"};
    CHECK_THROWS_AS(build_network_export(A, atlas, both), ParameterError);
}

TEST_CASE("dimension mismatch") {
    const AtlasTable atlas = synthetic_atlas();
    CHECK_THROWS_AS(build_network_export(random_adjacency(332, 1), atlas), AtlasMismatchError);
}

TEST_CASE("json round trip") {
    const AtlasTable atlas = synthetic_atlas();
    ExportMetadata meta;
    meta.segment = 2;
    meta.time_range = TimeRange{36, 70};
    meta.mode = AdjacencyMode::threshold;
    meta.lambda = 0.4;
    meta.source = "unit test";
    const NetworkExport e = build_network_export(random_adjacency(333, 4), atlas, {}, {}, meta);
    const NetworkExport back = network_export_from_json(to_json_string(e));
    CHECK(back.nodes.size() == e.nodes.size());
    CHECK(back.edges == e.edges);
    CHECK(back.communities == e.communities);
    CHECK(back.metadata.segment == 2);
    CHECK(back.metadata.time_range == std::optional<TimeRange>(TimeRange{36, 70}));
    CHECK(back.metadata.lambda == 0.4);
    CHECK(back.metadata.mode == std::optional<AdjacencyMode>(AdjacencyMode::threshold));
    CHECK_FALSE(back.metadata.k.has_value());
    CHECK(back.nodes[4].community == std::nullopt);
    CHECK(to_json_string(back) == to_json_string(e));

    TempDir dir;
    const std::string path = dir.file("n.json");
    save_network_export(path, e);
    CHECK(to_json_string(load_network_export(path)) == to_json_string(e));
}

TEST_CASE("schema violations are rejected") {
    const std::string node = R"({"id":1,"community":null,"x":0,"y":0,"z":0,"color":"#112233"})";
    const std::string node2 = R"({"id":2,"community":"A","x":0,"y":0,"z":0,"color":"#112233"})";
    auto doc = [&](const std::string& nodes, const std::string& edges, int version = 1) {
        return R"({"schema_version":)" + std::to_string(version) +
               R"(,"metadata":{"source":""},"communities":[],"nodes":[)" + nodes + R"(],"edges":[)" + edges + "]}";
    };
    CHECK_NOTHROW(network_export_from_json(doc(node + "," + node2, R"({"i":1,"j":2})")));
    CHECK_THROWS_AS(network_export_from_json(doc(node, "", 2)), ParseError);
    CHECK_THROWS_AS(network_export_from_json(doc(node + "," + node, "")), ParseError);
    CHECK_THROWS_AS(network_export_from_json(doc(node + "," + node2, R"({"i":2,"j":1})")), ParseError);
    CHECK_THROWS_AS(network_export_from_json(doc(node, R"({"i":1,"j":3})")), ParseError);
    CHECK_THROWS_AS(network_export_from_json(R"({"schema_version":1})"), ParseError);
    CHECK_THROWS_AS(network_export_from_json("not json"), ParseError);
    std::string bad_color = node;
    bad_color.replace(bad_color.find("#112233"), 7, "blue");
    CHECK_THROWS_AS(network_export_from_json(doc(bad_color, "")), ParseError);
}

}  // TEST_SUITE
