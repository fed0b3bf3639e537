#include "fabisearch/export.hpp"

#include "fabisearch/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace fabisearch {

using nlohmann::json;

namespace {

const std::regex& hex_color() {
    static const std::regex re("^#[0-9a-fA-F]{6}$");
    return re;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional_string(const json& j, const char* what) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_string()) throw ParseError(std::string(what) + " must be a string or null");
    return j.get<std::string>();
}

const json& require(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    return obj.at(key);
}

}  // namespace

const std::vector<std::string>& default_palette() {
    static const std::vector<std::string> palette{
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
        "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5"};
    return palette;
}

NetworkExport build_network_export(const BinaryMatrix& A, const AtlasTable& atlas, const ExportFilter& filter,
                                   const std::vector<std::string>& colors, ExportMetadata metadata) {
    const auto p = static_cast<Eigen::Index>(atlas.size());
    if (A.rows() != A.cols() || A.rows() != p)
        throw AtlasMismatchError("adjacency is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                                 " but the atlas has " + std::to_string(p) + " nodes");
    if (!filter.communities.empty() && !filter.node_ids.empty())
        throw ParameterError("filter by communities or by node ids, not both");
    for (const auto& c : colors)
        if (!std::regex_match(c, hex_color())) throw ParameterError("color '" + c + "' is not of the form #rrggbb");
    const auto& palette = colors.empty() ? default_palette() : colors;

    NetworkExport out;
    out.metadata = std::move(metadata);
    std::vector<std::optional<std::string>> order;
    for (const auto& node : atlas)
        if (std::find(order.begin(), order.end(), node.community) == order.end()) order.push_back(node.community);
    for (std::size_t n = 0; n < order.size(); ++n) out.communities.emplace_back(order[n], palette[n % palette.size()]);
    auto color_of = [&](const std::optional<std::string>& c) {
        const auto it = std::find(order.begin(), order.end(), c);
        return palette[static_cast<std::size_t>(it - order.begin()) % palette.size()];
    };

    std::vector<char> keep(static_cast<std::size_t>(p), filter.empty() ? 1 : 0);
    if (!filter.communities.empty()) {
        const std::set<std::string> wanted(filter.communities.begin(), filter.communities.end());
        for (Eigen::Index i = 0; i < p; ++i)
            if (atlas[i].community && wanted.count(*atlas[i].community)) keep[i] = 1;
    }
    for (long id : filter.node_ids)
        if (id >= 1 && id <= p) keep[id - 1] = 1;

    for (Eigen::Index i = 0; i < p; ++i) {
        if (!keep[i]) continue;
        const auto& a = atlas[i];
        out.nodes.push_back({static_cast<long>(i + 1), a.community, a.x, a.y, a.z, color_of(a.community)});
    }
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (keep[i] && keep[j] && (A(i, j) != 0 || A(j, i) != 0))
                out.edges.emplace_back(static_cast<long>(i + 1), static_cast<long>(j + 1));
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

std::string to_json_string(const NetworkExport& e, int indent) {
    json meta = {{"segment", e.metadata.segment ? json(*e.metadata.segment) : json(nullptr)},
                 {"time_range", e.metadata.time_range
                                    ? json::array({e.metadata.time_range->first, e.metadata.time_range->last})
                                    : json(nullptr)},
                 {"mode", e.metadata.mode ? json(*e.metadata.mode == AdjacencyMode::threshold ? "threshold" : "clusters")
                                          : json(nullptr)},
                 {"lambda", e.metadata.lambda ? json(*e.metadata.lambda) : json(nullptr)},
                 {"k", e.metadata.k ? json(*e.metadata.k) : json(nullptr)},
                 {"source", e.metadata.source}};
    json communities = json::array();
    for (const auto& [name, color] : e.communities) communities.push_back({{"name", optional_string(name)}, {"color", color}});
    json nodes = json::array();
    for (const auto& n : e.nodes)
        nodes.push_back({{"id", n.id}, {"community", optional_string(n.community)}, {"x", n.x}, {"y", n.y}, {"z", n.z},
                         {"color", n.color}});
    json edges = json::array();
    for (const auto& [i, j] : e.edges) edges.push_back({{"i", i}, {"j", j}});
    const json doc = {{"schema_version", e.schema_version},
                      {"metadata", meta},
                      {"communities", communities},
                      {"nodes", nodes},
                      {"edges", edges}};
    return doc.dump(indent);
}

NetworkExport network_export_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError(std::string("invalid JSON: ") + err.what());
    }
    NetworkExport e;
    try {
        e.schema_version = require(doc, "schema_version").get<int>();
        if (e.schema_version != kNetworkExportSchemaVersion)
            throw ParseError("unsupported schema_version " + std::to_string(e.schema_version));

        const json& meta = require(doc, "metadata");
        if (!meta.is_object()) throw ParseError("metadata must be an object");
        auto present = [](const json& obj, const char* key) { return obj.contains(key) && !obj.at(key).is_null(); };
        if (present(meta, "segment")) e.metadata.segment = meta.at("segment").get<long>();
        if (present(meta, "time_range"))
            e.metadata.time_range = TimeRange{meta.at("time_range").at(0).get<long>(), meta.at("time_range").at(1).get<long>()};
        if (present(meta, "mode")) {
            const auto mode = meta.at("mode").get<std::string>();
            if (mode != "threshold" && mode != "clusters") throw ParseError("unknown mode '" + mode + "'");
            e.metadata.mode = mode == "threshold" ? AdjacencyMode::threshold : AdjacencyMode::clusters;
        }
        if (present(meta, "lambda")) e.metadata.lambda = meta.at("lambda").get<double>();
        if (present(meta, "k")) e.metadata.k = meta.at("k").get<int>();
        if (present(meta, "source")) e.metadata.source = meta.at("source").get<std::string>();

        for (const auto& c : require(doc, "communities"))
            e.communities.emplace_back(read_optional_string(require(c, "name"), "community name"),
                                       require(c, "color").get<std::string>());

        std::set<long> ids;
        for (const auto& n : require(doc, "nodes")) {
            ExportNode node{require(n, "id").get<long>(), read_optional_string(require(n, "community"), "community"),
                            require(n, "x").get<double>(), require(n, "y").get<double>(), require(n, "z").get<double>(),
                            require(n, "color").get<std::string>()};
            if (node.id < 1) throw ParseError("node id must be >= 1");
            if (!ids.insert(node.id).second) throw ParseError("duplicate node id " + std::to_string(node.id));
            if (!std::regex_match(node.color, hex_color())) throw ParseError("bad color '" + node.color + "'");
            e.nodes.push_back(std::move(node));
        }
        for (const auto& edge : require(doc, "edges")) {
            const long i = require(edge, "i").get<long>();
            const long j = require(edge, "j").get<long>();
            if (!(i < j)) throw ParseError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") must have i < j");
            if (!ids.count(i) || !ids.count(j))
                throw ParseError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") references a missing node");
            e.edges.emplace_back(i, j);
        }
    } catch (const json::exception& err) {
        throw ParseError(std::string("schema violation: ") + err.what());
    }
    return e;
}

void save_network_export(const std::string& path, const NetworkExport& e) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << to_json_string(e) << '\n';
    if (!out) throw ParseError("failed writing '" + path + "'");
}

NetworkExport load_network_export(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return network_export_from_json(buf.str());
}

}  // namespace fabisearch
