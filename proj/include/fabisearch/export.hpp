#pragma once

#include "fabisearch/io.hpp"
#include "fabisearch/network.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fabisearch {

inline constexpr int kNetworkExportSchemaVersion = 1;

struct ExportNode {
    long id = 0;  // 1-based atlas row
    std::optional<std::string> community;
    double x = 0.0, y = 0.0, z = 0.0;
    std::string color;
};

struct ExportMetadata {
    std::optional<long> segment;  // 1-based segment index
    std::optional<TimeRange> time_range;
    std::optional<AdjacencyMode> mode;
    std::optional<double> lambda;  // threshold mode
    std::optional<int> k;          // clustering mode
    std::string source;
};

struct NetworkExport {
    int schema_version = kNetworkExportSchemaVersion;
    ExportMetadata metadata;
    /// Every community of the full atlas in palette order, with its color.
    std::vector<std::pair<std::optional<std::string>, std::string>> communities;
    std::vector<ExportNode> nodes;
    std::vector<std::pair<long, long>> edges;  // node ids, first < second
};

/// Either community labels or node ids, not both. Empty means keep everything.
struct ExportFilter {
    std::vector<std::string> communities;
    std::vector<long> node_ids;

    bool empty() const { return communities.empty() && node_ids.empty(); }
};

const std::vector<std::string>& default_palette();

/// Joins A with the atlas. Communities are ordered by first appearance in the
/// atlas (unlabelled nodes form one group) and the n-th community takes the
/// n-th color, cycling when the palette is short. Colors do not depend on the
/// filter. Throws AtlasMismatchError when dim(A) differs from the atlas size.
NetworkExport build_network_export(const BinaryMatrix& A, const AtlasTable& atlas, const ExportFilter& filter = {},
                                   const std::vector<std::string>& colors = {}, ExportMetadata metadata = {});

std::string to_json_string(const NetworkExport& e, int indent = 2);
/// Parses and validates a document; schema violations raise ParseError.
NetworkExport network_export_from_json(const std::string& text);

void save_network_export(const std::string& path, const NetworkExport& e);
NetworkExport load_network_export(const std::string& path);

}  // namespace fabisearch
