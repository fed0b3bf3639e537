#pragma once

#include "fabisearch/network.hpp"
#include "fabisearch/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fabisearch {

enum class TableFormat { csv, tsv };

/// tsv for *.tsv / *.tab paths, csv otherwise.
TableFormat format_from_path(const std::string& path);

/// Numeric table with optional labels, before any positivity check.
struct Table {
    Matrix values;
    std::vector<std::string> column_labels;
    std::vector<std::string> row_labels;
};

/// Reads a rectangular numeric table. With row_names the first column holds
/// labels. Ragged rows and non-numeric cells raise ParseError naming the cell.
Table read_table(const std::string& path, TableFormat format, bool has_header, bool row_names = false);

/// True if any cell in the first line fails to parse as a number.
bool has_header_row(const std::string& path, TableFormat format);

/// read_table followed by the TimeSeriesMatrix positivity check; the offending
/// cell is reported with file-relative coordinates.
TimeSeriesMatrix load_matrix(const std::string& path, TableFormat format, bool has_header, bool row_names = false);

/// Writes shortest round-trip decimals, so load_matrix(save_matrix(Y)) == Y.
void save_matrix(const std::string& path, const MatrixRef& values, TableFormat format = TableFormat::csv,
                 const std::vector<std::string>& column_labels = {});

void save_adjacency_csv(const std::string& path, const BinaryMatrix& A, bool header = false);

/// Reads a square symmetric 0/1 matrix with zero diagonal.
BinaryMatrix load_adjacency_csv(const std::string& path);

struct AtlasNode {
    std::optional<std::string> community;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Row order defines node ids 1..p.
using AtlasTable = std::vector<AtlasNode>;

/// CSV with header community,x,y,z. An empty community cell becomes null.
AtlasTable load_atlas(const std::string& path);
void save_atlas(const std::string& path, const AtlasTable& atlas);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace fabisearch
