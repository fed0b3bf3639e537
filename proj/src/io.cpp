#include "fabisearch/io.hpp"

#include "fabisearch/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fabisearch {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    // Minimal RFC 4180: double-quoted fields may contain the separator and "" escapes.
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == sep) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

char separator(TableFormat format) { return format == TableFormat::tsv ? '\t' : ','; }

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    return out;
}

std::string quote_if_needed(const std::string& s, char sep) {
    if (s.find(sep) == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + '"';
}

// Reads non-empty lines, remembering their 1-based line numbers.
std::vector<std::pair<long, std::string>> read_lines(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::pair<long, std::string>> lines;
    std::string line;
    long number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.emplace_back(number, std::move(line));
    }
    return lines;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

TableFormat format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return TableFormat::csv;
    const std::string ext = path.substr(dot + 1);
    return ext == "tsv" || ext == "tab" ? TableFormat::tsv : TableFormat::csv;
}

bool has_header_row(const std::string& path, TableFormat format) {
    const auto lines = read_lines(path);
    if (lines.empty()) return false;
    for (const auto& cell : split_line(lines.front().second, separator(format)))
        if (!parse_double(cell)) return true;
    return false;
}

Table read_table(const std::string& path, TableFormat format, bool has_header, bool row_names) {
    const auto lines = read_lines(path);
    const char sep = separator(format);
    Table table;
    std::size_t start = 0;
    std::optional<std::size_t> width;
    if (has_header) {
        if (lines.empty()) throw ParseError("'" + path + "' is empty");
        auto header = split_line(lines.front().second, sep);
        width = header.size();
        for (std::size_t c = row_names ? 1 : 0; c < header.size(); ++c) table.column_labels.push_back(trim(header[c]));
        start = 1;
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t r = start; r < lines.size(); ++r) {
        const auto& [number, line] = lines[r];
        const auto cells = split_line(line, sep);
        if (!width) width = cells.size();
        if (cells.size() != *width)
            throw ParseError("ragged row at line " + std::to_string(number) + " of '" + path + "': expected " +
                                 std::to_string(*width) + " cells, found " + std::to_string(cells.size()),
                             number, static_cast<long>(cells.size()));
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (row_names && c == 0) {
                table.row_labels.push_back(trim(cells[c]));
                continue;
            }
            const auto v = parse_double(cells[c]);
            if (!v)
                throw ParseError("non-numeric cell '" + trim(cells[c]) + "' at line " + std::to_string(number) +
                                     ", column " + std::to_string(c + 1) + " of '" + path + "'",
                                 number, static_cast<long>(c + 1));
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) throw ParseError("'" + path + "' contains no numeric data");

    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

TimeSeriesMatrix load_matrix(const std::string& path, TableFormat format, bool has_header, bool row_names) {
    Table t = read_table(path, format, has_header, row_names);
    const long line_offset = has_header ? 2 : 1;
    const long col_offset = row_names ? 2 : 1;
    for (Eigen::Index j = 0; j < t.values.cols(); ++j)
        for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
            const double v = t.values(i, j);
            if (!std::isfinite(v) || v <= 0.0)
                throw ParseError("entry " + format_double(v) + " at data row " + std::to_string(i + 1) +
                                     ", column " + std::to_string(j + 1) + " of '" + path +
                                     "' is not strictly positive and finite",
                                 static_cast<long>(i) + line_offset, static_cast<long>(j) + col_offset);
        }
    return TimeSeriesMatrix(std::move(t.values), std::move(t.column_labels), std::move(t.row_labels));
}

void save_matrix(const std::string& path, const MatrixRef& values, TableFormat format,
                 const std::vector<std::string>& column_labels) {
    const char sep = separator(format);
    auto out = open_out(path);
    if (!column_labels.empty()) {
        for (std::size_t c = 0; c < column_labels.size(); ++c)
            out << (c ? std::string(1, sep) : "") << quote_if_needed(column_labels[c], sep);
        out << '\n';
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? std::string(1, sep) : "") << format_double(values(i, j));
        out << '\n';
    }
    if (!out) throw ParseError("failed writing '" + path + "'");
}

void save_adjacency_csv(const std::string& path, const BinaryMatrix& A, bool header) {
    auto out = open_out(path);
    if (header) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << 'V' << j + 1;
        out << '\n';
    }
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << A(i, j);
        out << '\n';
    }
    if (!out) throw ParseError("failed writing '" + path + "'");
}

BinaryMatrix load_adjacency_csv(const std::string& path) {
    const bool header = has_header_row(path, TableFormat::csv);
    const Table t = read_table(path, TableFormat::csv, header);
    const Eigen::Index p = t.values.rows();
    if (t.values.cols() != p)
        throw DimensionError("adjacency in '" + path + "' is " + std::to_string(p) + "x" +
                             std::to_string(t.values.cols()) + ", expected square");
    BinaryMatrix A(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < p; ++i) {
            const double v = t.values(i, j);
            if (v != 0.0 && v != 1.0)
                throw ParseError("adjacency entry at row " + std::to_string(i + 1) + ", column " +
                                     std::to_string(j + 1) + " is not 0 or 1",
                                 static_cast<long>(i + 1), static_cast<long>(j + 1));
            A(i, j) = static_cast<int>(v);
        }
    for (Eigen::Index j = 0; j < p; ++j) {
        if (A(j, j) != 0)
            throw ParseError("adjacency diagonal entry " + std::to_string(j + 1) + " is not 0",
                             static_cast<long>(j + 1), static_cast<long>(j + 1));
        for (Eigen::Index i = 0; i < j; ++i)
            if (A(i, j) != A(j, i))
                throw ParseError("adjacency is not symmetric at (" + std::to_string(i + 1) + ", " +
                                     std::to_string(j + 1) + ")",
                                 static_cast<long>(i + 1), static_cast<long>(j + 1));
    }
    return A;
}

AtlasTable load_atlas(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError("atlas '" + path + "' is empty");
    const auto header = split_line(lines.front().second, ',');
    const std::vector<std::string> expected{"community", "x", "y", "z"};
    std::vector<std::string> got;
    for (const auto& h : header) got.push_back(trim(h));
    if (got != expected) throw ParseError("atlas '" + path + "' must have header community,x,y,z", lines.front().first, 1);

    AtlasTable atlas;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [number, line] = lines[r];
        const auto cells = split_line(line, ',');
        if (cells.size() != 4)
            throw ParseError("atlas line " + std::to_string(number) + " has " + std::to_string(cells.size()) +
                                 " cells, expected 4",
                             number, static_cast<long>(cells.size()));
        AtlasNode node;
        const std::string community = trim(cells[0]);
        if (!community.empty()) node.community = community;
        double* coords[3] = {&node.x, &node.y, &node.z};
        for (int c = 0; c < 3; ++c) {
            const auto v = parse_double(cells[c + 1]);
            if (!v || !std::isfinite(*v))
                throw ParseError("atlas coordinate '" + trim(cells[c + 1]) + "' at line " + std::to_string(number) +
                                     ", column " + std::to_string(c + 2) + " is not a finite number",
                                 number, c + 2);
            *coords[c] = *v;
        }
        atlas.push_back(std::move(node));
    }
    if (atlas.empty()) throw ParseError("atlas '" + path + "' has no rows");
    return atlas;
}

void save_atlas(const std::string& path, const AtlasTable& atlas) {
    auto out = open_out(path);
    out << "community,x,y,z\n";
    for (const auto& node : atlas)
        out << quote_if_needed(node.community.value_or(""), ',') << ',' << format_double(node.x) << ','
            << format_double(node.y) << ',' << format_double(node.z) << '\n';
    if (!out) throw ParseError("failed writing '" + path + "'");
}

}  // namespace fabisearch
