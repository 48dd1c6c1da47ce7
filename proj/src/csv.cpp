#include "sbridge/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sbridge::csv {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_table(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
    for (const auto& c : table.comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path.string());
    Table table;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!header_seen) {
            while (std::getline(ss, cell, ',')) table.header.push_back(cell);
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            double v = 0;
            const auto* begin = cell.data();
            const auto* end = cell.data() + cell.size();
            auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc() || ptr != end)
                throw std::runtime_error("csv: bad number '" + cell + "' in " +
                                         path.string());
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_matrix(const std::filesystem::path& path, const std::vector<double>& data,
                  std::size_t rows, std::size_t cols) {
    Table t;
    t.header.reserve(cols);
    for (std::size_t j = 0; j < cols; ++j) t.header.push_back(std::to_string(j));
    t.rows.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i)
        t.rows.emplace_back(data.begin() + i * cols, data.begin() + (i + 1) * cols);
    write_table(path, t);
}

std::pair<std::vector<double>, std::pair<std::size_t, std::size_t>> read_matrix(
    const std::filesystem::path& path) {
    Table t = read_table(path);
    const std::size_t rows = t.rows.size();
    const std::size_t cols = rows ? t.rows.front().size() : t.header.size();
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const auto& row : t.rows) {
        if (row.size() != cols)
            throw std::runtime_error("csv: ragged matrix in " + path.string());
        data.insert(data.end(), row.begin(), row.end());
    }
    return {std::move(data), {rows, cols}};
}

void write_kernel(const std::filesystem::path& path, const TransitionKernel& kernel) {
    write_matrix(path, kernel.data(), kernel.rows(), kernel.cols());
}

TransitionKernel read_kernel(const std::filesystem::path& path, double step_duration) {
    auto [data, shape] = read_matrix(path);
    return TransitionKernel(shape.first, shape.second, std::move(data), step_duration);
}

void write_marginal(const std::filesystem::path& path, const Marginal& marginal) {
    write_matrix(path, marginal.probabilities(), 1, marginal.size());
}

Marginal read_marginal(const std::filesystem::path& path) {
    auto [data, shape] = read_matrix(path);
    if (shape.first != 1)
        throw std::runtime_error("csv: marginal file must hold a single row");
    return Marginal(std::move(data));
}

}  // namespace sbridge::csv
