#pragma once

// CSV import/export for kernels, marginals and run artifacts. Numbers are
// written with 17 significant digits so re-reading reproduces them bit for
// bit; header row carries column labels (column indices for matrices).

#include <filesystem>
#include <string>
#include <vector>

#include "sbridge/markov_prior.hpp"

namespace sbridge::csv {

std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    // Comment lines (without the leading '#') emitted before the header.
    std::vector<std::string> comments;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path,
                  const std::vector<double>& row_major, std::size_t rows,
                  std::size_t cols);
// Returns row-major data; dimensions from the file shape.
std::pair<std::vector<double>, std::pair<std::size_t, std::size_t>> read_matrix(
    const std::filesystem::path& path);

void write_kernel(const std::filesystem::path& path, const TransitionKernel& kernel);
TransitionKernel read_kernel(const std::filesystem::path& path, double step_duration);

void write_marginal(const std::filesystem::path& path, const Marginal& marginal);
Marginal read_marginal(const std::filesystem::path& path);

}  // namespace sbridge::csv
