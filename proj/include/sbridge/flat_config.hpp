#pragma once

// Flat key = value run configuration: one file per run, '#' comments, dotted
// key paths, decimal numbers, comma-separated lists. Every key must be
// consumed by the subcommand schema; leftovers are rejected so manifests can
// double as regression fixtures.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sbridge {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class FlatConfig {
  public:
    static FlatConfig parse_file(const std::filesystem::path& path);
    static FlatConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;

    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    std::vector<double> get_list(const std::string& key);

    // Throws ConfigError naming every key no getter touched.
    void require_all_consumed() const;

    const std::map<std::string, std::string>& raw() const { return values_; }

  private:
    const std::string& fetch(const std::string& key);

    std::map<std::string, std::string> values_;
    std::map<std::string, bool> consumed_;
};

}  // namespace sbridge
