#pragma once

// Run-directory persistence: CSV writers with a bit-exact numeric format,
// content hashing and the run manifest.

#include "ergoselect/grid.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ergoselect {

inline constexpr const char* kToolVersion = "0.1.0";

// 17 significant digits: doubles round-trip exactly
std::string format_double(double v);

std::string grid_field_csv(const GridField& field, const std::string& name);
GridField parse_grid_field_csv(const std::string& text);

// header row of column names, then rows of formatted doubles
std::string table_csv(const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows);

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

struct RunWriter {
    std::filesystem::path dir;
    nlohmann::json manifest;

    explicit RunWriter(const std::filesystem::path& run_dir, const nlohmann::json& config_echo);
    void write_file(const std::string& name, const std::string& bytes);
    void add_certificate(const std::string& name, bool pass, double value, double threshold);
    bool all_certificates_pass() const;
    // atomic finalize: manifest.json written via tmp + rename
    void finalize(const std::string& status);
};

}  // namespace ergoselect
