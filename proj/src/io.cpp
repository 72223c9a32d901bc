#include "ergoselect/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ergoselect {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string grid_field_csv(const GridField& field, const std::string& name) {
    std::ostringstream os;
    os << "# dim=" << field.grid.dim << " N=" << field.grid.n_per_axis << " field=" << name << "\n";
    for (Eigen::Index i = 0; i < field.values.size(); ++i) os << format_double(field.values[i]) << "\n";
    return os.str();
}

GridField parse_grid_field_csv(const std::string& text) {
    std::istringstream is(text);
    std::string header;
    std::getline(is, header);
    int dim = 0, n = 0;
    if (std::sscanf(header.c_str(), "# dim=%d N=%d", &dim, &n) != 2)
        throw std::runtime_error("grid csv: bad header");
    GridField f{PeriodicGrid(dim, n)};
    for (Eigen::Index i = 0; i < f.values.size(); ++i)
        if (!(is >> f.values[i])) throw std::runtime_error("grid csv: truncated");
    return f;
}

std::string table_csv(const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << "\n";
    }
    return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

namespace {
std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}
}  // namespace

RunWriter::RunWriter(const std::filesystem::path& run_dir, const nlohmann::json& config_echo)
    : dir(run_dir) {
    std::filesystem::create_directories(dir);
    manifest["tool"] = "ergoselect";
    manifest["version"] = kToolVersion;
    manifest["config"] = config_echo;
    manifest["started_utc"] = utc_now();
    manifest["certificates"] = nlohmann::json::array();
    manifest["files"] = nlohmann::json::array();
}

void RunWriter::write_file(const std::string& name, const std::string& bytes) {
    std::ofstream out(dir / name, std::ios::binary);
    out << bytes;
    out.close();
    manifest["files"].push_back(
        {{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a64_hex(bytes)}});
}

void RunWriter::add_certificate(const std::string& name, bool pass, double value, double threshold) {
    manifest["certificates"].push_back(
        {{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
}

bool RunWriter::all_certificates_pass() const {
    for (const auto& c : manifest["certificates"])
        if (!c["pass"].get<bool>()) return false;
    return true;
}

void RunWriter::finalize(const std::string& status) {
    manifest["finished_utc"] = utc_now();
    manifest["status"] = status;
    const auto tmp = dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << manifest.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, dir / "manifest.json");
}

}  // namespace ergoselect
