#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sievelab {

// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double x);

// CSV with a header row, LF endings, comma separators, doubles at 17
// significant digits. Rows are written cell-by-cell.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& cells);
    const std::string& content() const { return buffer_; }

  private:
    std::string buffer_;
    std::size_t columns_;
};

// Writes via a temp file + rename so failures never leave partial outputs.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit over the raw config bytes; recomputable from the stored text.
std::uint64_t fnv1a64(const std::string& bytes);

struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;  // paths relative to the output dir
    bool pass = true;

    nlohmann::json to_json() const;
};

std::string utc_timestamp();

// Parses JSON, mapping parse failures to ConfigInvalid with the byte offset.
nlohmann::json parse_json_or_throw(const std::string& text, const std::string& what);

}  // namespace sievelab
