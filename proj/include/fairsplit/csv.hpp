#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairsplit::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based file line of each data row (header lines and blanks skipped).
    std::vector<std::size_t> line_numbers;

    std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a comma-separated file with a header row. Fields may be quoted with
/// double quotes; doubled quotes inside a quoted field are unescaped. CR at
/// line ends is stripped. Blank lines are skipped.
Table read_table(const std::filesystem::path& path);

/// Splits one CSV line into fields (same quoting rules as read_table).
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a comma, quote, or newline.
std::string escape_field(std::string_view field);

class Writer {
public:
    explicit Writer(const std::filesystem::path& path);
    void write_row(const std::vector<std::string>& fields);
    void write_raw(std::string_view text);
    void close();

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict, locale-independent numeric parsing. Returns nullopt on any
/// trailing garbage or empty input.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

/// Reads a flat `key = value` file. '#' starts a comment, blank lines are
/// skipped, keys are lowercased, later keys override earlier ones.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

} // namespace fairsplit::csv
