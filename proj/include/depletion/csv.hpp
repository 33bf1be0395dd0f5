#pragma once

// Minimal comma-separated table reading and writing shared by all file
// schemas. No quoting: fields never contain commas.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depletion::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    /// Column index by name, or throws ValidationError.
    std::size_t column(std::string_view name) const;
};

/// Blank lines and lines starting with '#' are skipped. Every row must have
/// as many fields as the header.
Table parse(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Throws ValidationError naming the line and column on malformed input.
double parse_number(std::string_view field, std::size_t line, std::string_view column);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

/// Throws ValidationError unless the header equals `expected` exactly.
void require_header(const Table& table, std::span<const std::string_view> expected);

class Writer {
public:
    explicit Writer(std::vector<std::string> header);

    void add_row(std::span<const double> values);
    void add_row(std::span<const std::string> fields);
    std::string str() const { return out_; }

private:
    std::size_t columns_;
    std::string out_;
};

}  // namespace depletion::csv
