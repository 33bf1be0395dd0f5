#include "depletion/csv.hpp"

#include "depletion/distribution.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace depletion::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ValidationError("missing column '" + std::string(name) + "'");
}

Table parse(std::string_view text) {
    Table table;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw ValidationError("empty CSV: no header line");
    return table;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::ios_base::failure("write failed for '" + path.string() + "'");
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw ValidationError("line " + std::to_string(line) + ", column '" + std::string(column) +
                              "': not a number: '" + std::string(field) + "'");
    }
    return value;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void require_header(const Table& table, std::span<const std::string_view> expected) {
    bool ok = table.header.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = table.header[i] == expected[i];
    if (!ok) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + std::string(e);
        std::string got;
        for (const auto& h : table.header) got += (got.empty() ? "" : ",") + h;
        throw ValidationError("bad header: expected '" + want + "', found '" + got + "'");
    }
}

Writer::Writer(std::vector<std::string> header) : columns_(header.size()) {
    add_row(std::span<const std::string>(header));
}

void Writer::add_row(std::span<const double> values) {
    std::vector<std::string> fields;
    fields.reserve(values.size());
    for (double v : values) fields.push_back(format_number(v));
    add_row(std::span<const std::string>(fields));
}

void Writer::add_row(std::span<const std::string> fields) {
    if (fields.size() != columns_) throw std::logic_error("csv row width does not match header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ += ',';
        out_ += fields[i];
    }
    out_ += '\n';
}

}  // namespace depletion::csv
