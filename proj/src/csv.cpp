#include "udikit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "udikit/error.hpp"

namespace udikit {

std::string format_number(double v) {
    if (v == 0.0) {
        return "0";  // folds -0
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

double parse_number(std::string_view text, std::string_view context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
        throw ParseError(std::string(context) + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

std::optional<double> parse_optional_number(std::string_view text, std::string_view context) {
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_number(text, context);
}

long long parse_integer(std::string_view text, std::string_view context) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError(std::string(context) + ": bad integer '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

void check_csv_field(std::string_view field, std::string_view what) {
    if (field.find_first_of(",\r\n") != std::string_view::npos) {
        throw Error(std::string(what) + " '" + std::string(field) + "' cannot contain commas or line breaks");
    }
}

CsvTable parse_csv(std::string_view text, std::string_view expected_header, std::string_view source) {
    CsvTable table;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool have_header = false;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!have_header) {
            if (line != expected_header) {
                throw ParseError(std::string(source) + ":1: expected header '" + std::string(expected_header) + "'");
            }
            table.header = split_fields(line);
            have_header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != table.header.size()) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) {
        throw ParseError(std::string(source) + ":1: empty file");
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path, std::string_view expected_header) {
    return parse_csv(read_text_file(path), expected_header, path.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace udikit
