#pragma once

// Deterministic CSV output and the matching reader.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace amqw::io {

/// Shortest representation with at most 12 significant digits; -0 prints as 0.
inline std::string format_double(double v)
{
    if (v == 0.0)
        return "0";
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::vector<std::string> header)
        : out_(path, std::ios::binary), columns_(header.size())
    {
        if (!out_)
            throw std::runtime_error("cannot open " + path + " for writing");
        write_fields(header);
    }

    template <class... Fields>
    void row(const Fields&... fields)
    {
        if (sizeof...(Fields) != columns_)
            throw std::logic_error("CSV row width does not match header");
        std::vector<std::string> cells;
        cells.reserve(sizeof...(Fields));
        (cells.push_back(cell(fields)), ...);
        write_fields(cells);
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    void write_fields(const std::vector<std::string>& f)
    {
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << f[i];
        }
        out_ << '\n';
        if (!out_)
            throw std::runtime_error("write failed");
    }

    std::ofstream out_;
    std::size_t columns_;
};

/// Parsed CSV file. Fields are never quoted in the files this library writes.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw std::out_of_range("no column '" + std::string(name) + "'");
    }

    std::vector<double> numeric_column(std::string_view name) const
    {
        const std::size_t c = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            const std::string& s = r.at(c);
            double v = 0.0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw std::runtime_error("non-numeric value '" + s + "' in column " + std::string(name));
            out.push_back(v);
        }
        return out;
    }

    std::vector<std::string> text_column(std::string_view name) const
    {
        const std::size_t c = column_index(name);
        std::vector<std::string> out;
        for (const auto& r : rows)
            out.push_back(r.at(c));
        return out;
    }
};

inline std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + " is empty");
    t.header = split_fields(line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto fields = split_fields(line);
        if (fields.size() != t.header.size())
            throw std::runtime_error(path + ": row width " + std::to_string(fields.size()) + " does not match header");
        t.rows.push_back(std::move(fields));
    }
    return t;
}

} // namespace amqw::io
