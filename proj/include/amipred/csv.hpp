#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "amipred/errors.hpp"

namespace amipred {

// Comma-separated, first line header, UTF-8. Lines starting with '#' carry
// artifact metadata ("# key: value") and are skipped by the parser.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row
    std::map<std::string, std::string> metadata;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("missing required column '" + name + "'");
    }
    bool has_column(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no,
                                               const std::string& file) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw DataError(file + ":" + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

inline bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

}  // namespace detail

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open file: " + path.string());
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            auto colon = line.find(':');
            if (colon != std::string::npos) {
                std::string key = line.substr(1, colon - 1);
                std::string val = line.substr(colon + 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                while (!key.empty() && key.back() == ' ') key.pop_back();
                while (!val.empty() && val.front() == ' ') val.erase(val.begin());
                table.metadata[key] = val;
            }
            continue;
        }
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line, line_no, path.filename().string());
        if (!saw_header) {
            table.header = std::move(fields);
            saw_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw DataError(path.filename().string() + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(table.header.size()) +
                            " fields, got " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!saw_header)
        throw DataError("empty file (no header line): " + path.string());
    return table;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path), path_(path) {
        if (!out_)
            throw DataError("cannot open file for writing: " + path.string());
    }

    void metadata(const std::string& key, const std::string& value) {
        out_ << "# " << key << ": " << value << "\n";
    }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            if (detail::needs_quoting(fields[i])) {
                out_ << '"';
                for (char c : fields[i])
                    c == '"' ? (void)(out_ << "\"\"") : (void)(out_ << c);
                out_ << '"';
            } else {
                out_ << fields[i];
            }
        }
        out_ << '\n';
    }
    void close() {
        out_.close();
        if (!out_)
            throw DataError("write failed: " + path_.string());
    }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(context + ": not a number: '" + s + "'");
    }
}

inline long long parse_int(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(context + ": not an integer: '" + s + "'");
    }
}

// FNV-1a; stamps every artifact with the configuration that produced it.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const std::string& canonical_config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config)));
    return buf;
}

}  // namespace amipred
