#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nmx/error.hpp"
#include "nmx/util.hpp"

namespace nmx {

// RFC-4180-style CSV: comma separator, LF line endings, fields quoted only
// when they contain a comma, quote, or newline.

inline std::string csv_escape(std::string_view field) {
    bool needs_quote = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) { buf_ = csv_line(header); }

    void add_row(const std::vector<std::string>& fields) { buf_ += csv_line(fields); }

    const std::string& text() const { return buf_; }

    void save(const std::filesystem::path& path) const { write_text_file(path, buf_); }

private:
    std::string buf_;
};

// Parses a whole CSV document. Handles quoted fields, embedded separators and
// both LF and CRLF endings. A trailing newline does not produce an empty record.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;  // next field exists even if empty
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                field_started = true;
                break;
        }
    }
    if (in_quotes) raise(errc::invalid_config, "unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

inline std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path) {
    return parse_csv(read_text_file(path));
}

}  // namespace nmx
