#include "csv.hpp"

#include <fstream>
#include <sstream>

#include "gridhub/errors.hpp"

namespace gridhub {

std::vector<CsvRow> parse_csv(const std::string& text, const std::string& file_for_errors) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;
    long line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                row_has_content = true;
                break;
            case ',':
                end_field();
                row_has_content = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_has_content || !field.empty() || !row.empty()) end_row();
                ++line;
                break;
            default:
                field += ch;
                row_has_content = true;
                break;
        }
    }
    if (in_quotes)
        throw ParseError(file_for_errors, line, -1, "unterminated quoted field");
    if (row_has_content || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string csv_line(const CsvRow& row) {
    std::string out;
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        const std::string& f = row[i];
        if (f.find_first_of(",\"\n\r") != std::string::npos) {
            out += '"';
            for (char ch : f) {
                if (ch == '"') out += '"';
                out += ch;
            }
            out += '"';
        } else {
            out += f;
        }
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failure on " + path);
}

}  // namespace gridhub
