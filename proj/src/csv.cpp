#include "ldapot/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace ldapot::csv {

std::string escape_field(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);

    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out.put(',');
        out << escape_field(fields[i]);
    }
    out.put('\n');
}

std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    while (i < n) {
        if (text[i] == '"') {
            // quoted field
            ++i;
            bool closed = false;
            while (i < n) {
                if (text[i] == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                field.push_back(text[i]);
                ++i;
            }
            if (!closed) throw CsvError("unterminated quoted field at offset " + std::to_string(i));
            if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                throw CsvError("unexpected text after closing quote at offset " +
                               std::to_string(i));
        } else {
            while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                if (text[i] == '"')
                    throw CsvError("bare quote inside unquoted field at offset " +
                                   std::to_string(i));
                field.push_back(text[i]);
                ++i;
            }
        }

        if (i >= n) {
            end_record();
            return records;
        }
        if (text[i] == ',') {
            end_field();
            ++i;
            continue;
        }
        // line break: \n or \r\n
        if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
        ++i;
        end_record();
    }
    // trailing newline: nothing pending
    return records;
}

std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open CSV file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

}  // namespace ldapot::csv
