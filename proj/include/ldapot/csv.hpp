#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ldapot::csv {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// RFC-4180 quoting: fields containing commas, quotes, or line breaks are
// wrapped in double quotes with embedded quotes doubled.
std::string escape_field(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Parse a whole CSV text into records. Handles quoted fields with embedded
// separators/newlines, doubled quotes, and both LF and CRLF endings. Throws
// CsvError on an unterminated quote or stray text after a closing quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path);

}  // namespace ldapot::csv
