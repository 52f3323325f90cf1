#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pipecomm {

// RFC-4180 subset: comma separator, double-quote quoting with "" escapes,
// LF or CRLF record ends. A trailing newline does not create an empty record.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Quotes only when the field requires it, so plain output stays diff-friendly.
std::string csv_field(const std::string& s);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

} // namespace pipecomm
