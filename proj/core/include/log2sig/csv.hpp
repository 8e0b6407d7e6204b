#pragma once

#include <string>
#include <vector>

namespace log2sig {

// Minimal RFC-4180-style CSV: comma separators, optional double-quoted
// fields with "" escaping. Embedded newlines inside fields are not
// supported (none of the consumed formats use them).
std::vector<std::string> split_csv_line(const std::string& line);

std::string join_csv_line(const std::vector<std::string>& fields);

}  // namespace log2sig
