// Minimal CSV plumbing shared by corpus, dataset, and log emitters. All
// doubles are formatted with 17 significant digits so files round-trip
// bit-exactly through strtod.
#pragma once

#include <string>
#include <vector>

namespace srcp {

std::string g17(double v);

// Splits one CSV line on commas; no quoting (none of our files need it).
std::vector<std::string> csv_split(const std::string& line);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

// Reads all lines of a text file; throws on open failure.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace srcp
