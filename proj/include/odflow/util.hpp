#ifndef odflow_util_hpp
#define odflow_util_hpp

#include <string>
#include <string_view>
#include <vector>

namespace odflow::util {

// Splits one CSV line on commas. No quoting: the canonical formats here
// never embed commas in fields.
std::vector<std::string> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

bool parse_double(std::string_view s, double& out);
bool parse_long(std::string_view s, long long& out);

// Shortest round-trippable decimal representation.
std::string format_double(double v);

}  // namespace odflow::util

#endif
