#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kdv::cli {

// args excludes the program name. Exit codes: 0 success, 1 failed check, 2 usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

// "a:b:n" -> n points from a to b; "a" -> {a}.
std::vector<double> parse_range(const std::string& s);

}  // namespace kdv::cli
