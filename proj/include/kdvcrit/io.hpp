#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace kdv::io {

using json = nlohmann::ordered_json;

// %.17g; non-finite values become nan / inf / -inf.
std::string fmt(double v);

// JSON text with every float written as %.17g. Non-finite floats become null.
std::string dump(const json& j, int indent = 2);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const Table& t);
Table read_csv(std::istream& is);

}  // namespace kdv::io
