#include "kdvcrit/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "kdvcrit/common.hpp"

namespace kdv::io {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void walk(const json& j, std::string& out, int indent, int level) {
  const std::string pad = indent > 0 ? std::string(size_t(indent) * (level + 1), ' ') : "";
  const std::string close = indent > 0 ? std::string(size_t(indent) * level, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += json(it.key()).dump();
        out += sep;
        walk(it.value(), out, indent, level + 1);
      }
      out += nl;
      out += close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        walk(e, out, indent, level + 1);
      }
      out += nl;
      out += close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const json& j, int indent) {
  std::string out;
  walk(j, out, indent, 0);
  return out;
}

void write_csv(std::ostream& os, const Table& t) {
  for (size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << "\n";
  }
}

Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError("bad CSV cell: " + cell);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace kdv::io
