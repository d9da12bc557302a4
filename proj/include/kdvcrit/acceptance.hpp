#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kdvcrit/io.hpp"

namespace kdv::acceptance {

struct CheckResult {
  int id = 0;
  std::string name;
  std::string group;
  std::string status = "skip";  // pass / fail / skip
  double measured = 0.0;
  double tolerance = 0.0;
  std::string relation;         // how measured compares with tolerance
  io::json details = io::json::object();
  double runtime = 0.0;
};

struct Report {
  std::vector<CheckResult> checks;
  bool all_pass() const;  // no failures among the checks that ran
  io::json to_json(bool timing) const;
};

struct Criterion {
  int id;
  std::string name;
  std::string group;
};
const std::vector<Criterion>& criteria();

// Selector matches a criterion id, name or group; empty runs everything.
bool selected(const Criterion& c, const std::vector<std::string>& only);

Report run(const std::vector<std::string>& only = {},
           const std::function<void(const CheckResult&)>& on_done = nullptr);

// One-line summary used by the acceptance binary and the CLI.
std::string summary_line(const CheckResult& r);

}  // namespace kdv::acceptance
