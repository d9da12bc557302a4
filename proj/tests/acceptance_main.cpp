// Runs every acceptance criterion and prints one line per criterion.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "kdvcrit/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> only(argv + 1, argv + argc);
  const auto rep = kdv::acceptance::run(only, [](const kdv::acceptance::CheckResult& r) {
    std::printf("%s  (%.1f s)\n", kdv::acceptance::summary_line(r).c_str(), r.runtime);
    if (r.status != "pass" || std::getenv("KDV_DETAILS")) std::printf("     %s\n", kdv::io::dump(r.details, 0).c_str());
    std::fflush(stdout);
  });
  return rep.all_pass() ? 0 : 1;
}
