// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Usage: acceptance [seed] [criterion ids...]

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "orlicz/verify.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 7;
  std::vector<int> ids;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  for (int i = 2; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) ids = orlicz::verify::suite_criteria("all");

  std::printf("tolerances %s\n", orlicz::verify::tolerances().to_json().dump().c_str());
  int failed = 0;
  for (int id : ids) {
    const auto r = orlicz::verify::run_criterion(id, seed);
    std::printf("[%s] criterion %2d  %-48s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%zu criteria, %d failed\n", ids.size(), failed);
  return failed == 0 ? 0 : 1;
}
