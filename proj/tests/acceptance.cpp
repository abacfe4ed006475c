// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any gating
// criterion fails.

#include <cstdlib>
#include <iostream>
#include <string>

#include "planck/acceptance.hpp"

int main(int argc, char** argv) {
  planck::AcceptanceOptions opt;
  if (argc > 1) opt.seed = std::stoull(argv[1]);
  if (const char* dir = std::getenv("PLANCK_ACCEPTANCE_DIR"); dir && *dir) opt.artifact_dir = dir;
  const auto results = planck::run_acceptance(opt, std::cout);
  std::size_t failed = 0;
  for (const auto& r : results) failed += !r.informational && !r.passed;
  std::cout << results.size() << " criteria, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}
