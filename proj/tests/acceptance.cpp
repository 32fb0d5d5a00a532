// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if
// any criterion fails. Pass --stretch to add the n=3, l=7 target.

#include "k3taut/k3taut.hpp"

#include <cstring>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
  bool stretch = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--stretch") == 0) stretch = true;
  k3taut::suite::SuiteOptions o;
  o.workers = std::max(1u, std::thread::hardware_concurrency());
  bool all = true;
  k3taut::suite::run_all(o, stretch, [&](const auto& r) {
    std::cout << r.line() << std::endl;
    all = all && r.passed;
  });
  return all ? 0 : 1;
}
