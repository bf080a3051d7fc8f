#include "sohom/acceptance.hpp"

#include <iostream>

int main() {
  const auto results = sohom::acceptance::run_all(std::cout);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  return passed == results.size() ? 0 : 1;
}
