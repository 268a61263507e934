#include "salab/acceptance.hpp"

#include <iostream>

int main() {
    int failed = 0;
    for (int id = 1; id <= salab::kCriterionCount; ++id) {
        const auto r = salab::run_criterion(id);
        std::cout << r.line() << std::endl;
        failed += r.passed ? 0 : 1;
    }
    std::cout << (salab::kCriterionCount - failed) << "/" << salab::kCriterionCount << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
