// Acceptance suite: runs every verification criterion and prints one
// pass/fail line each. Exit code 0 iff everything passed.

#include <iostream>

#include "cefac/verify.hpp"

int main() {
    const auto results = cefac::verify::run_suite("all");
    bool ok = true;
    for (const auto& r : results) {
        std::cout << cefac::verify::format_result(r) << std::endl;
        ok = ok && r.passed;
    }
    std::cout << (ok ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT")
              << std::endl;
    return ok ? 0 : 1;
}
