// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: rdlab_acceptance [A1 A2 ...]   (default: every criterion)

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "rdlab/acceptance.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> ids(argv + 1, argv + argc);
    if (ids.empty()) ids = rdlab::acceptance::suite("all");
    int failed = 0;
    try {
        rdlab::acceptance::run(ids, [&](const rdlab::acceptance::Result& r) {
            std::cout << rdlab::acceptance::format(r) << std::endl;
            if (!r.pass) ++failed;
        });
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
