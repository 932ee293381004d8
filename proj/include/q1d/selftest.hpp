#pragma once

#include <string>
#include <vector>

namespace q1d {

struct SelfCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Module examples at reduced sizes, prefixed by module name.
std::vector<SelfCheck> run_selftest(unsigned threads);

}  // namespace q1d
