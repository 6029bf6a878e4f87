#include <iostream>
#include <string>

#include "nsinflow/acceptance.hpp"

// Usage: acceptance [criterion ...]
int main(int argc, char** argv) {
    nsinflow::acceptance::SuiteOptions options;
    for (int i = 1; i < argc; ++i) options.only.emplace_back(argv[i]);
    return nsinflow::acceptance::cmd_verify(options, std::cout);
}
