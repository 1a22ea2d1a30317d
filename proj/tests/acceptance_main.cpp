#include "kgsys/acceptance.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    kgsys::SuiteOptions options;
    if (const char* seed = std::getenv("KGSYS_SEED")) options.seed = std::stoull(seed);
    options.on_result = [](const kgsys::CriterionResult& r) { std::cout << kgsys::summary_line(r) << std::endl; };
    const auto report = kgsys::validate_suite(options);
    if (argc > 1) std::ofstream(argv[1]) << kgsys::to_json(report) << '\n';
    int passed = 0;
    double seconds = 0.0;
    for (const auto& r : report.results) {
        passed += r.pass;
        seconds += r.seconds;
    }
    std::cout << passed << "/" << report.results.size() << " criteria passed in " << seconds << " s\n";
    return report.all_pass() ? EXIT_SUCCESS : EXIT_FAILURE;
}
