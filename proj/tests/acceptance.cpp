// Acceptance battery: one line per criterion, nonzero exit if any fails.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "relaxdice/text.hpp"
#include "relaxdice/verify.hpp"

int main(int argc, char** argv) {
    relaxdice::VerifyOptions opt;
    opt.cli_path = RELAXDICE_CLI_PATH;
    opt.work_dir = "acceptance_work";
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(static_cast<int>(relaxdice::parse_int(argv[i])));
    if (ids.empty())
        for (int i = 1; i <= relaxdice::kNumCriteria; ++i) ids.push_back(i);
    int failed = 0;
    for (int id : ids) {
        const auto r = relaxdice::run_criterion(id, opt);
        std::cout << relaxdice::format_result(r) << std::endl;
        failed += !r.passed;
    }
    std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
