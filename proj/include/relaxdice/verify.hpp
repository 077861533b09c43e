#pragma once

#include <string>
#include <vector>

namespace relaxdice {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    /// CLI executable used for the determinism check; empty runs it in-process.
    std::string cli_path;
    /// Scratch directory for CLI output.
    std::string work_dir = "verify_work";
    int threads = 0;
};

inline constexpr int kNumCriteria = 11;

/// Runs acceptance criterion `id` (1..11). Exceptions become failed results.
CriterionResult run_criterion(int id, const VerifyOptions& options);

/// "PASS  3  name  (1.2 s)  detail"
std::string format_result(const CriterionResult& result);

}  // namespace relaxdice
