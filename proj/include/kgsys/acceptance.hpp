#pragma once

// The validation suite: ten property-based criteria with pinned seeds, each
// producing a machine-readable pass/fail record.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace kgsys {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    std::vector<std::pair<std::string, double>> metrics;
    double seconds = 0.0;

    double metric(const std::string& key) const;
};

struct SuiteOptions {
    std::uint64_t seed = 20240611;
    std::vector<int> only; ///< criterion ids to run; empty runs all
    /// Ground-state level cache; unreadable files are ignored and rewritten.
    std::filesystem::path h0_cache;
    std::function<void(const CriterionResult&)> on_result;
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<CriterionResult> results;

    bool all_pass() const;
};

inline constexpr int kCriterionCount = 10;

const char* criterion_name(int id);
/// std::out_of_range for ids outside 1..10. Exceptions inside a criterion become a failed result.
CriterionResult run_criterion(int id, std::uint64_t seed);
SuiteReport validate_suite(const SuiteOptions& options = {});

std::string to_json(const CriterionResult& result);
std::string to_json(const SuiteReport& report);
/// "[PASS] C4 conservation (12.3 s): detail"
std::string summary_line(const CriterionResult& result);

} // namespace kgsys
