#pragma once

// Seeded batch verification of the algebra, the families and the rank-3
// variants. Every configured check yields exactly one Finding.

#include "kmln/families.hpp"
#include "kmln/rank3.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kmln {

struct SuiteConfig {
    std::uint64_t seed = 42;
    int samples_per_check = 100;
    double tol = kDefaultRankTol;
    std::vector<FamilyTag> families{all_families().begin(), all_families().end()};
    std::vector<VariantId> variants = all_variants();
    bool real_mode = false;
    /// Test hook: build this family's instances from a corrupted descriptor.
    std::optional<FamilyTag> inject_fault;
    bool parallel = true;
};

enum class CheckStatus { Pass, Fail, Discrepancy };

std::string_view status_name(CheckStatus s);

struct Finding {
    std::string check;
    std::string subject;  // family name, variant name, or "-"
    CheckStatus status = CheckStatus::Pass;
    double worst_residual = 0.0;
    std::optional<int> observed_rank;
    std::optional<int> claimed_rank;
    std::optional<std::pair<ParamSetd, ParamSetd>> counterexample;
    std::string detail;
};

struct FindingsReport {
    SuiteConfig config;
    std::vector<Finding> findings;

    int count(CheckStatus s) const;
    bool passed(bool strict) const;
};

/// Thresholds for the checks that do not use SuiteConfig::tol.
inline constexpr double kHomomorphismTol = 1e-10;
inline constexpr double kBijectionTol = 1e-14;
inline constexpr double kRealityTol = 1e-10;
inline constexpr double kVariantClosureTol = 1e-12;
inline constexpr int kRankInstances = 20;

/// Number of findings run_suite will produce for cfg.
std::size_t planned_checks(const SuiteConfig& cfg);

FindingsReport run_suite(const SuiteConfig& cfg);

} // namespace kmln
