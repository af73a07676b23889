#include "kmln/harness.hpp"
#include "kmln/io.hpp"

#include <gtest/gtest.h>

#include <set>

namespace {

using namespace kmln;
using enum FamilyTag;

std::set<std::string> subjects_with(const FindingsReport& r, CheckStatus s)
{
    std::set<std::string> out;
    for (const Finding& f : r.findings)
        if (f.status == s)
            out.insert(f.subject);
    return out;
}

const FindingsReport& default_report()
{
    static const FindingsReport report = run_suite(SuiteConfig{});
    return report;
}

TEST(Suite, DefaultRunPasses)
{
    const FindingsReport& r = default_report();
    EXPECT_EQ(r.count(CheckStatus::Fail), 0);
    EXPECT_TRUE(r.passed(false));
    EXPECT_FALSE(r.passed(true));
    const std::set<std::string> expected{"KM-2", "KM-4", "KM-5", "KN-1", "KN-2", "ML-1",
                                         "ML-2", "KMN-2", "KML-2", "NLK-1", "NLM-1"};
    EXPECT_EQ(subjects_with(r, CheckStatus::Discrepancy), expected);
    for (const Finding& f : r.findings) {
        if (f.status == CheckStatus::Discrepancy) {
            EXPECT_EQ(f.check, "rank_profile");
            ASSERT_TRUE(f.observed_rank && f.claimed_rank);
            EXPECT_NE(*f.observed_rank, *f.claimed_rank);
        }
    }
}

TEST(Suite, EveryCheckOnce)
{
    const FindingsReport& r = default_report();
    // 3 global, 2 per family, 25 rank-1 restrictions, 4 per variant.
    EXPECT_EQ(r.findings.size(), 3u + 39 * 2 + 25 + 16 * 4);
    EXPECT_EQ(r.findings.size(), planned_checks(SuiteConfig{}));
    std::set<std::pair<std::string, std::string>> keys;
    for (const Finding& f : r.findings)
        EXPECT_TRUE(keys.insert({f.check, f.subject}).second) << f.check << " " << f.subject;
}

TEST(Suite, ObservedRanks)
{
    for (const Finding& f : default_report().findings) {
        if (f.check == "rank_profile") {
            const bool full = rank1_method(*parse_family(f.subject)) == Rank1Method::None;
            EXPECT_EQ(f.observed_rank, full ? 4 : 2) << f.subject;
        }
        if (f.check == "variant_rank")
            EXPECT_EQ(f.observed_rank, 3);
        if (f.check == "closure")
            EXPECT_LT(f.worst_residual, 1e-9);
    }
}

TEST(Suite, SingleSample)
{
    SuiteConfig cfg;
    cfg.samples_per_check = 1;
    const FindingsReport r = run_suite(cfg);
    EXPECT_EQ(r.findings.size(), planned_checks(cfg));
    EXPECT_EQ(r.count(CheckStatus::Fail), 0);
}

TEST(Suite, SerialEqualsParallel)
{
    SuiteConfig cfg;
    cfg.samples_per_check = 10;
    const FindingsReport a = run_suite(cfg);
    cfg.parallel = false;
    const FindingsReport b = run_suite(cfg);
    EXPECT_EQ(serialize_findings(a), serialize_findings(b));
    cfg.seed = 43;
    EXPECT_NE(serialize_findings(run_suite(cfg)), serialize_findings(b));
}

TEST(Suite, RealMode)
{
    SuiteConfig cfg;
    cfg.real_mode = true;
    cfg.samples_per_check = 20;
    const FindingsReport r = run_suite(cfg);
    EXPECT_EQ(r.count(CheckStatus::Fail), 0);
}

TEST(Suite, Filters)
{
    SuiteConfig cfg;
    cfg.families = {K3};
    cfg.variants = {};
    cfg.samples_per_check = 1;
    const FindingsReport r = run_suite(cfg);
    EXPECT_EQ(r.findings.size(), 3u + 3);
    EXPECT_EQ(subjects_with(r, CheckStatus::Pass), (std::set<std::string>{"-", "K-3"}));
}

TEST(Suite, FaultInjectionFails)
{
    SuiteConfig cfg;
    cfg.families = {K5, KM3};
    cfg.variants = {};
    cfg.samples_per_check = 5;
    cfg.inject_fault = K5;
    const FindingsReport r = run_suite(cfg);
    EXPECT_FALSE(r.passed(false));
    for (const Finding& f : r.findings) {
        if (f.check == "closure" && f.subject == "K-5") {
            EXPECT_EQ(f.status, CheckStatus::Fail);
            EXPECT_TRUE(f.counterexample);
        }
        if (f.subject == "KM-3")
            EXPECT_EQ(f.status, CheckStatus::Pass);
    }
}

TEST(Suite, InvalidConfig)
{
    SuiteConfig cfg;
    cfg.samples_per_check = 0;
    EXPECT_THROW(run_suite(cfg), Error);
    cfg.samples_per_check = 1;
    cfg.tol = 0;
    EXPECT_THROW(run_suite(cfg), Error);
}

TEST(Seeds, Derived)
{
    EXPECT_EQ(derive_seed(42, "closure/K-1"), derive_seed(42, "closure/K-1"));
    EXPECT_NE(derive_seed(42, "closure/K-1"), derive_seed(42, "closure/K-2"));
    EXPECT_NE(derive_seed(42, "closure/K-1"), derive_seed(43, "closure/K-1"));
}

} // namespace
