#include "kmln/harness.hpp"

#include "kmln/sampling.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <thread>

namespace kmln {

namespace {

using CheckFn = std::function<Finding()>;

Finding make_finding(std::string check, std::string subject)
{
    Finding f;
    f.check = std::move(check);
    f.subject = std::move(subject);
    return f;
}

std::uint64_t sub_seed(const SuiteConfig& cfg, const std::string& check, const std::string& subject)
{
    return derive_seed(cfg.seed, check + "/" + subject);
}

Finding homomorphism(const SuiteConfig& cfg)
{
    Finding f = make_finding("homomorphism", "-");
    Rng rng(sub_seed(cfg, f.check, f.subject));
    for (int i = 0; i < cfg.samples_per_check; ++i) {
        const ParamSetd left = random_params(rng, cfg.real_mode);
        const ParamSetd right = random_params(rng, cfg.real_mode);
        const Mat4d gl = assemble(left);
        const Mat4d gr = assemble(right);
        const Mat4d dense = gl * gr;
        const double scale = gl.norm() * gr.norm();
        const double err = relative_error((assemble(compose(left, right)) - dense).cwiseAbs().maxCoeff(), scale);
        if (err > f.worst_residual)
            f.worst_residual = err;
        if (err > kHomomorphismTol && !f.counterexample)
            f.counterexample = std::make_pair(left, right);
    }
    f.status = f.counterexample ? CheckStatus::Fail : CheckStatus::Pass;
    return f;
}

Finding bijection(const SuiteConfig& cfg)
{
    Finding f = make_finding("bijection", "-");
    Rng rng(sub_seed(cfg, f.check, f.subject));
    for (int i = 0; i < cfg.samples_per_check; ++i) {
        const ParamSetd p = random_params(rng, cfg.real_mode);
        const double err = relative_error((to_vector(disassemble(assemble(p))) - to_vector(p)).norm(), p.norm());
        f.worst_residual = std::max(f.worst_residual, err);
    }
    f.status = f.worst_residual < kBijectionTol ? CheckStatus::Pass : CheckStatus::Fail;
    return f;
}

Finding reality_closure(const SuiteConfig& cfg)
{
    Finding f = make_finding("reality_closure", "-");
    Rng rng(sub_seed(cfg, f.check, f.subject));
    for (int i = 0; i < cfg.samples_per_check; ++i) {
        const ParamSetd left = random_params(rng, true);
        const ParamSetd right = random_params(rng, true);
        const ParamSetd product = compose(left, right);
        const Mat4d g = assemble(product);
        f.worst_residual = std::max(f.worst_residual, relative_error(g.imag().cwiseAbs().maxCoeff(), g.norm()));
        const bool ok = is_real_conditions(product, kRealityTol) && is_real_matrix(g, kRealityTol);
        if (!ok && !f.counterexample)
            f.counterexample = std::make_pair(left, right);
    }
    f.status = f.counterexample ? CheckStatus::Fail : CheckStatus::Pass;
    return f;
}

Finding family_closure(const SuiteConfig& cfg, FamilyTag tag)
{
    Finding f = make_finding("closure", std::string(family_name(tag)));
    Rng rng(sub_seed(cfg, f.check, f.subject));
    const FamilyConstants constants = random_constants(tag, rng, cfg.real_mode);

    ClosureOptions options;
    options.real_mode = cfg.real_mode;
    ConstraintDescriptor broken;
    if (cfg.inject_fault == tag) {
        broken = corrupted(descriptor(tag));
        options.construction = &broken;
    }
    const ClosureReport r = closure_check(tag, constants, cfg.samples_per_check, rng(), cfg.tol, options);
    f.worst_residual = r.worst_residual;
    f.counterexample = r.counterexample;
    f.status = r.passed ? CheckStatus::Pass : CheckStatus::Fail;
    if (r.product_fit) {
        for (auto [c, v] : r.product_fit->recovered.present()) {
            const auto fixed = constants.get(c);
            f.detail += std::string(constant_name(c)) + (fixed && std::abs(*fixed - v) <= 1e-8 * std::abs(*fixed)
                                                             ? " kept; "
                                                             : " changed; ");
        }
    }
    if (!r.real_preserved)
        f.detail += "reality lost; ";
    return f;
}

Finding family_rank(const SuiteConfig& cfg, FamilyTag tag)
{
    Finding f = make_finding("rank_profile", std::string(family_name(tag)));
    const int observed = rank_profile(tag, sub_seed(cfg, f.check, f.subject), cfg.real_mode, kRankInstances);
    const RankClaim claim = rank_claim(tag);
    f.observed_rank = observed;
    f.claimed_rank = claim.rank;
    if (observed == claim.rank) {
        f.status = claim.disputed ? CheckStatus::Fail : CheckStatus::Pass;
        if (claim.disputed)
            f.detail = "claim marked disputed but confirmed numerically";
    } else {
        f.status = claim.disputed ? CheckStatus::Discrepancy : CheckStatus::Fail;
        f.detail = claim.disputed ? "claimed rank disagrees with the generic rank of the family" : "unexpected rank";
    }
    return f;
}

Finding family_rank1(const SuiteConfig& cfg, FamilyTag tag)
{
    Finding f = make_finding("rank1_restrict", std::string(family_name(tag)));
    Rng rng(sub_seed(cfg, f.check, f.subject));
    int worst_rank = 0;
    for (int i = 0; i < kRankInstances; ++i) {
        const FamilyConstants constants = random_constants(tag, rng, cfg.real_mode);
        const FamilyInstance restricted = rank1_restrict(random_instance(tag, constants, rng, cfg.real_mode));
        const ParamSetd p = construct(restricted);
        worst_rank = std::max(worst_rank, numeric_rank(assemble(p), cfg.tol));
        for (const CVec4d& b : restricted.base)
            f.worst_residual = std::max(f.worst_residual, relative_error(std::abs(det_block(b)), b.squaredNorm()));
    }
    f.observed_rank = worst_rank;
    f.status = worst_rank <= 1 && f.worst_residual <= cfg.tol ? CheckStatus::Pass : CheckStatus::Fail;
    return f;
}

// Linear map ParamVector -> entries of the assembled matrix, one row per entry.
Eigen::Matrix<Complexd, 16, 16> assembly_map()
{
    Eigen::Matrix<Complexd, 16, 16> map;
    for (int j = 0; j < 16; ++j) {
        ParamVectord e = ParamVectord::Zero();
        e(j) = 1;
        const Mat4d g = assemble(from_vector(e));
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                map(r * 4 + c, j) = g(r, c);
    }
    return map;
}

Finding variant_table(VariantId id)
{
    Finding f = make_finding("variant_table", variant_name(id));
    const auto map = assembly_map();
    const auto& eqs = variant_constraints(id).equations;
    Eigen::MatrixXcd stacked = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(eqs.size()) + 8, 16);
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        stacked(row, eqs[i].target) += 1.0;
        if (eqs[i].source)
            stacked(row, *eqs[i].source) -= eqs[i].coef;
    }
    const auto base = static_cast<Eigen::Index>(eqs.size());
    for (int q = 0; q < 4; ++q) {
        stacked.row(base + q) = map.row(id.row * 4 + q);
        stacked.row(base + 4 + q) = map.row(q * 4 + id.col);
    }
    const Eigen::VectorXd table_sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(stacked.topRows(base)).singularValues();
    const Eigen::VectorXd all_sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(stacked).singularValues();
    // Seven independent equations spanning exactly the zero row/column conditions.
    const bool independent = eqs.size() == 7 && table_sv(6) > 1e-8 * table_sv(0);
    f.worst_residual = all_sv(7) / all_sv(0);
    f.status = independent && f.worst_residual < kVariantClosureTol ? CheckStatus::Pass : CheckStatus::Fail;
    return f;
}

Finding variant_zero_pattern(const SuiteConfig& cfg, VariantId id)
{
    Finding f = make_finding("variant_zero_pattern", variant_name(id));
    Rng rng(sub_seed(cfg, f.check, f.subject));
    for (int i = 0; i < cfg.samples_per_check; ++i) {
        const Mat4d g = assemble(construct_variant(id, random_params(rng, cfg.real_mode)));
        f.worst_residual = std::max(f.worst_residual, zero_pattern_residual(id, g));
        if (cfg.real_mode && !is_real_matrix(g, kRealityTol))
            f.detail = "reality lost";
    }
    f.status = f.worst_residual <= kAbsoluteFloor && f.detail.empty() ? CheckStatus::Pass : CheckStatus::Fail;
    return f;
}

Finding variant_closure(const SuiteConfig& cfg, VariantId id)
{
    Finding f = make_finding("variant_closure", variant_name(id));
    Rng rng(sub_seed(cfg, f.check, f.subject));
    const VariantConstraints& constraints = variant_constraints(id);
    for (int i = 0; i < cfg.samples_per_check; ++i) {
        const ParamSetd left = construct_variant(id, random_params(rng, cfg.real_mode));
        const ParamSetd right = construct_variant(id, random_params(rng, cfg.real_mode));
        const ParamSetd product = compose(left, right);
        const double err = std::max(zero_pattern_residual(id, assemble(product)), constraint_residual(constraints, product));
        f.worst_residual = std::max(f.worst_residual, err);
        if (err > kVariantClosureTol && !f.counterexample)
            f.counterexample = std::make_pair(left, right);
    }
    f.status = f.counterexample ? CheckStatus::Fail : CheckStatus::Pass;
    return f;
}

Finding variant_rank(const SuiteConfig& cfg, VariantId id)
{
    Finding f = make_finding("variant_rank", variant_name(id));
    Rng rng(sub_seed(cfg, f.check, f.subject));
    int rank = 0;
    for (int i = 0; i < kRankInstances; ++i)
        rank = std::max(rank, numeric_rank(assemble(construct_variant(id, random_params(rng, cfg.real_mode))), cfg.tol));
    f.observed_rank = rank;
    f.claimed_rank = 3;
    f.status = rank == 3 ? CheckStatus::Pass : CheckStatus::Fail;
    return f;
}

std::vector<CheckFn> plan(const SuiteConfig& cfg)
{
    std::vector<CheckFn> checks;
    checks.emplace_back([&cfg] { return homomorphism(cfg); });
    checks.emplace_back([&cfg] { return bijection(cfg); });
    checks.emplace_back([&cfg] { return reality_closure(cfg); });
    for (FamilyTag tag : cfg.families) {
        checks.emplace_back([&cfg, tag] { return family_closure(cfg, tag); });
        checks.emplace_back([&cfg, tag] { return family_rank(cfg, tag); });
        if (rank1_method(tag) != Rank1Method::None)
            checks.emplace_back([&cfg, tag] { return family_rank1(cfg, tag); });
    }
    for (VariantId id : cfg.variants) {
        checks.emplace_back([id] { return variant_table(id); });
        checks.emplace_back([&cfg, id] { return variant_zero_pattern(cfg, id); });
        checks.emplace_back([&cfg, id] { return variant_closure(cfg, id); });
        checks.emplace_back([&cfg, id] { return variant_rank(cfg, id); });
    }
    return checks;
}

} // namespace

std::string_view status_name(CheckStatus s)
{
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Discrepancy: break;
    }
    return "discrepancy";
}

int FindingsReport::count(CheckStatus s) const
{
    return static_cast<int>(std::count_if(findings.begin(), findings.end(), [s](const Finding& f) { return f.status == s; }));
}

bool FindingsReport::passed(bool strict) const
{
    return count(CheckStatus::Fail) == 0 && (!strict || count(CheckStatus::Discrepancy) == 0);
}

std::size_t planned_checks(const SuiteConfig& cfg) { return plan(cfg).size(); }

FindingsReport run_suite(const SuiteConfig& cfg)
{
    if (cfg.samples_per_check < 1 || !(cfg.tol > 0))
        throw Error(ErrorCode::InvalidArgument, "samples_per_check must be >= 1 and tol > 0");

    const std::vector<CheckFn> checks = plan(cfg);
    FindingsReport report{cfg, std::vector<Finding>(checks.size())};
    if (!cfg.parallel) {
        for (std::size_t i = 0; i < checks.size(); ++i)
            report.findings[i] = checks[i]();
        return report;
    }

    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < checks.size(); start += workers) {
        const std::size_t stop = std::min(checks.size(), start + workers);
        std::vector<std::future<Finding>> batch;
        for (std::size_t i = start; i < stop; ++i)
            batch.push_back(std::async(std::launch::async, checks[i]));
        for (std::size_t i = start; i < stop; ++i)
            report.findings[i] = batch[i - start].get();
    }
    return report;
}

} // namespace kmln
