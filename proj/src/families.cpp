#include "kmln/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kmln {

namespace {

constexpr std::array<FamilyTag, kFamilyCount> kAllFamilies = [] {
    std::array<FamilyTag, kFamilyCount> tags{};
    for (int i = 0; i < kFamilyCount; ++i)
        tags[static_cast<std::size_t>(i)] = static_cast<FamilyTag>(i);
    return tags;
}();

constexpr std::array<std::string_view, kFamilyCount> kFamilyNames{
    "K-1", "K-2", "K-3", "K-4", "K-5", "K-6", "K-7",
    "M-1", "M-2", "M-3", "M-4", "M-5", "M-6", "M-7",
    "N-1", "N-2", "N-3", "N-4",
    "L-1", "L-2", "L-3", "L-4",
    "KM-1", "KM-2", "KM-3", "KM-4", "KM-5",
    "LN-1", "LN-2",
    "KN-1", "KN-2",
    "ML-1", "ML-2",
    "KMN-1", "KMN-2",
    "KML-1", "KML-2",
    "NLK-1", "NLM-1",
};

constexpr std::array<std::string_view, kConstantCount> kConstantNames{"A", "B", "C", "D", "alpha", "beta", "s", "t"};

// ---------------------------------------------------------------------------
// Descriptor table

using enum Constant;
using enum Vec;

Monomial mono(Complexd factor, std::initializer_list<std::pair<Constant, int>> powers = {})
{
    Monomial m;
    m.factor = factor;
    for (auto [c, p] : powers)
        m.powers[static_cast<std::size_t>(c)] = static_cast<std::int8_t>(p);
    return m;
}

Term term(Monomial coef, std::initializer_list<Source> sources) { return {coef, sources}; }
Term term(Monomial coef, Vec source) { return {coef, {Source{source, 1.0}}}; }

// target = coef * source, on the given part
Rule tie(Vec target, Part part, Monomial coef, Vec source) { return {target, part, {term(coef, source)}}; }
Rule tie(Vec target, Monomial coef, Vec source) { return tie(target, Part::Both, coef, source); }
Rule zero(Vec target) { return {target, Part::Both, {}}; }

ConstraintDescriptor make(FamilyTag tag, std::vector<Vec> free, std::vector<Rule> rules)
{
    ConstraintDescriptor d{tag, std::move(free), {}, std::move(rules)};
    std::array<bool, kConstantCount> used{};
    for (const Rule& r : d.rules)
        for (const Term& t : r.terms)
            for (int c = 0; c < kConstantCount; ++c)
                used[static_cast<std::size_t>(c)] |= t.coef.powers[static_cast<std::size_t>(c)] != 0;
    for (int c = 0; c < kConstantCount; ++c)
        if (used[static_cast<std::size_t>(c)])
            d.constants.push_back(static_cast<Constant>(c));
    return d;
}

std::vector<ConstraintDescriptor> build_table()
{
    const Monomial one = mono(1);
    const Monomial neg = mono(-1);
    const Monomial a = mono(1, {{A, 1}});
    const Monomial inv_a = mono(1, {{A, -1}});
    const Monomial neg_inv_a = mono(-1, {{A, -1}});
    const Monomial a2 = mono(1, {{A, 2}});
    const Monomial neg_a = mono(-1, {{A, 1}});
    const Monomial neg_a2 = mono(-1, {{A, 2}});
    const Monomial d = mono(1, {{D, 1}});
    const Monomial ad = mono(1, {{A, 1}, {D, 1}});
    const Monomial t = mono(1, {{T, 1}});
    const Monomial at = mono(1, {{A, 1}, {T, 1}});
    const Monomial alpha = mono(1, {{Alpha, 1}});
    const Monomial neg_alpha_inv_a = mono(-1, {{Alpha, 1}, {A, -1}});
    const Monomial neg_alpha_a = mono(-1, {{Alpha, 1}, {A, 1}});
    const Monomial beta = mono(1, {{Beta, 1}});
    const Monomial beta_a = mono(1, {{Beta, 1}, {A, 1}});
    const Monomial b = mono(1, {{B, 1}});
    const Monomial inv_b = mono(1, {{B, -1}});
    const Monomial c = mono(1, {{C, 1}});

    using P = Part;
    std::vector<ConstraintDescriptor> t_;
    t_.reserve(kFamilyCount);

    // One free vector: k.
    t_.push_back(make(FamilyTag::K1, {K}, {zero(N), zero(L), zero(M)}));
    t_.push_back(make(FamilyTag::K2, {K}, {zero(N), zero(L), tie(M, one, K)}));
    t_.push_back(make(FamilyTag::K3, {K}, {zero(N), tie(L, d, K), zero(M)}));
    t_.push_back(make(FamilyTag::K4, {K}, {tie(N, a, K), zero(L), zero(M)}));
    t_.push_back(make(FamilyTag::K5, {K}, {tie(N, a, K), tie(L, d, K), tie(M, ad, K)}));
    t_.push_back(make(FamilyTag::K6, {K},
                      {tie(N, a, K), tie(L, P::Scalar, t, K), tie(L, P::Vector, neg_inv_a, K),
                       tie(M, P::Scalar, at, K), tie(M, P::Vector, neg, K)}));
    t_.push_back(make(FamilyTag::K7, {K},
                      {tie(N, P::Scalar, alpha, K), tie(N, P::Vector, a, K), tie(L, neg_inv_a, K),
                       tie(M, P::Scalar, neg_alpha_inv_a, K), tie(M, P::Vector, neg, K)}));

    // One free vector: m.
    t_.push_back(make(FamilyTag::M1, {M}, {zero(K), zero(N), zero(L)}));
    t_.push_back(make(FamilyTag::M2, {M}, {tie(K, one, M), zero(N), zero(L)}));
    t_.push_back(make(FamilyTag::M3, {M}, {zero(K), zero(N), tie(L, d, M)}));
    t_.push_back(make(FamilyTag::M4, {M}, {zero(K), tie(N, a, M), zero(L)}));
    t_.push_back(make(FamilyTag::M5, {M},
                      {tie(K, P::Scalar, at, M), tie(K, P::Vector, neg, M), tie(N, a, M),
                       tie(L, P::Scalar, t, M), tie(L, P::Vector, neg_inv_a, M)}));
    t_.push_back(make(FamilyTag::M6, {M},
                      {tie(K, P::Scalar, neg_alpha_inv_a, M), tie(K, P::Vector, neg, M),
                       tie(N, P::Scalar, alpha, M), tie(N, P::Vector, a, M), tie(L, neg_inv_a, M)}));
    t_.push_back(make(FamilyTag::M7, {M}, {tie(K, ad, M), tie(N, a, M), tie(L, d, M)}));

    // One free vector: n.
    t_.push_back(make(FamilyTag::N1, {N}, {tie(K, a, N), zero(L), zero(M)}));
    t_.push_back(make(FamilyTag::N2, {N}, {tie(K, a, N), tie(L, a2, N), tie(M, a, N)}));
    t_.push_back(make(FamilyTag::N3, {N},
                      {tie(K, P::Scalar, alpha, N), tie(K, P::Vector, a, N), tie(L, P::Scalar, neg_alpha_a, N),
                       tie(L, P::Vector, neg_a2, N), tie(M, neg_a, N)}));
    t_.push_back(make(FamilyTag::N4, {N},
                      {tie(K, a, N), tie(L, P::Scalar, beta_a, N), tie(L, P::Vector, neg_a2, N),
                       tie(M, P::Scalar, beta, N), tie(M, P::Vector, neg_a, N)}));

    // One free vector: l.
    t_.push_back(make(FamilyTag::L1, {L}, {tie(K, a, L), zero(N), zero(M)}));
    t_.push_back(make(FamilyTag::L2, {L}, {tie(K, a, L), tie(N, a2, L), tie(M, a, L)}));
    t_.push_back(make(FamilyTag::L3, {L},
                      {tie(K, P::Scalar, alpha, L), tie(K, P::Vector, a, L), tie(N, P::Scalar, neg_alpha_a, L),
                       tie(N, P::Vector, neg_a2, L), tie(M, neg_a, L)}));
    t_.push_back(make(FamilyTag::L4, {L},
                      {tie(K, a, L), tie(N, P::Scalar, beta_a, L), tie(N, P::Vector, neg_a2, L),
                       tie(M, P::Scalar, beta, L), tie(M, P::Vector, neg_a, L)}));

    // Two free vectors.
    const std::initializer_list<Source> k_minus_m{{K, 1.0}, {M, -1.0}};
    const std::initializer_list<Source> m_minus_k{{M, 1.0}, {K, -1.0}};
    t_.push_back(make(FamilyTag::KM1, {K, M}, {zero(N), zero(L)}));
    t_.push_back(make(FamilyTag::KM2, {K, M}, {zero(N), {L, P::Both, {term(d, m_minus_k)}}}));
    t_.push_back(make(FamilyTag::KM3, {K, M}, {tie(N, b, M), tie(L, inv_b, K)}));
    t_.push_back(make(FamilyTag::KM4, {K, M}, {{N, P::Both, {term(a, k_minus_m)}}, zero(L)}));
    t_.push_back(make(FamilyTag::KM5, {K, M}, {{N, P::Both, {term(a, k_minus_m)}}, {L, P::Both, {term(c, k_minus_m)}}}));
    t_.push_back(make(FamilyTag::LN1, {L, N}, {tie(K, a, L), tie(M, inv_a, N)}));
    t_.push_back(make(FamilyTag::LN2, {L, N}, {tie(K, b, N), tie(M, inv_b, L)}));
    t_.push_back(make(FamilyTag::KN1, {K, N}, {tie(L, a, K), tie(M, a, N)}));
    t_.push_back(make(FamilyTag::KN2, {K, N}, {zero(L), tie(M, one, K)}));
    t_.push_back(make(FamilyTag::ML1, {M, L}, {tie(K, a, L), tie(N, a, M)}));
    t_.push_back(make(FamilyTag::ML2, {M, L}, {tie(K, one, M), zero(N)}));

    // Three free vectors.
    t_.push_back(make(FamilyTag::KMN1, {K, M, N}, {zero(L)}));
    t_.push_back(make(FamilyTag::KMN2, {K, M, N}, {{L, P::Both, {term(one, {{K, -1.0}, {M, 1.0}, {N, 1.0}})}}}));
    t_.push_back(make(FamilyTag::KML1, {K, M, L}, {zero(N)}));
    t_.push_back(make(FamilyTag::KML2, {K, M, L}, {{N, P::Both, {term(one, {{K, 1.0}, {L, 1.0}, {M, -1.0}})}}}));
    t_.push_back(make(FamilyTag::NLK1, {N, L, K}, {{M, P::Both, {term(one, K), term(a, N), term(neg_inv_a, L)}}}));
    t_.push_back(make(FamilyTag::NLM1, {N, L, M}, {{K, P::Both, {term(one, M), term(a, L), term(neg_inv_a, N)}}}));

    return t_;
}

const std::vector<ConstraintDescriptor>& table()
{
    static const std::vector<ConstraintDescriptor> t = build_table();
    return t;
}

// ---------------------------------------------------------------------------
// Rule evaluation

std::span<const int> part_components(Part part)
{
    static constexpr int scalar[] = {0};
    static constexpr int vector[] = {1, 2, 3};
    static constexpr int both[] = {0, 1, 2, 3};
    switch (part) {
    case Part::Scalar: return scalar;
    case Part::Vector: return vector;
    case Part::Both: break;
    }
    return both;
}

Complexd source_value(const Term& t, const ParamSetd& p, int comp)
{
    Complexd s = 0;
    for (const Source& src : t.sources)
        s += src.weight * p[src.vec][comp];
    return s;
}

Complexd rule_value(const Rule& r, const FamilyConstants& constants, const ParamSetd& p, int comp)
{
    Complexd v = 0;
    for (const Term& t : r.terms)
        v += t.coef.evaluate(constants) * source_value(t, p, comp);
    return v;
}

void require_constants(const ConstraintDescriptor& d, const FamilyConstants& constants)
{
    for (Constant c : d.constants) {
        if (!constants.has(c)) {
            throw Error(ErrorCode::MissingConstant, std::string(family_name(d.tag)) + " requires constant "
                                                        + std::string(constant_name(c)));
        }
    }
    for (Constant c : d.inverted_constants()) {
        if (*constants.get(c) == Complexd(0)) {
            throw Error(ErrorCode::ZeroConstantRequiringInverse, std::string(family_name(d.tag)) + " inverts "
                                                                     + std::string(constant_name(c))
                                                                     + ", which must be nonzero");
        }
    }
}

// ---------------------------------------------------------------------------
// Constant recovery

enum class Status { Unknown, Known, Indeterminate };

struct Recovery {
    const ConstraintDescriptor& d;
    const ParamSetd& p;
    FamilyConstants values;
    std::array<Status, kConstantCount> status{};
    double threshold = 0;

    Status& state(Constant c) { return status[static_cast<std::size_t>(c)]; }

    bool known(const Monomial& m, Constant except) const
    {
        for (int i = 0; i < kConstantCount; ++i) {
            const auto c = static_cast<Constant>(i);
            if (c != except && m.involves(c) && status[static_cast<std::size_t>(i)] == Status::Unknown)
                return false;
        }
        return true;
    }

    // Coefficient with constant c stripped out; the rest must be known.
    Complexd stripped(const Monomial& m, Constant c) const
    {
        Monomial copy = m;
        copy.powers[static_cast<std::size_t>(c)] = 0;
        return copy.evaluate(values);
    }

    void mark_indeterminate()
    {
        for (Constant c : d.constants) {
            double weight = 0;
            for (const Rule& r : d.rules)
                for (const Term& t : r.terms)
                    if (t.coef.involves(c))
                        for (int comp : part_components(r.part))
                            weight += std::norm(source_value(t, p, comp));
            if (std::sqrt(weight) < threshold) {
                state(c) = Status::Indeterminate;
                values.set(c, 1.0);
            }
        }
    }

    // Least squares for c^power over every rule where c is the only unknown
    // and occurs in exactly one term with that power.
    // Returns nullopt if no evidence, or +inf magnitude when c^-1 came out 0.
    std::optional<Complexd> linear_estimate(Constant c, int power) const
    {
        Complexd num = 0;
        double den = 0;
        for (const Rule& r : d.rules) {
            const Term* hit = nullptr;
            bool usable = true;
            for (const Term& t : r.terms) {
                if (t.coef.involves(c)) {
                    if (hit != nullptr || t.coef.power(c) != power) {
                        usable = false;
                        break;
                    }
                    hit = &t;
                }
                if (!known(t.coef, c)) {
                    usable = false;
                    break;
                }
            }
            if (!usable || hit == nullptr)
                continue;
            const Complexd scale = stripped(hit->coef, c);
            for (int comp : part_components(r.part)) {
                Complexd rest = p[r.target][comp];
                for (const Term& t : r.terms)
                    if (&t != hit)
                        rest -= t.coef.evaluate(values) * source_value(t, p, comp);
                const Complexd x = scale * source_value(*hit, p, comp);
                num += std::conj(x) * rest;
                den += std::norm(x);
            }
        }
        if (std::sqrt(den) < threshold)
            return std::nullopt;
        return num / den;
    }

    // c appears in one rule as c * a + c^-1 * b (plus known terms).
    std::optional<Complexd> mixed_estimate(Constant c) const
    {
        std::vector<Complexd> lhs, lin, inv;
        for (const Rule& r : d.rules) {
            bool involved = false;
            bool usable = true;
            for (const Term& t : r.terms) {
                if (t.coef.involves(c)) {
                    involved = true;
                    usable &= std::abs(t.coef.power(c)) == 1;
                }
                usable &= known(t.coef, c);
            }
            if (!involved || !usable)
                continue;
            for (int comp : part_components(r.part)) {
                Complexd rest = p[r.target][comp];
                Complexd a = 0, b = 0;
                for (const Term& t : r.terms) {
                    const Complexd s = source_value(t, p, comp);
                    if (!t.coef.involves(c))
                        rest -= t.coef.evaluate(values) * s;
                    else if (t.coef.power(c) == 1)
                        a += stripped(t.coef, c) * s;
                    else
                        b += stripped(t.coef, c) * s;
                }
                lhs.push_back(rest);
                lin.push_back(a);
                inv.push_back(b);
            }
        }
        if (lhs.empty())
            return std::nullopt;

        auto cost = [&](Complexd x) {
            double sum = 0;
            for (std::size_t i = 0; i < lhs.size(); ++i)
                sum += std::norm(lhs[i] - x * lin[i] - inv[i] / x);
            return sum;
        };

        // Each component gives a x^2 - rest x + b = 0.
        std::vector<Complexd> candidates;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            if (std::abs(lin[i]) > threshold) {
                const Complexd disc = std::sqrt(lhs[i] * lhs[i] - 4.0 * lin[i] * inv[i]);
                candidates.push_back((lhs[i] + disc) / (2.0 * lin[i]));
                candidates.push_back((lhs[i] - disc) / (2.0 * lin[i]));
            } else if (std::abs(lhs[i]) > threshold) {
                candidates.push_back(inv[i] / lhs[i]);
            }
        }
        std::optional<Complexd> best;
        double best_cost = std::numeric_limits<double>::infinity();
        for (Complexd x : candidates) {
            if (!std::isfinite(std::abs(x)) || std::abs(x) == 0)
                continue;
            const double f = cost(x);
            if (f < best_cost) {
                best_cost = f;
                best = x;
            }
        }
        if (!best)
            return std::nullopt;

        // Gauss-Newton polish of the least-squares fit.
        Complexd x = *best;
        for (int iter = 0; iter < 50; ++iter) {
            Complexd num = 0;
            double den = 0;
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                const Complexd r = lhs[i] - x * lin[i] - inv[i] / x;
                const Complexd jac = -lin[i] + inv[i] / (x * x);
                num += std::conj(jac) * r;
                den += std::norm(jac);
            }
            if (den == 0)
                break;
            const Complexd step = -num / den;
            const Complexd next = x + step;
            if (next == Complexd(0) || cost(next) > cost(x))
                break;
            x = next;
            if (std::abs(step) <= 1e-16 * std::abs(x))
                break;
        }
        return x;
    }

    // false when a constant is forced to infinity
    bool run()
    {
        mark_indeterminate();
        for (;;) {
            bool progress = false;
            bool pending = false;
            for (Constant c : d.constants) {
                if (state(c) != Status::Unknown)
                    continue;
                pending = true;
                for (int power : {1, -1}) {
                    const auto est = linear_estimate(c, power);
                    if (!est)
                        continue;
                    if (power == -1) {
                        if (std::abs(*est) == 0)
                            return false;
                        values.set(c, 1.0 / *est);
                    } else {
                        values.set(c, *est);
                    }
                    state(c) = Status::Known;
                    progress = true;
                    break;
                }
            }
            if (!pending)
                return true;
            if (progress)
                continue;
            for (Constant c : d.constants) {
                if (state(c) != Status::Unknown)
                    continue;
                if (const auto est = mixed_estimate(c)) {
                    values.set(c, *est);
                    state(c) = Status::Known;
                    progress = true;
                }
            }
            if (progress)
                continue;
            for (Constant c : d.constants) {
                if (state(c) == Status::Unknown) {
                    state(c) = Status::Indeterminate;
                    values.set(c, 1.0);
                }
            }
            return true;
        }
    }
};

// ---------------------------------------------------------------------------
// Rank-1 restriction helpers

Complexd principal_root_for(const CVec4d& c) { return std::sqrt(bdot(c.v, c.v)); }

// det = 0 through the scalar part, staying real for real-conditioned bases.
CVec4d root_restrict(CVec4d c)
{
    const Complexd vv = bdot(c.v, c.v);
    ParamSetd probe;
    probe.k = c;
    const bool real_base = is_real_conditions(probe, 1e-12);
    if (real_base && vv.real() < 0) {
        // A real block needs c0^2 = v.v >= 0; drop the imaginary component.
        c.v(1) = 0;
        c.c0 = std::sqrt(std::max(0.0, (c.v(0) * c.v(0) + c.v(2) * c.v(2)).real()));
        return c;
    }
    c.c0 = principal_root_for(c);
    if (real_base)
        c.c0 = c.c0.real();
    return c;
}

CVec4d nilpotent_restrict(CVec4d c)
{
    c.c0 = 0;
    c.v(1) = Complexd(0, 1) * std::sqrt(c.v(0) * c.v(0) + c.v(2) * c.v(2));
    return c;
}

bool is_zero(const CVec4d& c) { return c.c0 == Complexd(0) && c.v.isZero(0); }

} // namespace

// ---------------------------------------------------------------------------

std::span<const FamilyTag> all_families() { return kAllFamilies; }

std::string_view family_name(FamilyTag tag) { return kFamilyNames[static_cast<std::size_t>(tag)]; }

std::optional<FamilyTag> parse_family(std::string_view name)
{
    for (FamilyTag tag : kAllFamilies) {
        const std::string_view canonical = family_name(tag);
        if (name == canonical)
            return tag;
        std::string compact(canonical);
        compact.erase(std::remove(compact.begin(), compact.end(), '-'), compact.end());
        if (name == compact)
            return tag;
    }
    return std::nullopt;
}

std::string_view constant_name(Constant c) { return kConstantNames[static_cast<std::size_t>(c)]; }

std::optional<Constant> parse_constant(std::string_view name)
{
    for (int i = 0; i < kConstantCount; ++i)
        if (kConstantNames[static_cast<std::size_t>(i)] == name)
            return static_cast<Constant>(i);
    return std::nullopt;
}

FamilyConstants::FamilyConstants(std::initializer_list<std::pair<Constant, Complexd>> values)
{
    for (auto [c, v] : values)
        set(c, v);
}

std::vector<std::pair<Constant, Complexd>> FamilyConstants::present() const
{
    std::vector<std::pair<Constant, Complexd>> out;
    for (int i = 0; i < kConstantCount; ++i)
        if (values_[static_cast<std::size_t>(i)])
            out.emplace_back(static_cast<Constant>(i), *values_[static_cast<std::size_t>(i)]);
    return out;
}

Complexd Monomial::evaluate(const FamilyConstants& constants) const
{
    Complexd v = factor;
    for (int i = 0; i < kConstantCount; ++i) {
        const int p = powers[static_cast<std::size_t>(i)];
        if (p == 0)
            continue;
        const Complexd c = constants.get(static_cast<Constant>(i)).value_or(Complexd(1));
        for (int j = 0; j < std::abs(p); ++j)
            v = p > 0 ? v * c : v / c;
    }
    return v;
}

std::vector<Constant> ConstraintDescriptor::inverted_constants() const
{
    std::vector<Constant> out;
    for (Constant c : constants) {
        const bool inverted = std::any_of(rules.begin(), rules.end(), [c](const Rule& r) {
            return std::any_of(r.terms.begin(), r.terms.end(), [c](const Term& t) { return t.coef.power(c) < 0; });
        });
        if (inverted)
            out.push_back(c);
    }
    return out;
}

const ConstraintDescriptor& descriptor(FamilyTag tag) { return table()[static_cast<std::size_t>(tag)]; }

bool covers_all_components(const ConstraintDescriptor& d)
{
    std::array<int, 16> hits{};
    for (Vec w : d.free)
        for (int c = 0; c < 4; ++c)
            ++hits[static_cast<std::size_t>(component_index(w, c))];
    for (const Rule& r : d.rules)
        for (int c : part_components(r.part))
            ++hits[static_cast<std::size_t>(component_index(r.target, c))];
    return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

ParamSetd construct(const ConstraintDescriptor& d, const FamilyConstants& constants, std::span<const CVec4d> base)
{
    require_constants(d, constants);
    if (base.size() != d.free.size()) {
        std::ostringstream msg;
        msg << family_name(d.tag) << " takes " << d.free.size() << " base vector(s), got " << base.size();
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    ParamSetd p;
    for (std::size_t i = 0; i < base.size(); ++i)
        p[d.free[i]] = base[i];
    for (const Rule& r : d.rules)
        for (int comp : part_components(r.part))
            p[r.target][comp] = rule_value(r, constants, p, comp);
    return p;
}

ParamSetd construct(FamilyTag tag, const FamilyConstants& constants, std::span<const CVec4d> base)
{
    return construct(descriptor(tag), constants, base);
}

ParamSetd construct(const FamilyInstance& instance)
{
    return construct(instance.tag, instance.constants, instance.base);
}

double rule_residual(const ConstraintDescriptor& d, const FamilyConstants& constants, const ParamSetd& p)
{
    double sum = 0;
    for (const Rule& r : d.rules)
        for (int comp : part_components(r.part))
            sum += std::norm(p[r.target][comp] - rule_value(r, constants, p, comp));
    return std::sqrt(sum);
}

double relative_rule_residual(const ConstraintDescriptor& d, const FamilyConstants& constants, const ParamSetd& p)
{
    return relative_error(rule_residual(d, constants, p), p.norm());
}

std::optional<Membership> fit_constants(const ConstraintDescriptor& d, const ParamSetd& p)
{
    Recovery rec{d, p, {}, {}, 1e-12 * std::max(p.norm(), kAbsoluteFloor)};
    if (!rec.run())
        return std::nullopt;

    Membership m{d.tag, {}, {}, 0.0};
    for (Constant c : d.constants) {
        if (rec.state(c) == Status::Indeterminate)
            m.indeterminate.push_back(c);
        else
            m.recovered.set(c, *rec.values.get(c));
    }
    m.residual = relative_rule_residual(d, rec.values, p);
    if (!std::isfinite(m.residual))
        return std::nullopt;
    return m;
}

std::optional<Membership> membership(FamilyTag tag, const ParamSetd& p, double tol)
{
    auto fit = fit_constants(descriptor(tag), p);
    if (!fit || fit->residual > tol)
        return std::nullopt;
    return fit;
}

FamilyConstants random_constants(FamilyTag tag, Rng& rng, bool real_mode)
{
    FamilyConstants out;
    for (Constant c : descriptor(tag).constants)
        out.set(c, random_constant(rng, real_mode));
    return out;
}

FamilyInstance random_instance(FamilyTag tag, const FamilyConstants& constants, Rng& rng, bool real_mode)
{
    FamilyInstance inst{tag, constants, {}};
    for (std::size_t i = 0; i < descriptor(tag).free.size(); ++i)
        inst.base.push_back(random_cvec4(rng, real_mode));
    return inst;
}

Rank1Method rank1_method(FamilyTag tag)
{
    switch (tag) {
    case FamilyTag::K1: case FamilyTag::K3: case FamilyTag::K4: case FamilyTag::K5:
    case FamilyTag::M1: case FamilyTag::M3: case FamilyTag::M4: case FamilyTag::M7:
    case FamilyTag::N1: case FamilyTag::N2:
    case FamilyTag::L1: case FamilyTag::L2:
        return Rank1Method::ScalarRoot;
    case FamilyTag::K6: case FamilyTag::K7:
    case FamilyTag::M5: case FamilyTag::M6:
    case FamilyTag::N3: case FamilyTag::N4:
    case FamilyTag::L3: case FamilyTag::L4:
        return Rank1Method::Nilpotent;
    case FamilyTag::KM3: case FamilyTag::LN1: case FamilyTag::KN1: case FamilyTag::ML1:
        return Rank1Method::SharedColumns;
    case FamilyTag::LN2:
        return Rank1Method::SharedRows;
    default:
        return Rank1Method::None;
    }
}

FamilyInstance rank1_restrict(const FamilyInstance& instance)
{
    const Rank1Method method = rank1_method(instance.tag);
    if (method == Rank1Method::None) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(family_name(instance.tag)) + " is not a rank-2 family");
    }
    if (std::all_of(instance.base.begin(), instance.base.end(), is_zero))
        return instance;

    FamilyInstance out = instance;
    switch (method) {
    case Rank1Method::ScalarRoot:
        out.base[0] = root_restrict(out.base[0]);
        break;
    case Rank1Method::Nilpotent:
        out.base[0] = nilpotent_restrict(out.base[0]);
        break;
    case Rank1Method::SharedColumns:
    case Rank1Method::SharedRows: {
        out.base[0] = root_restrict(out.base[0]);
        const Block2d first = block_from_pair(out.base[0]);
        if (first.isZero(0)) {
            out.base[1] = root_restrict(out.base[1]);
            break;
        }
        const Block2d second = block_from_pair(out.base[1]);
        Block2d projected;
        if (method == Rank1Method::SharedColumns) {
            const int col = first.col(0).squaredNorm() >= first.col(1).squaredNorm() ? 0 : 1;
            const Eigen::Vector2cd x = first.col(col);
            projected = x * (x.adjoint() * second) / x.squaredNorm();
        } else {
            const int row = first.row(0).squaredNorm() >= first.row(1).squaredNorm() ? 0 : 1;
            const Eigen::RowVector2cd y = first.row(row);
            projected = (second * y.adjoint()) * y / y.squaredNorm();
        }
        out.base[1] = pair_from_block(projected);
        break;
    }
    case Rank1Method::None:
        break;
    }
    return out;
}

ClosureReport closure_check(FamilyTag tag, const FamilyConstants& constants, int samples, std::uint64_t seed,
                            double tol, const ClosureOptions& options)
{
    if (samples < 1)
        throw Error(ErrorCode::InvalidArgument, "closure_check needs at least one sample");
    const ConstraintDescriptor& truth = descriptor(tag);
    const ConstraintDescriptor& builder = options.construction != nullptr ? *options.construction : truth;
    require_constants(truth, constants);

    ClosureReport report{tag, constants, samples, 0.0, true, true, std::nullopt, std::nullopt};
    Rng rng(seed);
    for (int i = 0; i < samples; ++i) {
        const ParamSetd left = construct(builder, constants, random_instance(tag, constants, rng, options.real_mode).base);
        const ParamSetd right = construct(builder, constants, random_instance(tag, constants, rng, options.real_mode).base);
        const ParamSetd product = compose(left, right);

        const double residual = std::max({relative_rule_residual(truth, constants, left),
                                          relative_rule_residual(truth, constants, right),
                                          relative_rule_residual(truth, constants, product)});
        bool real_ok = true;
        if (options.real_mode) {
            real_ok = is_real_conditions(left, 1e-12) && is_real_conditions(right, 1e-12)
                   && is_real_matrix(assemble(product), 1e-10) && is_real_conditions(product, 1e-10);
            report.real_preserved &= real_ok;
        }
        if (!report.product_fit)
            report.product_fit = fit_constants(truth, product);
        if (residual > report.worst_residual)
            report.worst_residual = residual;
        if ((residual > tol || !real_ok) && !report.counterexample) {
            report.passed = false;
            report.counterexample = std::make_pair(left, right);
        }
    }
    return report;
}

int rank_profile(FamilyTag tag, std::uint64_t seed, bool real_mode, int instances)
{
    Rng rng(seed);
    int rank = 0;
    for (int i = 0; i < instances; ++i) {
        const FamilyConstants constants = random_constants(tag, rng, real_mode);
        const ParamSetd p = construct(random_instance(tag, constants, rng, real_mode));
        rank = std::max(rank, numeric_rank(assemble(p)));
    }
    return rank;
}

RankClaim rank_claim(FamilyTag tag)
{
    switch (tag) {
    // Subgroups named as such.
    case FamilyTag::K2: case FamilyTag::M2: case FamilyTag::KM1: case FamilyTag::KMN1: case FamilyTag::KML1:
        return {4, false};
    // Called groups, but the rows of blocks are proportional.
    case FamilyTag::KN1: case FamilyTag::ML1:
        return {4, true};
    // Called rank-2 semigroups, but each contains the identity.
    case FamilyTag::KN2: case FamilyTag::ML2: case FamilyTag::KMN2: case FamilyTag::KML2:
    case FamilyTag::KM2: case FamilyTag::KM4: case FamilyTag::KM5:
    case FamilyTag::NLK1: case FamilyTag::NLM1:
        return {2, true};
    default:
        return {2, false};
    }
}

ConstraintDescriptor corrupted(const ConstraintDescriptor& d)
{
    ConstraintDescriptor out = d;
    for (Rule& r : out.rules) {
        if (!r.terms.empty()) {
            r.terms.front().coef.factor *= 1.5;
            return out;
        }
    }
    out.rules.front().terms.push_back(Term{mono(0.5), {Source{out.free.front(), 1.0}}});
    return out;
}

} // namespace kmln
