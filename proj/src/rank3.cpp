#include "kmln/rank3.hpp"

#include "kmln/error.hpp"

#include <algorithm>
#include <cmath>

namespace kmln {

namespace {

// Compact equation syntax: "k1=0", "k0=-k3", "n1=in2", "l1=-il2".
int parse_component(std::string_view s)
{
    static constexpr std::string_view letters = "kmln";
    const auto vec = static_cast<Vec>(letters.find(s[0]));
    return component_index(vec, s[1] - '0');
}

ComponentEquation parse_equation(std::string_view eq)
{
    const auto eqpos = eq.find('=');
    ComponentEquation out;
    out.target = parse_component(eq.substr(0, eqpos));
    std::string_view rhs = eq.substr(eqpos + 1);
    if (rhs == "0")
        return out;
    Complexd coef = 1.0;
    if (rhs.front() == '-') {
        coef = -coef;
        rhs.remove_prefix(1);
    }
    if (rhs.front() == 'i') {
        coef *= Complexd(0, 1);
        rhs.remove_prefix(1);
    }
    out.coef = coef;
    out.source = parse_component(rhs);
    return out;
}

struct TableRow {
    VariantId id;
    std::array<std::string_view, 7> equations;
};

constexpr std::array<TableRow, 16> kTable{{
    {{0, 0}, {"k1=0", "k2=0", "k0=-k3", "n0=-n3", "l0=-l3", "n1=in2", "l1=-il2"}},
    {{0, 1}, {"k0=0", "k3=0", "k1=ik2", "l1=il2", "l0=l3", "n0=-n3", "n1=in2"}},
    {{0, 2}, {"n1=0", "n2=0", "n0=-n3", "m0=-m3", "m1=-im2", "k0=-k3", "k1=ik2"}},
    {{0, 3}, {"n0=0", "n3=0", "n1=in2", "m0=m3", "m1=im2", "k0=-k3", "k1=ik2"}},
    {{1, 0}, {"k0=0", "k3=0", "k1=-ik2", "l0=-l3", "l1=-il2", "n1=-in2", "n0=n3"}},
    {{1, 1}, {"k1=0", "k2=0", "k0=k3", "l0=l3", "l1=il2", "n1=-in2", "n0=n3"}},
    {{1, 2}, {"n0=0", "n3=0", "n1=-in2", "m0=-m3", "m1=-im2", "k1=-ik2", "k0=k3"}},
    {{1, 3}, {"n1=0", "n2=0", "n0=n3", "m0=m3", "m1=im2", "k1=-ik2", "k0=k3"}},
    {{2, 0}, {"l1=0", "l2=0", "l0=-l3", "m0=-m3", "m1=im2", "k1=-ik2", "k0=-k3"}},
    {{2, 1}, {"l0=0", "l3=0", "l1=il2", "m0=-m3", "m1=im2", "k1=ik2", "k0=k3"}},
    {{2, 2}, {"m1=0", "m2=0", "m0=-m3", "n0=-n3", "n1=-in2", "l1=il2", "l0=-l3"}},
    {{2, 3}, {"m0=0", "m3=0", "m1=im2", "n0=n3", "n1=in2", "l1=il2", "l0=-l3"}},
    {{3, 0}, {"l0=0", "l3=0", "l1=-il2", "k0=-k3", "k1=-ik2", "m1=-im2", "m0=m3"}},
    {{3, 1}, {"l1=0", "l2=0", "l0=l3", "k0=k3", "k1=ik2", "m1=-im2", "m0=m3"}},
    {{3, 2}, {"m0=0", "m3=0", "m1=-im2", "l0=l3", "l1=-il2", "n1=-in2", "n0=-n3"}},
    {{3, 3}, {"m1=0", "m2=0", "m0=m3", "l0=l3", "l1=-il2", "n1=in2", "n0=n3"}},
}};

std::array<VariantConstraints, 16> build()
{
    std::array<VariantConstraints, 16> out;
    for (std::size_t i = 0; i < kTable.size(); ++i) {
        out[i].id = kTable[i].id;
        for (std::string_view eq : kTable[i].equations)
            out[i].equations.push_back(parse_equation(eq));
    }
    return out;
}

void check_id(VariantId id)
{
    if (id.row < 0 || id.row > 3 || id.col < 0 || id.col > 3)
        throw Error(ErrorCode::InvalidArgument, "variant indices must lie in 0..3");
}

} // namespace

std::vector<VariantId> all_variants()
{
    std::vector<VariantId> ids;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            ids.push_back({r, c});
    return ids;
}

std::string variant_name(VariantId id)
{
    return {static_cast<char>('0' + id.row), static_cast<char>('0' + id.col)};
}

std::optional<VariantId> parse_variant(std::string_view name)
{
    if (name.size() != 2 || name[0] < '0' || name[0] > '3' || name[1] < '0' || name[1] > '3')
        return std::nullopt;
    return VariantId{name[0] - '0', name[1] - '0'};
}

const VariantConstraints& variant_constraints(VariantId id)
{
    check_id(id);
    static const std::array<VariantConstraints, 16> table = build();
    return table[static_cast<std::size_t>(id.row * 4 + id.col)];
}

std::vector<int> free_components(VariantId id)
{
    const auto& eqs = variant_constraints(id).equations;
    std::vector<int> out;
    for (int i = 0; i < 16; ++i)
        if (std::none_of(eqs.begin(), eqs.end(), [i](const ComponentEquation& e) { return e.target == i; }))
            out.push_back(i);
    return out;
}

double constraint_residual(const VariantConstraints& c, const ParamSetd& p)
{
    const ParamVectord x = to_vector(p);
    double worst = 0;
    for (const ComponentEquation& e : c.equations) {
        const Complexd rhs = e.source ? e.coef * x(*e.source) : Complexd(0);
        worst = std::max(worst, std::abs(x(e.target) - rhs));
    }
    return relative_error(worst, p.norm());
}

ParamSetd construct_variant(VariantId id, const ParamSetd& seed)
{
    // Targets never appear as sources, so one pass suffices.
    ParamVectord x = to_vector(seed);
    for (const ComponentEquation& e : variant_constraints(id).equations)
        x(e.target) = e.source ? e.coef * x(*e.source) : Complexd(0);
    return from_vector(x);
}

double zero_pattern_residual(VariantId id, const Mat4d& g)
{
    check_id(id);
    const double worst = std::max(g.row(id.row).cwiseAbs().maxCoeff(), g.col(id.col).cwiseAbs().maxCoeff());
    return relative_error(worst, g.norm());
}

std::vector<VariantId> variant_membership(const Mat4d& g, double tol)
{
    const double bound = std::max(tol * g.norm(), kAbsoluteFloor);
    std::vector<VariantId> out;
    for (VariantId id : all_variants()) {
        if (g.row(id.row).cwiseAbs().maxCoeff() <= bound && g.col(id.col).cwiseAbs().maxCoeff() <= bound)
            out.push_back(id);
    }
    return out;
}

} // namespace kmln
