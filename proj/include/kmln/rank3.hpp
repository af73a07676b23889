#pragma once

// Rank-3 semigroups: matrices whose row `row` and column `col` vanish.

#include "kmln/core.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kmln {

struct VariantId {
    int row = 0;
    int col = 0;

    auto operator<=>(const VariantId&) const = default;
};

std::vector<VariantId> all_variants();

/// "00" .. "33"
std::string variant_name(VariantId id);
std::optional<VariantId> parse_variant(std::string_view name);

/// One equation `component[target] = coef * component[source]`; with no
/// source the component is zero.
struct ComponentEquation {
    int target = 0;
    Complexd coef{0.0, 0.0};
    std::optional<int> source;
};

struct VariantConstraints {
    VariantId id;
    std::vector<ComponentEquation> equations;
};

/// The seven equations per variant, as tabulated for the rank-3 displays.
const VariantConstraints& variant_constraints(VariantId id);

/// Component indices (into the flattened ParamVector) left free by the
/// constraints; always nine of them.
std::vector<int> free_components(VariantId id);

/// Max |lhs - rhs| over the equations, relative to |p|.
double constraint_residual(const VariantConstraints& c, const ParamSetd& p);

/// Keeps the free components of `seed` and sets the constrained ones.
ParamSetd construct_variant(VariantId id, const ParamSetd& seed);

/// Largest magnitude in row `id.row` and column `id.col`, relative to |g|.
double zero_pattern_residual(VariantId id, const Mat4d& g);

/// Every (i, j) whose row i and column j vanish within tol * |g|.
std::vector<VariantId> variant_membership(const Mat4d& g, double tol = kDefaultRankTol);

} // namespace kmln
