#pragma once

#include "kmln/core.hpp"
#include "kmln/families.hpp"
#include "kmln/rank3.hpp"

#include <vector>

namespace kmln {

struct ClassReport {
    int rank = 0;
    bool real_matrix = false;
    std::vector<Membership> families;  // sorted by residual, then tag order
    std::vector<VariantId> variants;   // sorted by (row, col)
    double residual_scale = 0.0;       // |p|, the norm residuals are relative to
};

/// Numeric rank plus every family and rank-3 variant g belongs to within tol.
ClassReport classify(const Mat4d& g, double tol = kDefaultRankTol);

} // namespace kmln
