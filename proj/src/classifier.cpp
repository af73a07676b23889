#include "kmln/classifier.hpp"

#include <algorithm>

namespace kmln {

ClassReport classify(const Mat4d& g, double tol)
{
    const ParamSetd p = disassemble(g);

    ClassReport report;
    report.rank = numeric_rank(g, tol);
    report.real_matrix = is_real_matrix(g, tol);
    report.residual_scale = p.norm();
    for (FamilyTag tag : all_families())
        if (auto m = membership(tag, p, tol))
            report.families.push_back(std::move(*m));
    std::stable_sort(report.families.begin(), report.families.end(),
                     [](const Membership& a, const Membership& b) {
                         if (a.residual != b.residual)
                             return a.residual < b.residual;
                         return a.tag < b.tag;
                     });
    report.variants = variant_membership(g, tol);
    return report;
}

} // namespace kmln
