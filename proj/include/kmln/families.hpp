#pragma once

// Linear families of 4x4 matrices obtained by tying some of (k, m, l, n) to
// the others. Each family is a table of rules `target = sum coef * sources`,
// applied separately to the scalar and vector parts where their coefficients
// differ.

#include "kmln/core.hpp"
#include "kmln/error.hpp"
#include "kmln/sampling.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kmln {

enum class FamilyTag : int {
    K1, K2, K3, K4, K5, K6, K7,
    M1, M2, M3, M4, M5, M6, M7,
    N1, N2, N3, N4,
    L1, L2, L3, L4,
    KM1, KM2, KM3, KM4, KM5,
    LN1, LN2,
    KN1, KN2,
    ML1, ML2,
    KMN1, KMN2,
    KML1, KML2,
    NLK1, NLM1,
};

inline constexpr int kFamilyCount = 39;

std::span<const FamilyTag> all_families();

/// "K-1", "KMN-2", ...
std::string_view family_name(FamilyTag tag);

/// Accepts "K-5" as well as "K5".
std::optional<FamilyTag> parse_family(std::string_view name);

enum class Constant : int { A, B, C, D, Alpha, Beta, S, T };

inline constexpr int kConstantCount = 8;

std::string_view constant_name(Constant c);
std::optional<Constant> parse_constant(std::string_view name);

class FamilyConstants {
public:
    FamilyConstants() = default;
    FamilyConstants(std::initializer_list<std::pair<Constant, Complexd>> values);

    bool has(Constant c) const { return values_[index(c)].has_value(); }
    const std::optional<Complexd>& get(Constant c) const { return values_[index(c)]; }
    void set(Constant c, Complexd value) { values_[index(c)] = value; }
    void clear(Constant c) { values_[index(c)].reset(); }

    /// Constants that are present, in enumeration order.
    std::vector<std::pair<Constant, Complexd>> present() const;

    bool operator==(const FamilyConstants&) const = default;

private:
    static std::size_t index(Constant c) { return static_cast<std::size_t>(c); }
    std::array<std::optional<Complexd>, kConstantCount> values_{};
};

enum class Part { Scalar, Vector, Both };

/// factor * prod(constant^power)
struct Monomial {
    Complexd factor{1.0, 0.0};
    std::array<std::int8_t, kConstantCount> powers{};

    int power(Constant c) const { return powers[static_cast<std::size_t>(c)]; }
    bool involves(Constant c) const { return power(c) != 0; }
    Complexd evaluate(const FamilyConstants& constants) const;
};

struct Source {
    Vec vec;
    double weight = 1.0;
};

/// coef * (sum of weight * source vector)
struct Term {
    Monomial coef;
    std::vector<Source> sources;
};

/// The `part` of `target` equals the sum of the terms; no terms means zero.
struct Rule {
    Vec target;
    Part part;
    std::vector<Term> terms;
};

struct ConstraintDescriptor {
    FamilyTag tag;
    std::vector<Vec> free;            // base vectors, in the order construct() expects them
    std::vector<Constant> constants;  // constants the rules mention
    std::vector<Rule> rules;

    /// Constants that appear with a negative power somewhere.
    std::vector<Constant> inverted_constants() const;
};

const ConstraintDescriptor& descriptor(FamilyTag tag);

/// Every (vector, part) slot of a ParamSet is either free or the target of
/// exactly one rule.
bool covers_all_components(const ConstraintDescriptor& d);

struct FamilyInstance {
    FamilyTag tag;
    FamilyConstants constants;
    std::vector<CVec4d> base;
};

/// Evaluates the rules. Throws Error(MissingConstant) or
/// Error(ZeroConstantRequiringInverse), and Error(InvalidArgument) when the
/// base count does not match the family.
ParamSetd construct(const ConstraintDescriptor& d, const FamilyConstants& constants, std::span<const CVec4d> base);
ParamSetd construct(FamilyTag tag, const FamilyConstants& constants, std::span<const CVec4d> base);
ParamSetd construct(const FamilyInstance& instance);

/// Absolute rule residual of p with the given (complete) constants.
double rule_residual(const ConstraintDescriptor& d, const FamilyConstants& constants, const ParamSetd& p);

/// rule_residual relative to |p|.
double relative_rule_residual(const ConstraintDescriptor& d, const FamilyConstants& constants, const ParamSetd& p);

struct Membership {
    FamilyTag tag;
    FamilyConstants recovered;           // indeterminate constants are absent
    std::vector<Constant> indeterminate;
    double residual = 0.0;               // relative to |p|
};

/// Recovers the constants from p by least squares and reports membership if
/// the relative rule residual is within tol.
std::optional<Membership> membership(FamilyTag tag, const ParamSetd& p, double tol = kDefaultRankTol);

/// Recovered constants and relative residual without the tolerance cut;
/// nullopt when a recovered constant would be infinite.
std::optional<Membership> fit_constants(const ConstraintDescriptor& d, const ParamSetd& p);

FamilyConstants random_constants(FamilyTag tag, Rng& rng, bool real_mode = false);
FamilyInstance random_instance(FamilyTag tag, const FamilyConstants& constants, Rng& rng, bool real_mode = false);

/// How a rank-2 family is brought down to rank 1.
enum class Rank1Method {
    None,           // not a rank-2 family
    ScalarRoot,     // all blocks proportional to the base block: c0 = sqrt(v.v)
    Nilpotent,      // scalar and vector coefficients differ: c0 = 0 and v.v = 0
    SharedColumns,  // two bases: both rank 1 with a common column space
    SharedRows,     // two bases: both rank 1 with a common row space
};

Rank1Method rank1_method(FamilyTag tag);

/// Returns the instance with its base modified so that every base block has
/// zero determinant and the assembled matrix has rank <= 1. An all-zero base
/// is returned unchanged. Throws Error(InvalidArgument) for tags that are not
/// rank-2 families.
FamilyInstance rank1_restrict(const FamilyInstance& instance);

struct ClosureReport {
    FamilyTag tag;
    FamilyConstants constants;
    int samples = 0;
    double worst_residual = 0.0;
    bool passed = true;
    bool real_preserved = true;                // only checked in real mode
    std::optional<Membership> product_fit;     // recovered constants of the first product
    std::optional<std::pair<ParamSetd, ParamSetd>> counterexample;
};

struct ClosureOptions {
    bool real_mode = false;
    /// Builds the sampled factors with this descriptor instead of the tag's own
    /// one. Used to inject faults.
    const ConstraintDescriptor* construction = nullptr;
};

/// Composes pairs of random members with fixed constants and checks that
/// every factor and product satisfies the family rules with those constants.
ClosureReport closure_check(FamilyTag tag, const FamilyConstants& constants, int samples, std::uint64_t seed,
                            double tol, const ClosureOptions& options = {});

/// Maximum numeric rank over `instances` random members (random constants).
int rank_profile(FamilyTag tag, std::uint64_t seed, bool real_mode = false, int instances = 20);

/// Published rank for each family. `disputed` marks claims that disagree with
/// the generic rank of the family's matrices.
struct RankClaim {
    int rank;
    bool disputed;
};

RankClaim rank_claim(FamilyTag tag);

/// Copy of d with one coefficient perturbed so that members built with it
/// violate d.
ConstraintDescriptor corrupted(const ConstraintDescriptor& d);

} // namespace kmln
