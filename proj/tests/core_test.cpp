#include "kmln/core.hpp"
#include "kmln/sampling.hpp"

#include <gtest/gtest.h>

namespace {

using namespace kmln;

const Complexd I(0, 1);

// Dense 2x2 determinant, written out.
Complexd det2(const Block2d& b) { return b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0); }

// c0 I + sum v_a sigma_a with sigma written out entry by entry.
Block2d block_oracle(const CVec4d& c)
{
    Block2d s1, s2, s3;
    s1 << 0, 1, 1, 0;
    s2 << 0, -I, I, 0;
    s3 << 1, 0, 0, -1;
    return c.c0 * Block2d::Identity() + c.v(0) * s1 + c.v(1) * s2 + c.v(2) * s3;
}

Mat4d assemble_oracle(const ParamSetd& p)
{
    Mat4d g;
    g << block_oracle(p.k), block_oracle(p.n), block_oracle(p.l), block_oracle(p.m);
    return g;
}

TEST(Pauli, Algebra)
{
    for (int a = 1; a <= 3; ++a) {
        EXPECT_TRUE((pauli(a) * pauli(a)).isApprox(Block2d::Identity()));
        EXPECT_TRUE(pauli(a).isApprox(pauli(a).adjoint()));
        EXPECT_EQ(pauli(a).trace(), Complexd(0));
    }
    EXPECT_TRUE((pauli(1) * pauli(2)).isApprox(I * pauli(3)));
    EXPECT_TRUE((pauli(2) * pauli(3)).isApprox(I * pauli(1)));
    EXPECT_TRUE((pauli(3) * pauli(1)).isApprox(I * pauli(2)));
    EXPECT_TRUE(pauli(0).isApprox(Block2d::Identity()));
}

TEST(Blocks, Examples)
{
    const Block2d id = block_from_pair(CVec4d(1, 0, 0, 0));
    EXPECT_EQ(id, Block2d::Identity());

    Block2d expected;
    expected << 0, 1, 1, 0;
    EXPECT_EQ(block_from_pair(CVec4d(0, 1, 0, 0)), expected);

    expected << 3, 1.0 - 2.0 * I, 1.0 + 2.0 * I, -1;
    EXPECT_TRUE(block_from_pair(CVec4d(1, 1, 2, 2)).isApprox(expected));
}

TEST(Blocks, MatchesPauliSum)
{
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const CVec4d c = random_cvec4(rng);
        EXPECT_LT((block_from_pair(c) - block_oracle(c)).norm(), 1e-15);
        const CVec4d back = pair_from_block(block_oracle(c));
        EXPECT_LT((back - c).squaredNorm(), 1e-28);
    }
}

TEST(Assemble, MatchesOracleAndRoundTrips)
{
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const ParamSetd p = random_params(rng);
        const Mat4d g = assemble(p);
        EXPECT_LT((g - assemble_oracle(p)).norm(), 1e-14 * g.norm());
        const ParamVectord diff = to_vector(disassemble(g)) - to_vector(p);
        EXPECT_LT(diff.norm(), 1e-14 * p.norm());
    }
}

TEST(Assemble, MatrixRoundTrip)
{
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Mat4d g = random_matrix(rng);
        EXPECT_LT((assemble(disassemble(g)) - g).norm(), 1e-14 * g.norm());
    }
}

TEST(Assemble, FirstRowAndColumnZero)
{
    // Only k0 sits in the (0,0) corner of K's block pattern after k1 = k2 = 0, k0 = -k3.
    Mat4d g = Mat4d::Zero();
    g(1, 1) = 2.0;
    const ParamSetd p = disassemble(g);
    EXPECT_EQ(p.k.v(0), Complexd(0));
    EXPECT_EQ(p.k.v(1), Complexd(0));
    EXPECT_EQ(p.k.c0, -p.k.v(2));
}

TEST(Compose, MatchesDenseProduct)
{
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const ParamSetd a = random_params(rng);
        const ParamSetd b = random_params(rng);
        const Mat4d dense = assemble_oracle(a) * assemble_oracle(b);
        const Mat4d via = assemble(compose(a, b));
        EXPECT_LT((via - dense).norm(), 1e-10 * std::max(dense.norm(), 1.0));
    }
}

TEST(Compose, MatchesBlockProducts)
{
    // Block route: K'' = K'K + N'L etc., with blocks formed from the oracle.
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const ParamSetd a = random_params(rng);
        const ParamSetd b = random_params(rng);
        const ParamSetd c = compose(a, b);
        const auto blk = [](const CVec4d& x) { return block_oracle(x); };
        EXPECT_LT((blk(c.k) - (blk(a.k) * blk(b.k) + blk(a.n) * blk(b.l))).norm(), 1e-12);
        EXPECT_LT((blk(c.n) - (blk(a.k) * blk(b.n) + blk(a.n) * blk(b.m))).norm(), 1e-12);
        EXPECT_LT((blk(c.l) - (blk(a.l) * blk(b.k) + blk(a.m) * blk(b.l))).norm(), 1e-12);
        EXPECT_LT((blk(c.m) - (blk(a.l) * blk(b.n) + blk(a.m) * blk(b.m))).norm(), 1e-12);
    }
}

TEST(Compose, IdentityAndAssociativity)
{
    Rng rng(6);
    const ParamSetd a = random_params(rng);
    const ParamSetd b = random_params(rng);
    const ParamSetd c = random_params(rng);
    EXPECT_LT((to_vector(compose(ParamSetd::Identity(), a)) - to_vector(a)).norm(), 1e-15);
    EXPECT_LT((to_vector(compose(a, ParamSetd::Identity())) - to_vector(a)).norm(), 1e-15);
    const ParamVectord lhs = to_vector(compose(compose(a, b), c));
    const ParamVectord rhs = to_vector(compose(a, compose(b, c)));
    EXPECT_LT((lhs - rhs).norm(), 1e-13);
}

TEST(Reality, ClosedUnderComposition)
{
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const ParamSetd a = random_params(rng, true);
        const ParamSetd b = random_params(rng, true);
        ASSERT_TRUE(is_real_conditions(a, 1e-12));
        const ParamSetd c = compose(a, b);
        EXPECT_TRUE(is_real_conditions(c, 1e-10));
        const Mat4d g = assemble(c);
        EXPECT_LE(g.imag().cwiseAbs().maxCoeff(), 1e-10 * g.norm());
    }
}

TEST(Reality, RealMatricesSatisfyConditions)
{
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const Mat4d g = random_matrix(rng, true);
        ASSERT_TRUE(is_real_matrix(g, 0.0));
        EXPECT_TRUE(is_real_conditions(disassemble(g), 1e-14));
    }
}

TEST(Reality, ViolationDetected)
{
    ParamSetd p = ParamSetd::Identity();
    EXPECT_TRUE(is_real_conditions(p, 1e-12));
    EXPECT_TRUE(is_real_matrix(assemble(p), 1e-12));
    p.m.v(1) = 0.5;  // real second component
    EXPECT_FALSE(is_real_conditions(p, 1e-12));
    EXPECT_FALSE(is_real_matrix(assemble(p), 1e-12));
}

TEST(Determinant, MatchesDenseAndMultiplies)
{
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const CVec4d a = random_cvec4(rng);
        const CVec4d b = random_cvec4(rng);
        EXPECT_LT(std::abs(det_block(a) - det2(block_oracle(a))), 1e-14);
        const CVec4d ab = pair_from_block(block_oracle(a) * block_oracle(b));
        EXPECT_LT(std::abs(det_block(ab) - det_block(a) * det_block(b)), 1e-13);
    }
}

TEST(Rank, Examples)
{
    EXPECT_EQ(numeric_rank(Mat4d::Zero().eval()), 0);
    EXPECT_EQ(numeric_rank(Mat4d::Identity().eval()), 4);

    Mat4d g = Mat4d::Zero();
    g(0, 0) = 1;
    g(1, 1) = 1e-12;
    EXPECT_EQ(numeric_rank(g), 1);
    EXPECT_EQ(numeric_rank(g, 1e-13), 2);

    Rng rng(10);
    const Eigen::Matrix<Complexd, 4, 1> u = Eigen::Matrix<Complexd, 4, 1>::Random();
    const Eigen::Matrix<Complexd, 4, 1> w = Eigen::Matrix<Complexd, 4, 1>::Random();
    EXPECT_EQ(numeric_rank((u * w.transpose()).eval()), 1);
    EXPECT_EQ(numeric_rank(random_matrix(rng)), 4);
}

TEST(Rank, RankOneBlockHasZeroDeterminant)
{
    // c0 = sqrt(v.v) makes the block singular.
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        CVec4d c = random_cvec4(rng);
        c.c0 = std::sqrt(bdot(c.v, c.v));
        EXPECT_LT(std::abs(det_block(c)), 1e-14);
        EXPECT_EQ(numeric_rank(block_from_pair(c)), 1);
    }
}

TEST(Templates, LongDoubleAndFloat)
{
    ParamSet<long double> p;
    p.k = CVec4<long double>(1.0L, 0.5L, Complex<long double>(0, 0.25L), -2.0L);
    p.n.v(2) = 3.0L;
    const ParamSet<long double> q = compose(p, p);
    const Mat4<long double> dense = assemble(p) * assemble(p);
    EXPECT_LT((assemble(q) - dense).norm(), 1e-17L);

    ParamSet<float> f = ParamSet<float>::Identity();
    EXPECT_EQ(numeric_rank(assemble(f)), 4);
    EXPECT_TRUE(is_real_conditions(f, 1e-6f));
}

TEST(Params, FlattenOrder)
{
    ParamSetd p;
    p.m.c0 = 7;
    p.n.v(2) = 9;
    const ParamVectord x = to_vector(p);
    EXPECT_EQ(x(component_index(Vec::M, 0)), Complexd(7));
    EXPECT_EQ(x(4), Complexd(7));
    EXPECT_EQ(x(15), Complexd(9));
    EXPECT_EQ(vec_name(Vec::L), 'l');
}

} // namespace
