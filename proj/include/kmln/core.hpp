#pragma once

// Four-vector (k, m, l, n) coordinates of 4x4 complex matrices.
//
//        | k0 + k.sigma   n0 + n.sigma |   | K  N |
//    G = |                             | = |      |
//        | l0 + l.sigma   m0 + m.sigma |   | L  M |
//
// Everything here is templated on the real scalar type and header-only.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>

namespace kmln {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using Vector3 = Eigen::Matrix<Complex<Real>, 3, 1>;

template <typename Real>
using Block2 = Eigen::Matrix<Complex<Real>, 2, 2>;

template <typename Real>
using Mat4 = Eigen::Matrix<Complex<Real>, 4, 4>;

/// The 16 parameters flattened in (k, m, l, n) order, four components each.
template <typename Real>
using ParamVector = Eigen::Matrix<Complex<Real>, 16, 1>;

/// Smallest magnitude any relative tolerance is scaled against.
inline constexpr double kAbsoluteFloor = 1e-14;

inline constexpr double kDefaultRankTol = 1e-9;

/// Which of the four parameter vectors.
enum class Vec : int { K = 0, M = 1, L = 2, N = 3 };

inline constexpr std::array<Vec, 4> kAllVecs{Vec::K, Vec::M, Vec::L, Vec::N};

constexpr char vec_name(Vec v)
{
    constexpr char names[] = {'k', 'm', 'l', 'n'};
    return names[static_cast<int>(v)];
}

/// Index of component `c` (0..3) of vector `v` in the flattened ParamVector.
constexpr int component_index(Vec v, int c) { return static_cast<int>(v) * 4 + c; }

/// One of k, m, l, n: scalar part c0 and the vector part contracted with sigma.
template <typename Real = double>
struct CVec4 {
    Complex<Real> c0{};
    Vector3<Real> v = Vector3<Real>::Zero();

    CVec4() = default;
    CVec4(Complex<Real> scalar, Vector3<Real> vector) : c0(scalar), v(std::move(vector)) {}
    CVec4(Complex<Real> a0, Complex<Real> a1, Complex<Real> a2, Complex<Real> a3) : c0(a0), v(a1, a2, a3) {}

    static CVec4 Zero() { return {}; }

    /// Component 0..3 with 0 the scalar part.
    Complex<Real> operator[](int i) const { return i == 0 ? c0 : v(i - 1); }
    Complex<Real>& operator[](int i) { return i == 0 ? c0 : v(i - 1); }

    friend CVec4 operator+(const CVec4& a, const CVec4& b) { return {a.c0 + b.c0, a.v + b.v}; }
    friend CVec4 operator-(const CVec4& a, const CVec4& b) { return {a.c0 - b.c0, a.v - b.v}; }
    friend CVec4 operator*(Complex<Real> s, const CVec4& a) { return {s * a.c0, s * a.v}; }

    Real squaredNorm() const { return std::norm(c0) + v.squaredNorm(); }
};

/// The full coordinate (k, m, l, n) of a 4x4 matrix.
template <typename Real = double>
struct ParamSet {
    CVec4<Real> k, m, l, n;

    static ParamSet Zero() { return {}; }

    static ParamSet Identity()
    {
        ParamSet p;
        p.k.c0 = 1;
        p.m.c0 = 1;
        return p;
    }

    const CVec4<Real>& operator[](Vec which) const
    {
        switch (which) {
        case Vec::K: return k;
        case Vec::M: return m;
        case Vec::L: return l;
        case Vec::N: break;
        }
        return n;
    }
    CVec4<Real>& operator[](Vec which) { return const_cast<CVec4<Real>&>(std::as_const(*this)[which]); }

    friend ParamSet operator*(Complex<Real> s, const ParamSet& p) { return {s * p.k, s * p.m, s * p.l, s * p.n}; }

    Real norm() const { return std::sqrt(k.squaredNorm() + m.squaredNorm() + l.squaredNorm() + n.squaredNorm()); }
};

template <typename Real>
ParamVector<Real> to_vector(const ParamSet<Real>& p)
{
    ParamVector<Real> out;
    for (Vec w : kAllVecs)
        for (int c = 0; c < 4; ++c)
            out(component_index(w, c)) = p[w][c];
    return out;
}

template <typename Real>
ParamSet<Real> from_vector(const ParamVector<Real>& x)
{
    ParamSet<Real> p;
    for (Vec w : kAllVecs)
        for (int c = 0; c < 4; ++c)
            p[w][c] = x(component_index(w, c));
    return p;
}

/// sigma_1, sigma_2, sigma_3 for a = 1, 2, 3; the 2x2 identity for a = 0.
template <typename Real = double>
Block2<Real> pauli(int a)
{
    using C = Complex<Real>;
    const C i(0, 1);
    Block2<Real> s;
    switch (a) {
    case 1: s << C(0), C(1), C(1), C(0); break;
    case 2: s << C(0), -i, i, C(0); break;
    case 3: s << C(1), C(0), C(0), C(-1); break;
    default: s.setIdentity(); break;
    }
    return s;
}

/// c0 I + v1 sigma_1 + v2 sigma_2 + v3 sigma_3.
template <typename Real>
Block2<Real> block_from_pair(Complex<Real> c0, const Vector3<Real>& v)
{
    const Complex<Real> i(0, 1);
    Block2<Real> b;
    b << c0 + v(2), v(0) - i * v(1),
         v(0) + i * v(1), c0 - v(2);
    return b;
}

template <typename Real>
Block2<Real> block_from_pair(const CVec4<Real>& c)
{
    return block_from_pair(c.c0, c.v);
}

/// Inverse of block_from_pair; exact for any 2x2 matrix.
template <typename Derived>
auto pair_from_block(const Eigen::MatrixBase<Derived>& b)
{
    using C = typename Derived::Scalar;
    using Real = typename C::value_type;
    const C i(0, 1);
    const Real half(0.5);
    return CVec4<Real>(half * (b(0, 0) + b(1, 1)),
                       half * (b(0, 1) + b(1, 0)),
                       half * (b(1, 0) - b(0, 1)) / i,
                       half * (b(0, 0) - b(1, 1)));
}

template <typename Real>
Mat4<Real> assemble(const ParamSet<Real>& p)
{
    Mat4<Real> g;
    g.template topLeftCorner<2, 2>() = block_from_pair(p.k);
    g.template topRightCorner<2, 2>() = block_from_pair(p.n);
    g.template bottomLeftCorner<2, 2>() = block_from_pair(p.l);
    g.template bottomRightCorner<2, 2>() = block_from_pair(p.m);
    return g;
}

template <typename Derived>
auto disassemble(const Eigen::MatrixBase<Derived>& g)
{
    using Real = typename Derived::Scalar::value_type;
    ParamSet<Real> p;
    p.k = pair_from_block(g.template topLeftCorner<2, 2>());
    p.n = pair_from_block(g.template topRightCorner<2, 2>());
    p.l = pair_from_block(g.template bottomLeftCorner<2, 2>());
    p.m = pair_from_block(g.template bottomRightCorner<2, 2>());
    return p;
}

// Bilinear (unconjugated) products; Eigen's dot() conjugates its left operand.
template <typename Real>
Complex<Real> bdot(const Vector3<Real>& a, const Vector3<Real>& b)
{
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

template <typename Real>
Vector3<Real> bcross(const Vector3<Real>& a, const Vector3<Real>& b)
{
    return Vector3<Real>(a(1) * b(2) - a(2) * b(1),
                         a(2) * b(0) - a(0) * b(2),
                         a(0) * b(1) - a(1) * b(0));
}

namespace detail {

// (a0 + a.sigma)(b0 + b.sigma) + (c0 + c.sigma)(d0 + d.sigma) as a CVec4.
template <typename Real>
CVec4<Real> pair_products(const CVec4<Real>& a, const CVec4<Real>& b, const CVec4<Real>& c, const CVec4<Real>& d)
{
    const Complex<Real> i(0, 1);
    CVec4<Real> out;
    out.c0 = a.c0 * b.c0 + bdot(a.v, b.v) + c.c0 * d.c0 + bdot(c.v, d.v);
    out.v = a.c0 * b.v + b.c0 * a.v + i * bcross(a.v, b.v)
          + c.c0 * d.v + d.c0 * c.v + i * bcross(c.v, d.v);
    return out;
}

} // namespace detail

/// Parameters of assemble(left) * assemble(right), computed without forming
/// either matrix.
template <typename Real>
ParamSet<Real> compose(const ParamSet<Real>& left, const ParamSet<Real>& right)
{
    const auto& [k1, m1, l1, n1] = left;
    const auto& [k, m, l, n] = right;
    ParamSet<Real> out;
    out.k = detail::pair_products(k1, k, n1, l);
    out.m = detail::pair_products(m1, m, l1, n);
    out.n = detail::pair_products(k1, n, n1, m);
    out.l = detail::pair_products(l1, k, m1, l);
    return out;
}

/// det(c0 I + v.sigma) = c0^2 - v.v
template <typename Real>
Complex<Real> det_block(const CVec4<Real>& c)
{
    return c.c0 * c.c0 - bdot(c.v, c.v);
}

/// Second components imaginary, all others real, each within tol * |p|
/// (absolute floor kAbsoluteFloor).
template <typename Real>
bool is_real_conditions(const ParamSet<Real>& p, Real tol)
{
    const Real bound = std::max(tol * p.norm(), Real(kAbsoluteFloor));
    for (Vec w : kAllVecs) {
        for (int c = 0; c < 4; ++c) {
            const Complex<Real> z = p[w][c];
            const Real off = c == 2 ? z.real() : z.imag();
            if (std::abs(off) > bound)
                return false;
        }
    }
    return true;
}

template <typename Derived>
bool is_real_matrix(const Eigen::MatrixBase<Derived>& g, typename Derived::Scalar::value_type tol)
{
    using Real = typename Derived::Scalar::value_type;
    const Real bound = std::max(tol * g.norm(), Real(kAbsoluteFloor));
    return g.imag().cwiseAbs().maxCoeff() <= bound;
}

template <typename Derived>
auto singular_values(const Eigen::MatrixBase<Derived>& g)
{
    using M = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
    return Eigen::JacobiSVD<M>(g.eval()).singularValues().eval();
}

/// Number of singular values above tol * sigma_max; the zero matrix has rank 0.
template <typename Derived>
int numeric_rank(const Eigen::MatrixBase<Derived>& g, typename Derived::Scalar::value_type tol = kDefaultRankTol)
{
    const auto s = singular_values(g);
    if (s(0) == 0)
        return 0;
    return static_cast<int>((s.array() > tol * s(0)).count());
}

/// |a - b| / max(scale, floor)
template <typename Real>
Real relative_error(Real abs_error, Real scale)
{
    return abs_error / std::max(scale, Real(kAbsoluteFloor));
}

using Complexd = Complex<double>;
using CVec4d = CVec4<double>;
using ParamSetd = ParamSet<double>;
using Block2d = Block2<double>;
using Mat4d = Mat4<double>;
using ParamVectord = ParamVector<double>;

} // namespace kmln
