#include "kmln/sampling.hpp"

#include <numbers>

namespace kmln {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name)
{
    // FNV-1a over the name, then a splitmix64 finalizer over the mix.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

// std::uniform_real_distribution output is implementation-defined; this
// mapping keeps sampled values identical across standard libraries.
double uniform_unit(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform_unit(rng);
}

} // namespace

Complexd random_complex(Rng& rng)
{
    const double re = uniform(rng, -1.0, 1.0);
    const double im = uniform(rng, -1.0, 1.0);
    return {re, im};
}

CVec4d random_cvec4(Rng& rng, bool real_mode)
{
    CVec4d c;
    for (int i = 0; i < 4; ++i) {
        if (!real_mode)
            c[i] = random_complex(rng);
        else if (i == 2)
            c[i] = Complexd(0.0, uniform(rng, -1.0, 1.0));
        else
            c[i] = Complexd(uniform(rng, -1.0, 1.0), 0.0);
    }
    return c;
}

ParamSetd random_params(Rng& rng, bool real_mode)
{
    ParamSetd p;
    for (Vec w : kAllVecs)
        p[w] = random_cvec4(rng, real_mode);
    return p;
}

Complexd random_constant(Rng& rng, bool real_mode, double lo, double hi)
{
    const double r = uniform(rng, lo, hi);
    if (real_mode)
        return uniform_unit(rng) < 0.5 ? -r : r;
    return std::polar(r, uniform(rng, -std::numbers::pi, std::numbers::pi));
}

Mat4d random_matrix(Rng& rng, bool real_mode)
{
    Mat4d g;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (real_mode)
                g(r, c) = uniform(rng, -1.0, 1.0);
            else
                g(r, c) = random_complex(rng);
        }
    }
    return g;
}

} // namespace kmln
