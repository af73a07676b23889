#pragma once

#include "kmln/core.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace kmln {

using Rng = std::mt19937_64;

/// Deterministic child seed for a named sub-task of a seeded run.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

/// Uniform on the square [-1, 1] x [-1, 1] of the complex plane.
Complexd random_complex(Rng& rng);

/// Random CVec4. In real mode the second vector component is purely
/// imaginary and the rest are real, so that blocks come out real.
CVec4d random_cvec4(Rng& rng, bool real_mode = false);

ParamSetd random_params(Rng& rng, bool real_mode = false);

/// Magnitude uniform in [lo, hi]; uniform phase, or a random sign in real mode.
Complexd random_constant(Rng& rng, bool real_mode = false, double lo = 0.5, double hi = 2.0);

/// Dense 4x4 with entries uniform on the unit complex square (real if asked).
Mat4d random_matrix(Rng& rng, bool real_mode = false);

} // namespace kmln
