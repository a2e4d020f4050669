#pragma once

#include "nimp/vec.hpp"

namespace nimp {

// Real orthonormal spherical harmonics of the unit direction, bands
// l = 0..degree-1 in (l, m) order, m from -l to l: degree^2 values total.
// The Condon-Shortley sign is omitted. degree must be in [1, 4] and dir unit
// length within 1e-9.
void sh_encode(const Vec3& dir, int degree, double* out);

inline int sh_dim(int degree) { return degree * degree; }

}  // namespace nimp
