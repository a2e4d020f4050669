#include "nimp/sh.hpp"

#include <cmath>

#include "nimp/error.hpp"

namespace nimp {

void sh_encode(const Vec3& dir, int degree, double* out) {
    if (degree < 1 || degree > 4) throw DataError("direction encoding degree must be in [1, 4]");
    if (std::abs(norm(dir) - 1.0) > 1e-9) throw DataError("direction must be unit length");
    const double x = dir.x, y = dir.y, z = dir.z;

    out[0] = 0.28209479177387814;
    if (degree == 1) return;

    out[1] = 0.4886025119029199 * y;
    out[2] = 0.4886025119029199 * z;
    out[3] = 0.4886025119029199 * x;
    if (degree == 2) return;

    const double xx = x * x, yy = y * y, zz = z * z;
    out[4] = 1.0925484305920792 * x * y;
    out[5] = 1.0925484305920792 * y * z;
    out[6] = 0.31539156525252005 * (3.0 * zz - 1.0);
    out[7] = 1.0925484305920792 * x * z;
    out[8] = 0.5462742152960396 * (xx - yy);
    if (degree == 3) return;

    out[9] = 0.5900435899266435 * y * (3.0 * xx - yy);
    out[10] = 2.890611442640554 * x * y * z;
    out[11] = 0.4570457994644658 * y * (5.0 * zz - 1.0);
    out[12] = 0.3731763325901154 * z * (5.0 * zz - 3.0);
    out[13] = 0.4570457994644658 * x * (5.0 * zz - 1.0);
    out[14] = 1.445305721320277 * z * (xx - yy);
    out[15] = 0.5900435899266435 * x * (xx - 3.0 * yy);
}

}  // namespace nimp
