#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace nimp {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3& v) { return v / norm(v); }

inline Vec3 min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Row-major 3x3 matrix.
struct Mat3 {
    double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }

    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
        Mat3 a;
        a.m[0] = r0.x; a.m[1] = r0.y; a.m[2] = r0.z;
        a.m[3] = r1.x; a.m[4] = r1.y; a.m[5] = r1.z;
        a.m[6] = r2.x; a.m[7] = r2.y; a.m[8] = r2.z;
        return a;
    }

    static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 a;
        a.m[0] = c0.x; a.m[1] = c1.x; a.m[2] = c2.x;
        a.m[3] = c0.y; a.m[4] = c1.y; a.m[5] = c2.y;
        a.m[6] = c0.z; a.m[7] = c1.z; a.m[8] = c2.z;
        return a;
    }

    double operator()(int r, int c) const { return m[3 * r + c]; }
    double& operator()(int r, int c) { return m[3 * r + c]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    // Inverse via adjugate; caller checks det() against its own tolerance first.
    Mat3 inverse() const {
        const double d = det();
        const double inv = 1.0 / d;
        Mat3 r;
        r.m[0] = (m[4] * m[8] - m[5] * m[7]) * inv;
        r.m[1] = (m[2] * m[7] - m[1] * m[8]) * inv;
        r.m[2] = (m[1] * m[5] - m[2] * m[4]) * inv;
        r.m[3] = (m[5] * m[6] - m[3] * m[8]) * inv;
        r.m[4] = (m[0] * m[8] - m[2] * m[6]) * inv;
        r.m[5] = (m[2] * m[3] - m[0] * m[5]) * inv;
        r.m[6] = (m[3] * m[7] - m[4] * m[6]) * inv;
        r.m[7] = (m[1] * m[6] - m[0] * m[7]) * inv;
        r.m[8] = (m[0] * m[4] - m[1] * m[3]) * inv;
        return r;
    }
};

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
            -std::numeric_limits<double>::max()};

    bool empty() const { return lo.x > hi.x; }
    void expand(const Vec3& p) { lo = min(lo, p); hi = max(hi, p); }
    void expand(const Aabb& b) { lo = min(lo, b.lo); hi = max(hi, b.hi); }
    Vec3 extent() const { return hi - lo; }
    double diag() const { return empty() ? 0.0 : norm(hi - lo); }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }
    bool overlaps(const Aabb& b) const {
        return lo.x <= b.hi.x && hi.x >= b.lo.x && lo.y <= b.hi.y && hi.y >= b.lo.y &&
               lo.z <= b.hi.z && hi.z >= b.lo.z;
    }
};

// Clips [t0,t1] of origin + t*dir against the box. Returns false when the
// interval is empty. Handles zero direction components.
inline bool clip_ray_aabb(const Vec3& o, const Vec3& d, const Aabb& box, double& t0, double& t1) {
    for (int a = 0; a < 3; ++a) {
        const double da = d[a], oa = o[a];
        if (da == 0.0) {
            if (oa < box.lo[a] || oa > box.hi[a]) return false;
            continue;
        }
        double ta = (box.lo[a] - oa) / da;
        double tb = (box.hi[a] - oa) / da;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    return true;
}

}  // namespace nimp
