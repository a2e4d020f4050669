#pragma once

// Reference implementations used only by tests. Each one is written directly
// from the defining formula, independently of the library code paths it
// checks: containment via raw determinants, interpolation via explicit corner
// sums, compositing via the front-to-back recurrence, integrals via dense
// quadrature or closed forms.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nimp/vec.hpp"

namespace oracle {

using nimp::Vec3;

inline double det3(const Vec3& a, const Vec3& b, const Vec3& c) {
    return a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) +
           a.z * (b.x * c.y - b.y * c.x);
}

inline double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return det3(b - a, c - a, d - a) / 6.0;
}

// Barycentrics via Cramer's rule on the edge system.
inline std::array<double, 4> tet_barycentric(const Vec3& a, const Vec3& b, const Vec3& c,
                                             const Vec3& d, const Vec3& p) {
    const Vec3 e1 = b - a, e2 = c - a, e3 = d - a, r = p - a;
    const double den = det3(e1, e2, e3);
    const double w1 = det3(r, e2, e3) / den;
    const double w2 = det3(e1, r, e3) / den;
    const double w3 = det3(e1, e2, r) / den;
    return {1.0 - w1 - w2 - w3, w1, w2, w3};
}

// Lowest-index tet containing p, testing every tet. -1 when outside.
inline int brute_force_locate(const std::vector<Vec3>& verts,
                              const std::vector<std::array<int, 4>>& tets, const Vec3& p) {
    for (size_t t = 0; t < tets.size(); ++t) {
        const auto bc = tet_barycentric(verts[tets[t][0]], verts[tets[t][1]], verts[tets[t][2]],
                                        verts[tets[t][3]], p);
        if (bc[0] >= 0.0 && bc[1] >= 0.0 && bc[2] >= 0.0 && bc[3] >= 0.0) {
            return static_cast<int>(t);
        }
    }
    return -1;
}

// 4D multilinear interpolation over the 16 corners of the cell containing u,
// with arbitrary per-corner values supplied by the callback.
inline double quadrilinear(const std::array<double, 4>& u, int res,
                           const std::function<double(const std::array<int, 4>&)>& value) {
    std::array<int, 4> base;
    std::array<double, 4> frac;
    for (int i = 0; i < 4; ++i) {
        double x = u[i] * res;
        int c = static_cast<int>(std::floor(x));
        if (c > res - 1) c = res - 1;
        if (c < 0) c = 0;
        base[i] = c;
        frac[i] = x - c;
    }
    double acc = 0.0;
    for (int corner = 0; corner < 16; ++corner) {
        double w = 1.0;
        std::array<int, 4> idx;
        for (int i = 0; i < 4; ++i) {
            const int bit = (corner >> i) & 1;
            idx[i] = base[i] + bit;
            w *= bit ? frac[i] : 1.0 - frac[i];
        }
        acc += w * value(idx);
    }
    return acc;
}

// Plain fully connected net with rectifier hidden activations and identity
// output, evaluated straight from the weight arrays (row-major W[out][in]).
inline std::vector<double> mlp_forward(const std::vector<int>& sizes,
                                       const std::vector<std::vector<double>>& weights,
                                       const std::vector<std::vector<double>>& biases,
                                       std::vector<double> x) {
    for (size_t layer = 0; layer + 1 < sizes.size(); ++layer) {
        const int n_in = sizes[layer], n_out = sizes[layer + 1];
        std::vector<double> y(n_out);
        for (int o = 0; o < n_out; ++o) {
            double s = biases[layer][o];
            for (int i = 0; i < n_in; ++i) s += weights[layer][o * n_in + i] * x[i];
            y[o] = s;
        }
        if (layer + 2 < sizes.size())
            for (double& v : y) v = v > 0.0 ? v : 0.0;
        x = std::move(y);
    }
    return x;
}

// Front-to-back compositing of (sigma, rgb, step) triples over a background.
struct CompositeResult {
    Vec3 color;
    double transmittance;
};
inline CompositeResult composite(const std::vector<double>& sigma,
                                 const std::vector<Vec3>& rgb, const std::vector<double>& step,
                                 const Vec3& background) {
    double T = 1.0;
    Vec3 c{0, 0, 0};
    for (size_t i = 0; i < sigma.size(); ++i) {
        const double a = 1.0 - std::exp(-sigma[i] * step[i]);
        c += rgb[i] * (T * a);
        T *= 1.0 - a;
    }
    c += background * T;
    return {c, T};
}

// Medium sigma(alpha) = k * exp(g * alpha) along a path of measure M with a
// constant color: radiance has the closed form c*(1 - exp(-tau)) + bg*exp(-tau)
// with tau = integral of sigma over the path.
inline double exp_medium_tau(double k, double g, double measure) {
    if (g == 0.0) return k * measure;
    return measure * k * (std::exp(g) - 1.0) / g;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the Legendre
// polynomial; exact for polynomial integrands of degree <= 2n-1.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

// Central difference d f / d x at h.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
