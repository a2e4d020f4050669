#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nimp/error.hpp"
#include "nimp/rng.hpp"

namespace nimp {

// Fully connected network with rectified hidden layers and a linear output
// layer. Parameters live in per-layer row-major blocks so an optimizer can
// view them in place.
template <typename T>
struct Mlp {
    std::vector<int> sizes;                 // layer widths, input first
    std::vector<std::vector<T>> weights;    // [out x in], row-major
    std::vector<std::vector<T>> biases;     // [out]

    Mlp() = default;
    explicit Mlp(std::vector<int> layer_sizes) : sizes(std::move(layer_sizes)) {
        if (sizes.size() < 2) throw DataError("network needs at least two layers");
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            if (sizes[l] <= 0 || sizes[l + 1] <= 0)
                throw DataError("network layer widths must be positive");
            weights.emplace_back(static_cast<std::size_t>(sizes[l + 1]) * sizes[l], T(0));
            biases.emplace_back(sizes[l + 1], T(0));
        }
    }

    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += weights[l].size() + biases[l].size();
        return n;
    }

    // Uniform init scaled by the incoming width of each layer.
    void init(Rng& rng) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const double range = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
            for (T& w : weights[l]) w = static_cast<T>(rng.uniform(-range, range));
            for (T& b : biases[l]) b = static_cast<T>(rng.uniform(-range, range));
        }
    }

    // Post-activation values per layer, kept for the reverse pass.
    // x[0] is the input, x[l+1] the output of layer l.
    struct Tape {
        std::vector<std::vector<T>> x;
    };

    void forward(const T* in, T* out, Tape& tape) const {
        tape.x.resize(sizes.size());
        tape.x[0].assign(in, in + sizes[0]);
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const int n_in = sizes[l], n_out = sizes[l + 1];
            const bool hidden = l + 1 < weights.size();
            auto& y = tape.x[l + 1];
            y.assign(n_out, T(0));
            const T* x = tape.x[l].data();
            const T* w = weights[l].data();
            for (int o = 0; o < n_out; ++o) {
                T s = biases[l][o];
                const T* row = w + static_cast<std::size_t>(o) * n_in;
                for (int i = 0; i < n_in; ++i) s += row[i] * x[i];
                y[o] = hidden ? (s > T(0) ? s : T(0)) : s;
            }
        }
        const auto& last = tape.x.back();
        for (int o = 0; o < sizes.back(); ++o) out[o] = last[o];
    }

    // Reverse pass for one example. Accumulates parameter gradients into
    // grad_w/grad_b (must match the weight/bias shapes) and, when din is not
    // null, writes d(loss)/d(input) there.
    void backward(const Tape& tape, const T* dout, std::vector<std::vector<T>>& grad_w,
                  std::vector<std::vector<T>>& grad_b, T* din) const {
        std::vector<T> delta(dout, dout + sizes.back());
        std::vector<T> prev;
        for (std::size_t li = weights.size(); li-- > 0;) {
            const int n_in = sizes[li], n_out = sizes[li + 1];
            const T* x = tape.x[li].data();
            const T* w = weights[li].data();
            T* gw = grad_w[li].data();
            for (int o = 0; o < n_out; ++o) {
                const T d = delta[o];
                grad_b[li][o] += d;
                T* grow = gw + static_cast<std::size_t>(o) * n_in;
                for (int i = 0; i < n_in; ++i) grow[i] += d * x[i];
            }
            if (li == 0 && din == nullptr) return;
            prev.assign(n_in, T(0));
            for (int o = 0; o < n_out; ++o) {
                const T d = delta[o];
                const T* row = w + static_cast<std::size_t>(o) * n_in;
                for (int i = 0; i < n_in; ++i) prev[i] += row[i] * d;
            }
            if (li > 0) {
                // Rectifier mask: the stored activation is zero exactly where
                // the unit was clamped.
                for (int i = 0; i < n_in; ++i)
                    if (x[i] <= T(0)) prev[i] = T(0);
                delta = std::move(prev);
            } else {
                for (int i = 0; i < n_in; ++i) din[i] = prev[i];
            }
        }
    }

    // Same shapes as the parameters, zero filled. Gradient accumulators.
    void make_grads(std::vector<std::vector<T>>& grad_w,
                    std::vector<std::vector<T>>& grad_b) const {
        grad_w.clear();
        grad_b.clear();
        for (std::size_t l = 0; l < weights.size(); ++l) {
            grad_w.emplace_back(weights[l].size(), T(0));
            grad_b.emplace_back(biases[l].size(), T(0));
        }
    }
};

// Output transforms used by the field decoders. Density is kept positive with
// exp; color is squashed to (0,1) with the logistic. Both carry their exact
// derivative through the stored output value.
template <typename T>
inline T exp_density(T z) {
    return std::exp(z);
}
template <typename T>
inline T exp_density_grad(T sigma) {
    return sigma;  // d exp(z)/dz = exp(z)
}
template <typename T>
inline T logistic(T z) {
    return T(1) / (T(1) + std::exp(-z));
}
template <typename T>
inline T logistic_grad(T y) {
    return y * (T(1) - y);  // d logistic/dz in terms of the output
}

}  // namespace nimp
