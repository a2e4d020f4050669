#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nimp/error.hpp"
#include "nimp/mesh.hpp"
#include "nimp/rng.hpp"

namespace nimp {

// Storage plan for the per-tet multilevel feature grids. Every tet owns a
// contiguous slice of 2^per_tet_log2 feature vectors, subdivided among the
// levels. Coarse levels get exactly their dense node count; finer levels
// split what remains evenly and fall back to spatial hashing once their node
// count exceeds the sub-slice.
struct HashLayout {
    int tet_count = 0;
    int levels = 0;        // L
    int features = 0;      // F, per level
    int global_log2 = 0;   // H, log2 of the shared budget
    int per_tet_log2 = 0;  // H', log2 of one tet's slice
    std::vector<int> level_res;     // grid resolution per level
    std::vector<int> level_offset;  // sub-slice start within a tet slice
    std::vector<int> level_size;    // sub-slice length per level

    int tet_slice() const { return 1 << per_tet_log2; }
    std::size_t total_vectors() const {
        return static_cast<std::size_t>(tet_count) << per_tet_log2;
    }
    int feature_dim() const { return levels * features; }
    bool level_dense(int level) const {
        const std::int64_t n = level_res[level] + 1;
        return n * n * n * n <= level_size[level];
    }
};

// Sizing rule: per_tet_log2 = max(global_log2 - ceil(log2(tet_count)), 4),
// which also keeps tet_count * 2^per_tet_log2 within 2^(global_log2 + 1).
// Level resolutions grow geometrically from 2 to max_res.
HashLayout make_layout(int tet_count, int levels, int features, int global_log2,
                       int max_res = 16);

// Same, but with the slice width pinned by the caller. Feature transfer
// between meshes requires slices of equal width.
HashLayout make_layout_with_slice(int tet_count, int levels, int features, int global_log2,
                                  int per_tet_log2, int max_res = 16);

// Flat vector index of a grid node (corner coordinates in [0, res]) of one
// tet's level. Dense sub-slices use injective mixed-radix addressing; hashed
// ones use the XOR of coordinate-prime products modulo the sub-slice size.
std::uint32_t hash_index(const HashLayout& layout, int tet, int level,
                         const std::array<int, 4>& corner);

template <typename T>
struct FeatureTable {
    HashLayout layout;
    std::vector<T> values;

    explicit FeatureTable(const HashLayout& l = {}) : layout(l) {
        values.assign(layout.total_vectors() * static_cast<std::size_t>(layout.features),
                      T(0));
    }

    // Trainable entries start as small uniform noise.
    void init_uniform(Rng& rng, double range = 1e-4) {
        for (T& v : values) v = static_cast<T>(rng.uniform(-range, range));
    }
};

namespace detail {

struct CornerSet {
    // 16 corners of the containing 4D cell with their interpolation weights.
    std::array<std::uint32_t, 16> slot;
    std::array<double, 16> weight;
};

// Shared between forward and backward: locates the cell of bary at each level
// and emits slots+weights for the level's 16 corners.
CornerSet gather_corners(const HashLayout& layout, int tet, int level, const Bary4& bary);

}  // namespace detail

// Quadrilinear interpolation of every level, concatenated level-major into
// out[levels * features]. bary must be valid barycentrics of the given tet.
template <typename T>
void encode_position(const FeatureTable<T>& table, int tet, const Bary4& bary, T* out) {
    const HashLayout& layout = table.layout;
    if (tet < 0 || tet >= layout.tet_count) throw DataError("encode tet id out of range");
    const int f_dim = layout.features;
    for (int level = 0; level < layout.levels; ++level) {
        const detail::CornerSet corners = detail::gather_corners(layout, tet, level, bary);
        for (int f = 0; f < f_dim; ++f) out[level * f_dim + f] = T(0);
        for (int c = 0; c < 16; ++c) {
            const T w = static_cast<T>(corners.weight[c]);
            const T* src = table.values.data() +
                           static_cast<std::size_t>(corners.slot[c]) * f_dim;
            for (int f = 0; f < f_dim; ++f) out[level * f_dim + f] += w * src[f];
        }
    }
}

// Scatters d(loss)/d(encoding) back onto the table entries that produced it.
template <typename T>
void encode_position_backward(const HashLayout& layout, int tet, const Bary4& bary,
                              const T* dout, std::vector<T>& grad) {
    if (tet < 0 || tet >= layout.tet_count) throw DataError("encode tet id out of range");
    const int f_dim = layout.features;
    for (int level = 0; level < layout.levels; ++level) {
        const detail::CornerSet corners = detail::gather_corners(layout, tet, level, bary);
        for (int c = 0; c < 16; ++c) {
            const T w = static_cast<T>(corners.weight[c]);
            T* dst = grad.data() + static_cast<std::size_t>(corners.slot[c]) * f_dim;
            for (int f = 0; f < f_dim; ++f) dst[f] += w * dout[level * f_dim + f];
        }
    }
}

}  // namespace nimp
