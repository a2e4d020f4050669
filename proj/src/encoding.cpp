#include "nimp/encoding.hpp"

#include <cmath>

namespace nimp {
namespace {

int ceil_log2(int n) {
    int bits = 0;
    while ((1LL << bits) < n) ++bits;
    return bits;
}

std::vector<int> geometric_resolutions(int levels, int max_res) {
    std::vector<int> res(levels);
    if (levels == 1) {
        res[0] = 2;
        return res;
    }
    const double growth = std::pow(max_res / 2.0, 1.0 / (levels - 1));
    int prev = 1;
    for (int l = 0; l < levels; ++l) {
        int r = static_cast<int>(std::lround(2.0 * std::pow(growth, l)));
        r = std::max(r, prev + 1);  // strictly increasing
        res[l] = r;
        prev = r;
    }
    return res;
}

HashLayout finish_layout(int tet_count, int levels, int features, int global_log2,
                         int per_tet_log2, int max_res) {
    if (tet_count < 1) throw DataError("layout needs at least one tet");
    if (levels < 1 || levels > 32) throw DataError("layout level count out of range");
    if (features < 1 || features > 64) throw DataError("layout feature width out of range");
    if (max_res < 2) throw DataError("layout max resolution must be at least 2");
    if (global_log2 < 4 || global_log2 > 30) throw DataError("global table size out of range");

    HashLayout layout;
    layout.tet_count = tet_count;
    layout.levels = levels;
    layout.features = features;
    layout.global_log2 = global_log2;
    layout.per_tet_log2 = per_tet_log2;
    layout.level_res = geometric_resolutions(levels, max_res);

    const std::int64_t budget =
        static_cast<std::int64_t>(tet_count) << per_tet_log2;
    if (budget > (std::int64_t(1) << (global_log2 + 1)))
        throw DataError("per-tet slices exceed the shared table budget");

    // Coarse levels take their exact dense need; the rest of the slice is
    // split evenly over the remaining levels.
    layout.level_offset.resize(levels);
    layout.level_size.resize(levels);
    int remaining = 1 << per_tet_log2;
    int offset = 0;
    for (int l = 0; l < levels; ++l) {
        const int share = remaining / (levels - l);
        if (share < 1) throw DataError("per-tet slice too small for the level count");
        const std::int64_t n = layout.level_res[l] + 1;
        const std::int64_t dense = n * n * n * n;
        const int size = static_cast<int>(std::min<std::int64_t>(dense, share));
        layout.level_offset[l] = offset;
        layout.level_size[l] = size;
        offset += size;
        remaining -= size;
    }
    return layout;
}

}  // namespace

HashLayout make_layout(int tet_count, int levels, int features, int global_log2, int max_res) {
    if (tet_count < 1) throw DataError("layout needs at least one tet");
    const int per_tet = std::max(global_log2 - ceil_log2(tet_count), 4);
    return finish_layout(tet_count, levels, features, global_log2, per_tet, max_res);
}

HashLayout make_layout_with_slice(int tet_count, int levels, int features, int global_log2,
                                  int per_tet_log2, int max_res) {
    if (per_tet_log2 < 4 || per_tet_log2 > global_log2)
        throw DataError("per-tet slice width out of range");
    return finish_layout(tet_count, levels, features, global_log2, per_tet_log2, max_res);
}

std::uint32_t hash_index(const HashLayout& layout, int tet, int level,
                         const std::array<int, 4>& corner) {
    const std::uint32_t size = static_cast<std::uint32_t>(layout.level_size[level]);
    std::uint32_t local;
    if (layout.level_dense(level)) {
        const std::uint32_t base = static_cast<std::uint32_t>(layout.level_res[level] + 1);
        local = ((static_cast<std::uint32_t>(corner[0]) * base +
                  static_cast<std::uint32_t>(corner[1])) * base +
                 static_cast<std::uint32_t>(corner[2])) * base +
                static_cast<std::uint32_t>(corner[3]);
    } else {
        // Coordinate-prime XOR hash; the first prime is 1 so nearby cells
        // along the first axis stay coherent.
        constexpr std::uint32_t kPrimes[4] = {1u, 2654435761u, 805459861u, 3674653429u};
        std::uint32_t h = 0;
        for (int i = 0; i < 4; ++i)
            h ^= static_cast<std::uint32_t>(corner[i]) * kPrimes[i];
        local = h % size;
    }
    return (static_cast<std::uint32_t>(tet) << layout.per_tet_log2) +
           static_cast<std::uint32_t>(layout.level_offset[level]) + local;
}

namespace detail {

CornerSet gather_corners(const HashLayout& layout, int tet, int level, const Bary4& bary) {
    const int res = layout.level_res[level];
    int base[4];
    double frac[4];
    for (int i = 0; i < 4; ++i) {
        const double u = bary[i] * res;
        int cell = static_cast<int>(std::floor(u));
        if (cell < 0) cell = 0;
        if (cell > res - 1) cell = res - 1;
        base[i] = cell;
        frac[i] = u - cell;
    }
    CornerSet out;
    for (int c = 0; c < 16; ++c) {
        std::array<int, 4> corner;
        double w = 1.0;
        for (int i = 0; i < 4; ++i) {
            const int bit = (c >> i) & 1;
            corner[i] = base[i] + bit;
            w *= bit ? frac[i] : 1.0 - frac[i];
        }
        out.slot[c] = hash_index(layout, tet, level, corner);
        out.weight[c] = w;
    }
    return out;
}

}  // namespace detail

}  // namespace nimp
