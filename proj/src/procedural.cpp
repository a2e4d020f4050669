#include "nimp/procedural.hpp"

#include <algorithm>
#include <map>

#include "nimp/error.hpp"
#include "nimp/rng.hpp"

namespace nimp {

TetMesh make_unit_tet() {
    return build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                      {{0, 1, 2, 3}});
}

TetMesh make_ball_mesh(const Vec3& center, double h) {
    std::vector<Vec3> verts;
    // 8 cube corners.
    for (int i = 0; i < 8; ++i)
        verts.push_back(center + Vec3{(i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h});
    // Face centers: -x +x -y +y -z +z.
    verts.push_back(center + Vec3{-h, 0, 0});
    verts.push_back(center + Vec3{h, 0, 0});
    verts.push_back(center + Vec3{0, -h, 0});
    verts.push_back(center + Vec3{0, h, 0});
    verts.push_back(center + Vec3{0, 0, -h});
    verts.push_back(center + Vec3{0, 0, h});
    verts.push_back(center);  // 14

    // Corner loops of each cube face, counterclockwise seen from outside.
    constexpr int kFaceLoop[6][4] = {
        {0, 4, 6, 2},  // -x
        {1, 3, 7, 5},  // +x
        {0, 1, 5, 4},  // -y
        {2, 6, 7, 3},  // +y
        {0, 2, 3, 1},  // -z
        {4, 5, 7, 6},  // +z
    };
    std::vector<std::array<int, 4>> tets;
    for (int f = 0; f < 6; ++f) {
        const int fc = 8 + f;
        for (int e = 0; e < 4; ++e) {
            const int a = kFaceLoop[f][e];
            const int b = kFaceLoop[f][(e + 1) % 4];
            tets.push_back({14, fc, a, b});
        }
    }
    return build_mesh(std::move(verts), std::move(tets));
}

TetMesh make_grid_mesh(int nx, int ny, int nz, const Vec3& origin, double cell_size,
                       double jitter, uint64_t seed, double keep_prob) {
    if (nx < 1 || ny < 1 || nz < 1) throw DataError("grid dims must be positive");
    Rng rng(seed);
    const int vx = nx + 1, vy = ny + 1, vz = nz + 1;
    std::vector<Vec3> verts(static_cast<size_t>(vx) * vy * vz);
    auto vid = [&](int i, int j, int k) { return (k * vy + j) * vx + i; };
    for (int k = 0; k < vz; ++k)
        for (int j = 0; j < vy; ++j)
            for (int i = 0; i < vx; ++i) {
                Vec3 p = origin + Vec3{i * cell_size, j * cell_size, k * cell_size};
                p += Vec3{rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter),
                          rng.uniform(-jitter, jitter)} * cell_size;
                verts[vid(i, j, k)] = p;
            }

    // Kuhn split: six tets around the main diagonal c000-c111, one per axis
    // permutation. Conforming across identical neighbor cells.
    constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<std::array<int, 4>> tets;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (rng.uniform01() > keep_prob) continue;
                for (const auto& perm : kPerms) {
                    int c[3] = {0, 0, 0};
                    std::array<int, 4> tet;
                    tet[0] = vid(i, j, k);
                    for (int s = 0; s < 3; ++s) {
                        c[perm[s]] = 1;
                        tet[s + 1] = vid(i + c[0], j + c[1], k + c[2]);
                    }
                    tets.push_back(tet);
                }
            }
    if (tets.empty()) {
        // keep_prob pruned everything; keep one cell so the mesh is usable.
        for (const auto& perm : kPerms) {
            int c[3] = {0, 0, 0};
            std::array<int, 4> tet;
            tet[0] = vid(0, 0, 0);
            for (int s = 0; s < 3; ++s) {
                c[perm[s]] = 1;
                tet[s + 1] = vid(c[0], c[1], c[2]);
            }
            tets.push_back(tet);
        }
    }
    return build_mesh(std::move(verts), std::move(tets));
}

TetMesh make_two_overlapping_tets() {
    std::vector<Vec3> verts = {
        {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
        {0.25, 0.1, 0.1}, {1.25, 0.1, 0.1}, {0.25, 1.1, 0.1}, {0.25, 0.1, 1.1},
    };
    return build_mesh(std::move(verts), {{0, 1, 2, 3}, {4, 5, 6, 7}});
}

TetMesh split_tet_8(const TetMesh& mesh, int tet) {
    if (tet < 0 || tet >= mesh.tet_count()) throw DataError("tet id out of range");
    std::vector<Vec3> verts = mesh.vertices;
    const auto& ids = mesh.tets[tet];

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(ids[a], ids[b]);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int v = static_cast<int>(verts.size());
        verts.push_back((mesh.vertices[key.first] + mesh.vertices[key.second]) * 0.5);
        midpoint.emplace(key, v);
        return v;
    };
    const int m01 = mid(0, 1), m02 = mid(0, 2), m03 = mid(0, 3);
    const int m12 = mid(1, 2), m13 = mid(1, 3), m23 = mid(2, 3);

    std::vector<std::array<int, 4>> tets;
    tets.reserve(mesh.tets.size() + 7);
    for (int t = 0; t < mesh.tet_count(); ++t)
        if (t != tet) tets.push_back(mesh.tets[t]);
    // Four corner children.
    tets.push_back({ids[0], m01, m02, m03});
    tets.push_back({ids[1], m01, m12, m13});
    tets.push_back({ids[2], m02, m12, m23});
    tets.push_back({ids[3], m03, m13, m23});
    // Octahedron m01 m02 m03 m12 m13 m23 split along the m01-m23 diagonal.
    tets.push_back({m01, m23, m02, m03});
    tets.push_back({m01, m23, m03, m13});
    tets.push_back({m01, m23, m13, m12});
    tets.push_back({m01, m23, m12, m02});
    return build_mesh(std::move(verts), std::move(tets));
}

}  // namespace nimp
