#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nimp/vec.hpp"

namespace nimp {

// Barycentric coordinates over one tetrahedron. Components follow the tet's
// vertex slot order and sum to 1 for valid points.
struct Bary4 {
    std::array<double, 4> l{0.0, 0.0, 0.0, 0.0};

    Bary4() = default;
    Bary4(double a, double b, double c, double d) : l{a, b, c, d} {}

    double operator[](int i) const { return l[i]; }
    double& operator[](int i) { return l[i]; }

    double sum() const { return l[0] + l[1] + l[2] + l[3]; }

    bool in_simplex(double tol = 1e-9) const {
        for (double v : l)
            if (v < -tol) return false;
        return std::abs(sum() - 1.0) <= tol;
    }
};

// Interpolation along a segment: alpha = 0 at the entry point, 1 at the exit.
inline Bary4 bary_lerp(const Bary4& entry, const Bary4& exit, double alpha) {
    Bary4 r;
    for (int i = 0; i < 4; ++i) r[i] = (1.0 - alpha) * entry[i] + alpha * exit[i];
    return r;
}

inline double bary_l1(const Bary4& a, const Bary4& b) {
    return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]) +
           std::abs(a[3] - b[3]);
}

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length
    double t_min = 0.0;
    double t_max = std::numeric_limits<double>::infinity();
};

// One tet crossed by a ray. Entry/exit barycentrics are solved once at the
// clip points; everything between is linear interpolation.
struct TetSegment {
    int tet = -1;
    double t_in = 0.0;
    double t_out = 0.0;
    Bary4 bary_in;
    Bary4 bary_out;
};

// Oriented triangle shared by at most two tets. With n = (v1-v0)x(v2-v0),
// back_tet sits on the -n side (n is its outward normal), front_tet on +n.
struct TetFace {
    std::array<int, 3> v{-1, -1, -1};
    int back_tet = -1;
    int front_tet = -1;
};

// Uniform cell grid over the mesh. Cells list both the faces and the tets
// whose bounding boxes touch them; faces drive first-hit queries, tets drive
// segment candidate gathering.
struct UniformGrid {
    Vec3 origin;
    Vec3 cell{1, 1, 1};
    int nx = 0, ny = 0, nz = 0;
    std::vector<std::vector<int>> cell_faces;
    std::vector<std::vector<int>> cell_tets;

    int index(int ix, int iy, int iz) const { return (iz * ny + iy) * nx + ix; }
    int cell_of(double p, int axis) const {
        int i = static_cast<int>(std::floor((p - origin[axis]) / cell[axis]));
        const int n = axis == 0 ? nx : (axis == 1 ? ny : nz);
        return std::clamp(i, 0, n - 1);
    }
};

struct TetMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;  // positive orientation after build

    // Derived at build time.
    std::vector<TetFace> faces;
    std::vector<double> volumes;
    std::vector<Mat3> inv_edges;  // per tet, inverse of [v1-v0 | v2-v0 | v3-v0]
    std::vector<std::vector<int>> overlap_partners;
    bool has_overlaps = false;
    Aabb bounds;
    UniformGrid grid;

    int tet_count() const { return static_cast<int>(tets.size()); }
    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

// Validates connectivity, flips any negatively oriented tet, computes face
// adjacency, overlap flags, and the query grid. Throws DataError on
// out-of-range indices or degenerate tets.
TetMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets);

// Same derived-data rebuild but the tet vertex order is kept as-is so that
// barycentric semantics survive deformation. Tets whose volume went negative
// are reported through DataError (their indices in the message).
TetMesh rebuild_with_vertices(const TetMesh& mesh, std::vector<Vec3> vertices);

Bary4 barycentric_of_point(const TetMesh& mesh, int tet, const Vec3& p);
Vec3 point_from_barycentric(const TetMesh& mesh, int tet, const Bary4& bary);

// Containing tet id or -1. Overlapping regions resolve to the lowest tet id.
int locate_point(const TetMesh& mesh, const Vec3& p);

// All tets crossed by the ray, ordered by entry distance. Adjacent tets chain
// exit to entry, gaps stay gaps, overlapping tets both contribute. Segments
// shorter than kMinSegmentLength along t are dropped.
std::vector<TetSegment> intersect_ray(const TetMesh& mesh, const Ray& ray);

inline constexpr double kMinSegmentLength = 1e-9;
inline constexpr double kBaryTol = 1e-9;
inline constexpr double kDegenerateVolumeRel = 1e-12;

// Text format round-trip:
//   tetmesh <nv> <nt>
//   v x y z        (nv lines)
//   t i0 i1 i2 i3  (nt lines, zero-based)
TetMesh load_tetmesh(const std::string& path);
void save_tetmesh(const TetMesh& mesh, const std::string& path);

// Deformation frames share the vertex block syntax under a "frame <nv>" header.
std::vector<std::vector<Vec3>> load_vertex_frames(const std::string& path);
void save_vertex_frames(const std::vector<std::vector<Vec3>>& frames, const std::string& path);

}  // namespace nimp
