#pragma once

#include <cstdint>

#include "nimp/mesh.hpp"

namespace nimp {

// Unit tet (0,0,0)-(1,0,0)-(0,1,0)-(0,0,1).
TetMesh make_unit_tet();

// Cube fan: center plus six face centers, four tets per face, 24 tets total.
// Conforming and non-overlapping; serves as the toy proxy volume.
TetMesh make_ball_mesh(const Vec3& center, double half_extent);

// Kuhn subdivision of a jittered vertex lattice, six tets per cell. Cells are
// dropped with probability 1-keep_prob, producing gaps while staying
// conforming and overlap-free. jitter is a fraction of the cell size (< 0.3
// keeps all tets positively oriented).
TetMesh make_grid_mesh(int nx, int ny, int nz, const Vec3& origin, double cell_size,
                       double jitter, uint64_t seed, double keep_prob = 1.0);

// Two partially overlapping tets, tet 0 shifted into tet 1.
TetMesh make_two_overlapping_tets();

// Red refinement of one tet: edge midpoints added, corner tets plus the inner
// octahedron split along one diagonal, eight children replace the parent.
// Neighbors are left untouched (hanging nodes are fine for traversal).
TetMesh split_tet_8(const TetMesh& mesh, int tet);

}  // namespace nimp
