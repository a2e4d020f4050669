#include "nimp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "nimp/error.hpp"

namespace nimp {
namespace {

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return dot(cross(b - a, c - a), d - a) / 6.0;
}

// Outward-oriented faces of a positively oriented tet, by vertex slot.
constexpr int kOutwardFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

// True when (p,q,r) is an even rotation of (a,b,c).
bool same_cycle(const std::array<int, 3>& s, int p, int q, int r) {
    if (s[0] == p) return s[1] == q && s[2] == r;
    if (s[1] == p) return s[2] == q && s[0] == r;
    if (s[2] == p) return s[0] == q && s[1] == r;
    return false;
}

struct TriHit {
    double t;
    bool ok;
};

// Moller-Trumbore. Near-parallel rays are reported as misses.
TriHit ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 pv = cross(d, e2);
    const double det = dot(e1, pv);
    if (std::abs(det) < 1e-300) return {0.0, false};
    const double inv = 1.0 / det;
    const Vec3 tv = o - a;
    const double u = dot(tv, pv) * inv;
    if (u < -1e-12 || u > 1.0 + 1e-12) return {0.0, false};
    const Vec3 qv = cross(tv, e1);
    const double v = dot(d, qv) * inv;
    if (v < -1e-12 || u + v > 1.0 + 1e-12) return {0.0, false};
    return {dot(e2, qv) * inv, true};
}

// Amanatides & Woo cell walk over [t0, t1]. visit returns false to stop.
template <class Visit>
void walk_cells(const UniformGrid& g, const Vec3& o, const Vec3& d, double t0, double t1,
                Visit&& visit) {
    Vec3 p = o + d * t0;
    int ix = g.cell_of(p.x, 0), iy = g.cell_of(p.y, 1), iz = g.cell_of(p.z, 2);
    int step[3];
    double t_max[3], t_delta[3];
    const int idx0[3] = {ix, iy, iz};
    const int dims[3] = {g.nx, g.ny, g.nz};
    for (int a = 0; a < 3; ++a) {
        const double da = d[a];
        if (da > 0) {
            step[a] = 1;
            const double edge = g.origin[a] + (idx0[a] + 1) * g.cell[a];
            t_max[a] = t0 + (edge - p[a]) / da;
            t_delta[a] = g.cell[a] / da;
        } else if (da < 0) {
            step[a] = -1;
            const double edge = g.origin[a] + idx0[a] * g.cell[a];
            t_max[a] = t0 + (edge - p[a]) / da;
            t_delta[a] = -g.cell[a] / da;
        } else {
            step[a] = 0;
            t_max[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }
    int idx[3] = {ix, iy, iz};
    double t_enter = t0;
    while (true) {
        if (!visit(g.index(idx[0], idx[1], idx[2]), t_enter)) return;
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        t_enter = t_max[axis];
        if (t_enter > t1) return;
        idx[axis] += step[axis];
        if (idx[axis] < 0 || idx[axis] >= dims[axis]) return;
        t_max[axis] += t_delta[axis];
    }
}

// Clips the ray against the four outward face planes of a convex tet.
bool clip_ray_tet(const TetMesh& mesh, int t, const Vec3& o, const Vec3& d, double& t0,
                  double& t1) {
    const auto& tet = mesh.tets[t];
    const Vec3& v0 = mesh.vertices[tet[0]];
    const Vec3& v1 = mesh.vertices[tet[1]];
    const Vec3& v2 = mesh.vertices[tet[2]];
    const Vec3& v3 = mesh.vertices[tet[3]];
    const Vec3* v[4] = {&v0, &v1, &v2, &v3};
    for (int f = 0; f < 4; ++f) {
        const Vec3& a = *v[kOutwardFaces[f][0]];
        const Vec3& b = *v[kOutwardFaces[f][1]];
        const Vec3& c = *v[kOutwardFaces[f][2]];
        const Vec3 n = cross(b - a, c - a);
        const double dist = dot(n, o - a);
        const double slope = dot(n, d);
        if (slope == 0.0) {
            if (dist > 0.0) return false;
            continue;
        }
        const double th = -dist / slope;
        if (slope > 0.0) {
            t1 = std::min(t1, th);
        } else {
            t0 = std::max(t0, th);
        }
        if (t0 >= t1) return false;
    }
    return true;
}

bool contains_point(const TetMesh& mesh, int t, const Vec3& p, double tol) {
    const Vec3 w = mesh.inv_edges[t] * (p - mesh.vertices[mesh.tets[t][0]]);
    return w.x >= -tol && w.y >= -tol && w.z >= -tol && (1.0 - w.x - w.y - w.z) >= -tol;
}

// Lowest-index containing tet among those registered in p's grid cell.
int grid_sign_locate(const TetMesh& mesh, const Vec3& p) {
    const UniformGrid& g = mesh.grid;
    const int ci = g.index(g.cell_of(p.x, 0), g.cell_of(p.y, 1), g.cell_of(p.z, 2));
    for (int t : g.cell_tets[ci]) {
        if (contains_point(mesh, t, p, 0.0)) return t;
    }
    return -1;
}

// Separating axis test with a penetration tolerance so that tets merely
// touching at shared faces/edges do not count as overlapping.
bool tets_overlap(const TetMesh& mesh, int ta, int tb, double eps) {
    const Vec3* a[4];
    const Vec3* b[4];
    for (int i = 0; i < 4; ++i) {
        a[i] = &mesh.vertices[mesh.tets[ta][i]];
        b[i] = &mesh.vertices[mesh.tets[tb][i]];
    }
    Vec3 axes[44];
    int n_axes = 0;
    for (int f = 0; f < 4; ++f) {
        axes[n_axes++] = cross(*a[kOutwardFaces[f][1]] - *a[kOutwardFaces[f][0]],
                               *a[kOutwardFaces[f][2]] - *a[kOutwardFaces[f][0]]);
        axes[n_axes++] = cross(*b[kOutwardFaces[f][1]] - *b[kOutwardFaces[f][0]],
                               *b[kOutwardFaces[f][2]] - *b[kOutwardFaces[f][0]]);
    }
    constexpr int kEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& ea : kEdges)
        for (const auto& eb : kEdges)
            axes[n_axes++] = cross(*a[ea[1]] - *a[ea[0]], *b[eb[1]] - *b[eb[0]]);
    for (int i = 0; i < n_axes; ++i) {
        const double len = norm(axes[i]);
        if (len < 1e-30) continue;
        const Vec3 ax = axes[i] / len;
        double lo_a = 1e300, hi_a = -1e300, lo_b = 1e300, hi_b = -1e300;
        for (int k = 0; k < 4; ++k) {
            const double pa = dot(ax, *a[k]);
            const double pb = dot(ax, *b[k]);
            lo_a = std::min(lo_a, pa);
            hi_a = std::max(hi_a, pa);
            lo_b = std::min(lo_b, pb);
            hi_b = std::max(hi_b, pb);
        }
        const double penetration = std::min(hi_a, hi_b) - std::max(lo_a, lo_b);
        if (penetration <= eps) return false;
    }
    return true;
}

Aabb tet_bounds(const TetMesh& mesh, int t) {
    Aabb box;
    for (int k = 0; k < 4; ++k) box.expand(mesh.vertices[mesh.tets[t][k]]);
    return box;
}

void rasterize(const UniformGrid& g, const Aabb& box, std::vector<std::vector<int>>& cells,
               int id) {
    const int x0 = g.cell_of(box.lo.x, 0), x1 = g.cell_of(box.hi.x, 0);
    const int y0 = g.cell_of(box.lo.y, 1), y1 = g.cell_of(box.hi.y, 1);
    const int z0 = g.cell_of(box.lo.z, 2), z1 = g.cell_of(box.hi.z, 2);
    for (int iz = z0; iz <= z1; ++iz)
        for (int iy = y0; iy <= y1; ++iy)
            for (int ix = x0; ix <= x1; ++ix) cells[g.index(ix, iy, iz)].push_back(id);
}

void compute_derived(TetMesh& mesh, bool canonicalize) {
    const size_t nv = mesh.vertices.size();
    for (size_t t = 0; t < mesh.tets.size(); ++t) {
        for (int k = 0; k < 4; ++k) {
            const int v = mesh.tets[t][k];
            if (v < 0 || static_cast<size_t>(v) >= nv)
                throw DataError("tet " + std::to_string(t) + " references vertex " +
                                std::to_string(v) + " out of range");
        }
    }

    mesh.bounds = Aabb{};
    for (const Vec3& v : mesh.vertices) mesh.bounds.expand(v);
    const double diag = std::max(mesh.bounds.diag(), 1e-30);
    const double vol_tol = kDegenerateVolumeRel * diag * diag * diag;

    mesh.volumes.resize(mesh.tets.size());
    mesh.inv_edges.resize(mesh.tets.size());
    std::vector<int> inverted;
    for (size_t t = 0; t < mesh.tets.size(); ++t) {
        auto& tet = mesh.tets[t];
        double vol = tet_volume(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                                mesh.vertices[tet[2]], mesh.vertices[tet[3]]);
        if (std::abs(vol) <= vol_tol)
            throw DataError("tet " + std::to_string(t) + " is degenerate (volume " +
                            std::to_string(vol) + ")");
        if (vol < 0.0) {
            if (canonicalize) {
                std::swap(tet[2], tet[3]);
                vol = -vol;
            } else {
                inverted.push_back(static_cast<int>(t));
            }
        }
        mesh.volumes[t] = vol;
        const Vec3& v0 = mesh.vertices[tet[0]];
        const Mat3 edges = Mat3::from_cols(mesh.vertices[tet[1]] - v0, mesh.vertices[tet[2]] - v0,
                                           mesh.vertices[tet[3]] - v0);
        mesh.inv_edges[t] = edges.inverse();
    }
    if (!inverted.empty()) {
        std::string msg = "deformation inverted tets:";
        for (int t : inverted) msg += " " + std::to_string(t);
        throw DataError(msg);
    }

    // Shared faces are stored once; the second owner lands on the front side.
    mesh.faces.clear();
    std::map<std::array<int, 3>, int> face_ids;
    for (size_t t = 0; t < mesh.tets.size(); ++t) {
        const auto& tet = mesh.tets[t];
        for (int f = 0; f < 4; ++f) {
            const int p = tet[kOutwardFaces[f][0]];
            const int q = tet[kOutwardFaces[f][1]];
            const int r = tet[kOutwardFaces[f][2]];
            std::array<int, 3> key{p, q, r};
            std::sort(key.begin(), key.end());
            auto it = face_ids.find(key);
            if (it == face_ids.end()) {
                TetFace face;
                face.v = {p, q, r};
                face.back_tet = static_cast<int>(t);
                face_ids.emplace(key, static_cast<int>(mesh.faces.size()));
                mesh.faces.push_back(face);
            } else {
                TetFace& face = mesh.faces[it->second];
                // An identical outward cycle means a duplicated tet; owners
                // beyond two are resolved through the overlap fallback.
                if (!same_cycle(face.v, p, q, r) && face.front_tet < 0)
                    face.front_tet = static_cast<int>(t);
            }
        }
    }

    // Grid resolution scales with the face count, split across axes by extent.
    UniformGrid& g = mesh.grid;
    const Vec3 ext = mesh.bounds.empty() ? Vec3{1, 1, 1} : mesh.bounds.extent();
    const double pad = 1e-9 + 1e-7 * diag;
    g.origin = mesh.bounds.lo - Vec3{pad, pad, pad};
    const Vec3 padded = ext + Vec3{2 * pad, 2 * pad, 2 * pad};
    const double target = std::cbrt(static_cast<double>(std::clamp<size_t>(mesh.faces.size(), 1, 1 << 18)));
    const double geo = std::cbrt(std::max(padded.x, 1e-30) * std::max(padded.y, 1e-30) *
                                 std::max(padded.z, 1e-30));
    auto axis_cells = [&](double e) {
        return std::clamp(static_cast<int>(std::lround(target * e / geo)), 1, 128);
    };
    g.nx = axis_cells(padded.x);
    g.ny = axis_cells(padded.y);
    g.nz = axis_cells(padded.z);
    g.cell = {padded.x / g.nx, padded.y / g.ny, padded.z / g.nz};
    g.cell_faces.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, {});
    g.cell_tets.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, {});
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        Aabb box;
        for (int k = 0; k < 3; ++k) box.expand(mesh.vertices[mesh.faces[f].v[k]]);
        rasterize(g, box, g.cell_faces, static_cast<int>(f));
    }
    for (size_t t = 0; t < mesh.tets.size(); ++t)
        rasterize(g, tet_bounds(mesh, t), g.cell_tets, static_cast<int>(t));

    // Overlap flags: bbox prefilter through the grid, then exact SAT.
    mesh.overlap_partners.assign(mesh.tets.size(), {});
    mesh.has_overlaps = false;
    const double eps_pen = 1e-9 * diag;
    std::vector<Aabb> boxes(mesh.tets.size());
    for (size_t t = 0; t < mesh.tets.size(); ++t) boxes[t] = tet_bounds(mesh, t);
    std::vector<std::pair<int, int>> checked;
    for (const auto& cell : g.cell_tets) {
        for (size_t i = 0; i + 1 < cell.size(); ++i)
            for (size_t j = i + 1; j < cell.size(); ++j) {
                const int ta = cell[i], tb = cell[j];
                if (!boxes[ta].overlaps(boxes[tb])) continue;
                checked.emplace_back(ta, tb);
            }
    }
    std::sort(checked.begin(), checked.end());
    checked.erase(std::unique(checked.begin(), checked.end()), checked.end());
    for (const auto& [ta, tb] : checked) {
        if (tets_overlap(mesh, ta, tb, eps_pen)) {
            mesh.overlap_partners[ta].push_back(tb);
            mesh.overlap_partners[tb].push_back(ta);
            mesh.has_overlaps = true;
        }
    }
    for (auto& partners : mesh.overlap_partners) std::sort(partners.begin(), partners.end());
}

}  // namespace

TetMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets) {
    TetMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.tets = std::move(tets);
    compute_derived(mesh, /*canonicalize=*/true);
    return mesh;
}

TetMesh rebuild_with_vertices(const TetMesh& mesh, std::vector<Vec3> vertices) {
    if (vertices.size() != mesh.vertices.size())
        throw DataError("vertex frame size " + std::to_string(vertices.size()) +
                        " does not match mesh vertex count " + std::to_string(mesh.vertices.size()));
    TetMesh out;
    out.vertices = std::move(vertices);
    out.tets = mesh.tets;
    compute_derived(out, /*canonicalize=*/false);
    return out;
}

Bary4 barycentric_of_point(const TetMesh& mesh, int tet, const Vec3& p) {
    if (tet < 0 || tet >= mesh.tet_count()) throw DataError("tet id out of range");
    const Vec3 w = mesh.inv_edges[tet] * (p - mesh.vertices[mesh.tets[tet][0]]);
    return {1.0 - w.x - w.y - w.z, w.x, w.y, w.z};
}

Vec3 point_from_barycentric(const TetMesh& mesh, int tet, const Bary4& bary) {
    if (tet < 0 || tet >= mesh.tet_count()) throw DataError("tet id out of range");
    const auto& ids = mesh.tets[tet];
    return mesh.vertices[ids[0]] * bary[0] + mesh.vertices[ids[1]] * bary[1] +
           mesh.vertices[ids[2]] * bary[2] + mesh.vertices[ids[3]] * bary[3];
}

int locate_point(const TetMesh& mesh, const Vec3& p) {
    if (mesh.tets.empty()) return -1;
    const UniformGrid& g = mesh.grid;
    if (p.x < g.origin.x || p.y < g.origin.y || p.z < g.origin.z ||
        p.x > g.origin.x + g.nx * g.cell.x || p.y > g.origin.y + g.ny * g.cell.y ||
        p.z > g.origin.z + g.nz * g.cell.z)
        return -1;

    // Overlapping regions need the lowest containing id, which a single
    // first-hit query cannot provide; fall back to the sign test.
    if (mesh.has_overlaps) return grid_sign_locate(mesh, p);

    const Vec3 d{1.0, 0.0, 0.0};
    double best_t = std::numeric_limits<double>::infinity();
    int best_face = -1;
    bool tie = false;
    const double tie_eps = 1e-12 * std::max(1.0, mesh.bounds.diag());
    walk_cells(g, p, d, 0.0, std::numeric_limits<double>::infinity(),
               [&](int cell, double t_enter) {
                   if (t_enter > best_t + tie_eps) return false;
                   for (int f : g.cell_faces[cell]) {
                       const TetFace& face = mesh.faces[f];
                       const TriHit hit = ray_triangle(p, d, mesh.vertices[face.v[0]],
                                                       mesh.vertices[face.v[1]],
                                                       mesh.vertices[face.v[2]]);
                       if (!hit.ok || hit.t <= 0.0) continue;
                       if (hit.t < best_t - tie_eps) {
                           best_t = hit.t;
                           best_face = f;
                           tie = false;
                       } else if (hit.t <= best_t + tie_eps && f != best_face) {
                           tie = true;
                       }
                   }
                   return true;
               });
    if (best_face < 0) return -1;
    if (!tie) {
        const TetFace& face = mesh.faces[best_face];
        const Vec3& a = mesh.vertices[face.v[0]];
        const Vec3 n = cross(mesh.vertices[face.v[1]] - a, mesh.vertices[face.v[2]] - a);
        if (std::abs(n.x) > 1e-14 * norm(n)) {
            const int cand = n.x > 0.0 ? face.back_tet : face.front_tet;
            if (cand < 0) return -1;
            if (contains_point(mesh, cand, p, 1e-12)) return cand;
        }
    }
    // Grazing or tied hits: rare, resolved by the exact per-tet test.
    return grid_sign_locate(mesh, p);
}

std::vector<TetSegment> intersect_ray(const TetMesh& mesh, const Ray& ray) {
    std::vector<TetSegment> result;
    if (mesh.tets.empty()) return result;
    const UniformGrid& g = mesh.grid;
    Aabb grid_box;
    grid_box.lo = g.origin;
    grid_box.hi = g.origin + Vec3{g.nx * g.cell.x, g.ny * g.cell.y, g.nz * g.cell.z};
    double t0 = ray.t_min, t1 = ray.t_max;
    if (!clip_ray_aabb(ray.origin, ray.dir, grid_box, t0, t1)) return result;

    std::vector<int> candidates;
    walk_cells(g, ray.origin, ray.dir, t0, t1, [&](int cell, double) {
        const auto& tets = g.cell_tets[cell];
        candidates.insert(candidates.end(), tets.begin(), tets.end());
        return true;
    });
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    for (int t : candidates) {
        double a = ray.t_min, b = ray.t_max;
        if (!clip_ray_tet(mesh, t, ray.origin, ray.dir, a, b)) continue;
        if (b - a <= kMinSegmentLength) continue;
        TetSegment seg;
        seg.tet = t;
        seg.t_in = a;
        seg.t_out = b;
        seg.bary_in = barycentric_of_point(mesh, t, ray.origin + ray.dir * a);
        seg.bary_out = barycentric_of_point(mesh, t, ray.origin + ray.dir * b);
        result.push_back(seg);
    }
    std::sort(result.begin(), result.end(), [](const TetSegment& x, const TetSegment& y) {
        return x.t_in != y.t_in ? x.t_in < y.t_in : x.tet < y.tet;
    });
    return result;
}

TetMesh load_tetmesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open tetmesh file: " + path);
    std::string tag;
    size_t nv = 0, nt = 0;
    if (!(in >> tag >> nv >> nt) || tag != "tetmesh")
        throw DataError("bad tetmesh header in " + path);
    std::vector<Vec3> vertices(nv);
    for (size_t i = 0; i < nv; ++i) {
        if (!(in >> tag >> vertices[i].x >> vertices[i].y >> vertices[i].z) || tag != "v")
            throw DataError("bad vertex line " + std::to_string(i) + " in " + path);
    }
    std::vector<std::array<int, 4>> tets(nt);
    for (size_t i = 0; i < nt; ++i) {
        if (!(in >> tag >> tets[i][0] >> tets[i][1] >> tets[i][2] >> tets[i][3]) || tag != "t")
            throw DataError("bad tet line " + std::to_string(i) + " in " + path);
    }
    return build_mesh(std::move(vertices), std::move(tets));
}

void save_tetmesh(const TetMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write tetmesh file: " + path);
    out << "tetmesh " << mesh.vertices.size() << " " << mesh.tets.size() << "\n";
    char buf[160];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& t : mesh.tets)
        out << "t " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
    if (!out) throw DataError("write failed: " + path);
}

std::vector<std::vector<Vec3>> load_vertex_frames(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open frames file: " + path);
    std::vector<std::vector<Vec3>> frames;
    std::string tag;
    while (in >> tag) {
        if (tag != "frame") throw DataError("bad frame header in " + path);
        size_t nv = 0;
        if (!(in >> nv)) throw DataError("bad frame count in " + path);
        std::vector<Vec3> verts(nv);
        for (size_t i = 0; i < nv; ++i) {
            if (!(in >> tag >> verts[i].x >> verts[i].y >> verts[i].z) || tag != "v")
                throw DataError("bad vertex line in frame of " + path);
        }
        frames.push_back(std::move(verts));
    }
    if (frames.empty()) throw DataError("no frames in " + path);
    return frames;
}

void save_vertex_frames(const std::vector<std::vector<Vec3>>& frames, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write frames file: " + path);
    char buf[160];
    for (const auto& verts : frames) {
        out << "frame " << verts.size() << "\n";
        for (const Vec3& v : verts) {
            std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
            out << buf;
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace nimp
