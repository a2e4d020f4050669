#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "nimp/error.hpp"
#include "nimp/mesh.hpp"
#include "nimp/procedural.hpp"
#include "nimp/rng.hpp"
#include "support/oracles.hpp"

using namespace nimp;

TEST_CASE("unit tet basics") {
    TetMesh mesh = make_unit_tet();
    CHECK(mesh.tet_count() == 1);
    CHECK(mesh.volumes[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    const Vec3 centroid{0.25, 0.25, 0.25};
    const Bary4 bc = barycentric_of_point(mesh, 0, centroid);
    for (int i = 0; i < 4; ++i) CHECK(bc[i] == doctest::Approx(0.25).epsilon(1e-12));

    CHECK(locate_point(mesh, Vec3{0.1, 0.1, 0.1}) == 0);
    const Bary4 b2 = barycentric_of_point(mesh, 0, Vec3{0.1, 0.1, 0.1});
    CHECK(b2[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(b2[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(b2[2] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(b2[3] == doctest::Approx(0.1).epsilon(1e-12));

    CHECK(locate_point(mesh, Vec3{2.0, 2.0, 2.0}) == -1);
    CHECK(locate_point(mesh, Vec3{0.9, 0.9, 0.9}) == -1);
}

TEST_CASE("negatively wound tet is canonicalized") {
    TetMesh mesh = build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 2, 1, 3}});
    CHECK(mesh.volumes[0] > 0.0);
    CHECK(locate_point(mesh, Vec3{0.1, 0.1, 0.1}) == 0);
}

TEST_CASE("build errors") {
    CHECK_THROWS_AS(build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2, 3}}), DataError);
    // Degenerate: four coplanar points.
    CHECK_THROWS_AS(
        build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{0, 1, 2, 3}}), DataError);
    TetMesh mesh = make_unit_tet();
    CHECK_THROWS_AS(barycentric_of_point(mesh, 1, Vec3{0, 0, 0}), DataError);
    CHECK_THROWS_AS(point_from_barycentric(mesh, -1, Bary4{1, 0, 0, 0}), DataError);
}

TEST_CASE("barycentric round trip and partition of unity") {
    TetMesh mesh = make_grid_mesh(3, 3, 3, Vec3{-1, -1, -1}, 0.7, 0.2, 17);
    Rng rng(99);
    const double diag = mesh.bounds.diag();
    for (int n = 0; n < 10000; ++n) {
        const int t = static_cast<int>(rng.uniform_index(mesh.tet_count()));
        // Uniform barycentric draw via sorted uniforms.
        double u[3] = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        std::sort(u, u + 3);
        const Bary4 b{u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]};
        REQUIRE(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
        const Vec3 p = point_from_barycentric(mesh, t, b);
        const Bary4 r = barycentric_of_point(mesh, t, p);
        REQUIRE(std::abs(r.sum() - 1.0) < 1e-9);
        for (int i = 0; i < 4; ++i) REQUIRE(std::abs(r[i] - b[i]) < 1e-9);
        const Vec3 q = point_from_barycentric(mesh, t, r);
        REQUIRE(norm(q - p) < 1e-9 * diag);
    }
}

TEST_CASE("winding locate agrees with brute force on jittered grids") {
    Rng rng(4242);
    for (int trial = 0; trial < 4; ++trial) {
        TetMesh mesh = make_grid_mesh(3 + trial, 3, 2 + trial % 2, Vec3{-1, -0.8, -0.6}, 0.55,
                                      0.22, 1000 + trial, trial % 2 ? 0.7 : 1.0);
        REQUIRE_FALSE(mesh.has_overlaps);
        const Vec3 lo = mesh.bounds.lo - Vec3{0.1, 0.1, 0.1};
        const Vec3 hi = mesh.bounds.hi + Vec3{0.1, 0.1, 0.1};
        for (int n = 0; n < 800; ++n) {
            const Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
            const int got = locate_point(mesh, p);
            const int want = oracle::brute_force_locate(mesh.vertices, mesh.tets, p);
            REQUIRE(got == want);
        }
    }
}

TEST_CASE("ray through unit tet") {
    TetMesh mesh = make_unit_tet();
    Ray ray;
    ray.origin = Vec3{-1.0, 0.1, 0.1};
    ray.dir = Vec3{1.0, 0.0, 0.0};
    const auto segs = intersect_ray(mesh, ray);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].tet == 0);
    CHECK(segs[0].t_in == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(segs[0].t_out == doctest::Approx(1.8).epsilon(1e-12));
    const double want_in[4] = {0.8, 0.0, 0.1, 0.1};
    const double want_out[4] = {0.0, 0.8, 0.1, 0.1};
    for (int i = 0; i < 4; ++i) {
        CHECK(segs[0].bary_in[i] == doctest::Approx(want_in[i]).epsilon(1e-9));
        CHECK(segs[0].bary_out[i] == doctest::Approx(want_out[i]).epsilon(1e-9));
    }
    CHECK(bary_l1(segs[0].bary_in, segs[0].bary_out) == doctest::Approx(1.6).epsilon(1e-9));

    Ray miss;
    miss.origin = Vec3{-1.0, 0.9, 0.9};
    miss.dir = Vec3{1.0, 0.0, 0.0};
    CHECK(intersect_ray(mesh, miss).empty());
}

TEST_CASE("adjacent tets chain exit to entry") {
    TetMesh mesh = make_grid_mesh(4, 3, 3, Vec3{0, 0, 0}, 0.5, 0.18, 7);
    Rng rng(5);
    int checked = 0;
    for (int n = 0; n < 200; ++n) {
        Ray ray;
        ray.origin = Vec3{-0.5, rng.uniform(0.1, 1.4), rng.uniform(0.1, 1.4)};
        Vec3 target{rng.uniform(0.2, 1.8), rng.uniform(0.1, 1.4), rng.uniform(0.1, 1.4)};
        ray.dir = normalize(target - ray.origin);
        const auto segs = intersect_ray(mesh, ray);
        for (size_t i = 0; i < segs.size(); ++i) {
            REQUIRE(segs[i].t_out - segs[i].t_in > kMinSegmentLength);
            REQUIRE(segs[i].bary_in.in_simplex(1e-7));
            REQUIRE(segs[i].bary_out.in_simplex(1e-7));
            // Entry/exit points lie on a face: one component near zero
            // (except when clipped by the ray range, which does not happen
            // for these origins).
            double min_in = 1e9, min_out = 1e9;
            for (int c = 0; c < 4; ++c) {
                min_in = std::min(min_in, std::abs(segs[i].bary_in[c]));
                min_out = std::min(min_out, std::abs(segs[i].bary_out[c]));
            }
            REQUIRE(min_in < 1e-7);
            REQUIRE(min_out < 1e-7);
            if (i > 0) {
                REQUIRE(segs[i].t_in >= segs[i - 1].t_in);
                if (std::abs(segs[i].t_in - segs[i - 1].t_out) < 1e-9) {
                    // Chained pair: same world point from both sides.
                    const Vec3 a =
                        point_from_barycentric(mesh, segs[i - 1].tet, segs[i - 1].bary_out);
                    const Vec3 b = point_from_barycentric(mesh, segs[i].tet, segs[i].bary_in);
                    REQUIRE(norm(a - b) < 1e-7);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("separated tets keep their gap") {
    std::vector<Vec3> verts = {
        {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
        {2, 0, 0}, {3, 0, 0}, {2, 1, 0}, {2, 0, 1},
    };
    TetMesh mesh = build_mesh(verts, {{0, 1, 2, 3}, {4, 5, 6, 7}});
    CHECK_FALSE(mesh.has_overlaps);
    Ray ray;
    ray.origin = Vec3{-1, 0.1, 0.1};
    ray.dir = Vec3{1, 0, 0};
    const auto segs = intersect_ray(mesh, ray);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].tet == 0);
    CHECK(segs[1].tet == 1);
    CHECK(segs[1].t_in - segs[0].t_out > 1.0);
}

TEST_CASE("overlapping tets are flagged and both sampled") {
    TetMesh mesh = make_two_overlapping_tets();
    CHECK(mesh.has_overlaps);
    CHECK(mesh.overlap_partners[0] == std::vector<int>{1});
    CHECK(mesh.overlap_partners[1] == std::vector<int>{0});

    // A point inside both resolves to the lowest id, matching brute force.
    Rng rng(31);
    int both = 0;
    for (int n = 0; n < 3000; ++n) {
        const Vec3 p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.7), rng.uniform(0.0, 0.7)};
        const int got = locate_point(mesh, p);
        const int want = oracle::brute_force_locate(mesh.vertices, mesh.tets, p);
        REQUIRE(got == want);
        const auto b0 = oracle::tet_barycentric(mesh.vertices[mesh.tets[0][0]],
                                                mesh.vertices[mesh.tets[0][1]],
                                                mesh.vertices[mesh.tets[0][2]],
                                                mesh.vertices[mesh.tets[0][3]], p);
        const auto b1 = oracle::tet_barycentric(mesh.vertices[mesh.tets[1][0]],
                                                mesh.vertices[mesh.tets[1][1]],
                                                mesh.vertices[mesh.tets[1][2]],
                                                mesh.vertices[mesh.tets[1][3]], p);
        const bool in0 = b0[0] >= 0 && b0[1] >= 0 && b0[2] >= 0 && b0[3] >= 0;
        const bool in1 = b1[0] >= 0 && b1[1] >= 0 && b1[2] >= 0 && b1[3] >= 0;
        if (in0 && in1) {
            ++both;
            REQUIRE(got == 0);
        }
    }
    CHECK(both > 50);

    // Both tets contribute overlapping segments along a shared corridor.
    Ray ray;
    ray.origin = Vec3{-1, 0.15, 0.15};
    ray.dir = Vec3{1, 0, 0};
    const auto segs = intersect_ray(mesh, ray);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].tet == 0);
    CHECK(segs[1].tet == 1);
    CHECK(segs[1].t_in < segs[0].t_out);  // overlapping ranges
}

TEST_CASE("near tangent segments are dropped") {
    TetMesh mesh = make_unit_tet();
    Ray ray;
    const double delta = 1e-10;
    ray.origin = Vec3{-1.0, delta / 3.0, 1.0 - delta};
    ray.dir = Vec3{1, 0, 0};
    CHECK(intersect_ray(mesh, ray).empty());
}

TEST_CASE("ray starting inside a tet clips at t_min") {
    TetMesh mesh = make_unit_tet();
    Ray ray;
    ray.origin = Vec3{0.2, 0.2, 0.2};
    ray.dir = normalize(Vec3{1, 0.1, 0.05});
    const auto segs = intersect_ray(mesh, ray);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].t_in == doctest::Approx(0.0).epsilon(1e-12));
    const Vec3 p = point_from_barycentric(mesh, 0, segs[0].bary_in);
    CHECK(norm(p - ray.origin) < 1e-9);
}

TEST_CASE("rebuild_with_vertices keeps slot order and rejects inversion") {
    TetMesh mesh = make_grid_mesh(2, 2, 2, Vec3{0, 0, 0}, 1.0, 0.1, 3);
    std::vector<Vec3> moved = mesh.vertices;
    for (Vec3& v : moved) v = Vec3{v.x * 1.3 + 0.2, v.y * 0.9 - 0.1, v.z * 1.1};
    TetMesh warped = rebuild_with_vertices(mesh, moved);
    CHECK(warped.tets == mesh.tets);

    // Collapse every vertex onto a plane: all tets invert or degenerate.
    std::vector<Vec3> flipped = mesh.vertices;
    for (Vec3& v : flipped) v.z = -v.z;
    CHECK_THROWS_AS(rebuild_with_vertices(mesh, flipped), DataError);
    CHECK_THROWS_AS(rebuild_with_vertices(mesh, std::vector<Vec3>(3)), DataError);
}

TEST_CASE("split_tet_8 children tile the parent") {
    TetMesh mesh = make_ball_mesh(Vec3{0, 0, 0}, 1.0);
    const int victim = 5;
    const double parent_vol = mesh.volumes[victim];
    TetMesh split = split_tet_8(mesh, victim);
    CHECK(split.tet_count() == mesh.tet_count() + 7);
    double child_vol = 0.0;
    for (int t = mesh.tet_count() - 1; t < split.tet_count(); ++t) child_vol += split.volumes[t];
    CHECK(child_vol == doctest::Approx(parent_vol).epsilon(1e-9));
    CHECK_FALSE(split.has_overlaps);

    // Points in the parent land in exactly one child.
    Rng rng(8);
    for (int n = 0; n < 500; ++n) {
        double u[3] = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        std::sort(u, u + 3);
        const Bary4 b{u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]};
        const Vec3 p = point_from_barycentric(mesh, victim, b);
        const int got = locate_point(split, p);
        const int want = oracle::brute_force_locate(split.vertices, split.tets, p);
        REQUIRE(got == want);
        REQUIRE(got >= 0);
    }
}

TEST_CASE("tetmesh file round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nimp_geom_test";
    fs::create_directories(dir);
    TetMesh mesh = make_grid_mesh(2, 3, 2, Vec3{-0.3, 0.1, 0.4}, 0.61, 0.17, 23);
    const std::string path = (dir / "mesh.tetmesh").string();
    save_tetmesh(mesh, path);
    TetMesh loaded = load_tetmesh(path);
    REQUIRE(loaded.vertices.size() == mesh.vertices.size());
    REQUIRE(loaded.tets == mesh.tets);
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        REQUIRE(loaded.vertices[i] == mesh.vertices[i]);

    std::vector<std::vector<Vec3>> frames = {mesh.vertices, mesh.vertices};
    for (Vec3& v : frames[1]) v += Vec3{0.01, 0.02, 0.03};
    const std::string fpath = (dir / "frames.tet").string();
    save_vertex_frames(frames, fpath);
    const auto back = load_vertex_frames(fpath);
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < back[1].size(); ++i) REQUIRE(back[1][i] == frames[1][i]);

    CHECK_THROWS_AS(load_tetmesh((dir / "missing.tetmesh").string()), DataError);
    fs::remove_all(dir);
}
