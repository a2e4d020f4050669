#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nimp/editing.hpp"
#include "nimp/procedural.hpp"
#include "support/oracles.hpp"

using namespace nimp;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.levels = 2;
    cfg.features = 2;
    cfg.global_log2 = 10;
    cfg.sh_degree = 2;
    cfg.density_hidden = 4;
    cfg.radiance_hidden = 8;
    cfg.radiance_hidden_layers = 1;
    return cfg;
}

// A model with visible structure: random features at a usable scale and a
// mid-range density so renders carry contrast.
ImpostorModel<double> textured_model(const TetMesh& mesh, std::uint64_t seed,
                                     double density_bias = 0.0) {
    Rng rng(seed);
    ImpostorModel<double> model = make_model<double>(mesh, small_config(), rng);
    model.table.init_uniform(rng, 0.4);
    model.density_net.biases[1][0] = density_bias;
    model.sampler.base_step = 0.1;
    model.sampler.cone_angle = 0.02;
    return model;
}

double max_pixel_delta(const Image& a, const Image& b) {
    REQUIRE(a.width == b.width);
    REQUIRE(a.height == b.height);
    double worst = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(a.pixels[i][c] - b.pixels[i][c]));
    return worst;
}

void require_identical(const Image& a, const Image& b) {
    REQUIRE(a.pixels.size() == b.pixels.size());
    for (size_t i = 0; i < a.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) REQUIRE(a.pixels[i][c] == b.pixels[i][c]);
}

Camera ball_camera(int size = 16) {
    return look_at_camera(Vec3{0.5, -1.4, 1.2}, Vec3{0.5, 0.5, 0.5}, Vec3{0, 0, 1},
                          double(size), size, size);
}

}  // namespace

TEST_CASE("identity deformation renders bit-identically") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> model = textured_model(mesh, 31);
    const ImpostorModel<double> same = deform(model, mesh.vertices);
    const RenderOptions opt{RenderMode::DecodeFirst, Vec3{1, 1, 1}, 1};
    require_identical(render_image(model, ball_camera(), opt),
                      render_image(same, ball_camera(), opt));
}

TEST_CASE("encoded features ignore vertex positions") {
    const TetMesh mesh = make_grid_mesh(2, 2, 2, Vec3{0, 0, 0}, 0.5, 0.2, 7);
    const ImpostorModel<double> model = textured_model(mesh, 32);

    Rng rng(5);
    std::vector<Vec3> moved = mesh.vertices;
    for (Vec3& v : moved)
        v += Vec3{rng.uniform(0, 0.04), rng.uniform(0, 0.04), rng.uniform(0, 0.04)};
    const ImpostorModel<double> warped = deform(model, moved);

    const int fd = model.feature_dim();
    std::vector<double> fa(fd), fb(fd);
    for (int probe = 0; probe < 200; ++probe) {
        const int tet = static_cast<int>(rng.uniform_index(mesh.tets.size()));
        Bary4 b;
        double u[3] = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        std::sort(u, u + 3);
        b = Bary4{u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]};
        model.encode(tet, b, fa.data());
        warped.encode(tet, b, fb.data());
        for (int k = 0; k < fd; ++k) REQUIRE(fa[k] == fb[k]);
    }
}

TEST_CASE("deformation rejects bad frames") {
    const TetMesh mesh = make_unit_tet();
    const ImpostorModel<double> model = textured_model(mesh, 33);

    std::vector<Vec3> short_frame(mesh.vertices.begin(), mesh.vertices.end() - 1);
    CHECK_THROWS_AS(deform(model, short_frame), DataError);

    std::vector<Vec3> flipped = mesh.vertices;
    flipped[3] = Vec3{0, 0, -1};  // apex pushed through the base plane
    try {
        deform(model, flipped);
        FAIL("expected an inversion error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("inverted") != std::string::npos);
        CHECK(std::string(e.what()).find("0") != std::string::npos);
    }
}

TEST_CASE("uniform scale with a matched camera reproduces the image") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> model = textured_model(mesh, 34);

    std::vector<Vec3> scaled = mesh.vertices;
    for (Vec3& v : scaled) v = v * 2.0;
    const ImpostorModel<double> big = deform(model, scaled);

    const int size = 16;
    const Camera cam = look_at_camera(Vec3{0.5, -1.4, 1.2}, Vec3{0.5, 0.5, 0.5},
                                      Vec3{0, 0, 1}, double(size), size, size);
    const Camera cam2 = look_at_camera(Vec3{1.0, -2.8, 2.4}, Vec3{1.0, 1.0, 1.0},
                                       Vec3{0, 0, 1}, double(size), size, size);
    const RenderOptions opt{RenderMode::DecodeFirst, Vec3{0.2, 0.6, 0.9}, 1};
    CHECK(max_pixel_delta(render_image(model, cam, opt), render_image(big, cam2, opt)) <
          1e-6);
}

TEST_CASE("general affine warp with the view term held matches per ray") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> model = textured_model(mesh, 35);

    const Mat3 warp = Mat3::from_rows(Vec3{1.3, 0.2, 0.0}, Vec3{0.0, 0.8, 0.1},
                                      Vec3{-0.1, 0.0, 1.1});
    const Vec3 shift{0.3, -0.2, 0.15};
    std::vector<Vec3> moved = mesh.vertices;
    for (Vec3& v : moved) v = warp * v + shift;
    const ImpostorModel<double> warped = deform(model, moved);

    Rng rng(6);
    for (int probe = 0; probe < 32; ++probe) {
        Ray ray;
        ray.origin = Vec3{rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), -0.8};
        ray.dir = normalize(
            Vec3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 1.0});
        Ray moved_ray;
        moved_ray.origin = warp * ray.origin + shift;
        moved_ray.dir = warp * ray.dir;  // unnormalized keeps the parameter

        RenderOptions opt{RenderMode::DecodeFirst, Vec3{1, 0, 0}, 1};
        opt.lock_direction = true;
        opt.locked_direction = ray.dir;
        const Vec3 a = render_ray(model, ray, opt);
        const Vec3 b = render_ray(warped, moved_ray, opt);
        for (int c = 0; c < 3; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-6));
    }
}

TEST_CASE("boolean status thresholds the decoded density") {
    const TetMesh mesh = make_unit_tet();
    ImpostorModel<double> model = textured_model(mesh, 36);
    const Bary4 mid{0.25, 0.25, 0.25, 0.25};

    // Density saturated to an exact zero: outside for every threshold.
    model.density_net.biases[1][0] = -800.0;
    CHECK(model.sigma_at(0, mid) == 0.0);
    CHECK(boolean_status(model, 0, mid, 0.0) == 0);

    // Any positive density clears a zero threshold everywhere.
    model.density_net.biases[1][0] = 0.0;
    CHECK(boolean_status(model, 0, mid, 0.0) == 1);

    // Raising the threshold can only turn points off.
    int prev = 1;
    for (double eps : {0.0, 0.01, 0.1, 1.0, 10.0, 1e6}) {
        const int now = boolean_status(model, 0, mid, eps);
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("boolean operators follow their truth tables") {
    const Vec3 p{0, 0, 0};
    const BooleanField zero = BooleanField::nothing();
    const BooleanField one = BooleanField::everything();
    const BooleanField* vals[2] = {&zero, &one};
    const int expect_union[2][2] = {{0, 1}, {1, 1}};
    const int expect_inter[2][2] = {{0, 0}, {0, 1}};
    const int expect_diff[2][2] = {{0, 0}, {1, 0}};
    const int expect_xor[2][2] = {{0, 1}, {1, 0}};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            CHECK(BooleanField::combine(*vals[a], *vals[b], BoolOp::Union)(p) ==
                  expect_union[a][b]);
            CHECK(BooleanField::combine(*vals[a], *vals[b], BoolOp::Intersect)(p) ==
                  expect_inter[a][b]);
            CHECK(BooleanField::combine(*vals[a], *vals[b], BoolOp::Difference)(p) ==
                  expect_diff[a][b]);
            CHECK(BooleanField::combine(*vals[a], *vals[b], BoolOp::Xor)(p) ==
                  expect_xor[a][b]);
        }
}

TEST_CASE("boolean algebra laws hold at random points") {
    const BooleanField a = BooleanField::sphere(Vec3{0.3, 0.4, 0.5}, 0.35);
    const BooleanField b = BooleanField::box(Vec3{0.2, 0.1, 0.2}, Vec3{0.9, 0.8, 0.7});
    const BooleanField c = BooleanField::sphere(Vec3{0.7, 0.6, 0.4}, 0.3);
    auto un = [](const BooleanField& x, const BooleanField& y) {
        return BooleanField::combine(x, y, BoolOp::Union);
    };
    auto in = [](const BooleanField& x, const BooleanField& y) {
        return BooleanField::combine(x, y, BoolOp::Intersect);
    };
    auto df = [](const BooleanField& x, const BooleanField& y) {
        return BooleanField::combine(x, y, BoolOp::Difference);
    };
    const BooleanField all = BooleanField::everything();
    auto neg = [&](const BooleanField& x) { return df(all, x); };

    const BooleanField laws[] = {
        un(a, a), in(a, a),                        // idempotent, = a
        un(a, b), un(b, a),                        // commutative pair
        in(a, b), in(b, a),
        un(un(a, b), c), un(a, un(b, c)),          // associative pairs
        in(in(a, b), c), in(a, in(b, c)),
        df(a, a),                                  // empty
        BooleanField::combine(a, a, BoolOp::Xor),  // empty
        neg(un(a, b)), in(neg(a), neg(b)),         // De Morgan pair
    };

    Rng rng(99);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 p{rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2),
                     rng.uniform(-0.2, 1.2)};
        const int va = a(p);
        REQUIRE(laws[0](p) == va);
        REQUIRE(laws[1](p) == va);
        REQUIRE(laws[2](p) == laws[3](p));
        REQUIRE(laws[4](p) == laws[5](p));
        REQUIRE(laws[6](p) == laws[7](p));
        REQUIRE(laws[8](p) == laws[9](p));
        REQUIRE(laws[10](p) == 0);
        REQUIRE(laws[11](p) == 0);
        REQUIRE(laws[12](p) == laws[13](p));
    }
}

TEST_CASE("stamp leaf reads the mask through its window") {
    Image mask(2, 2);
    mask.at(0, 0) = Vec3{1, 1, 1};
    mask.at(1, 0) = Vec3{0, 0, 0};
    mask.at(0, 1) = Vec3{0, 0, 0};
    mask.at(1, 1) = Vec3{1, 1, 1};
    const BooleanField f =
        BooleanField::stamp(mask, Vec3{0, 0, -0.5}, Vec3{1, 1, 0.5});
    CHECK(f(Vec3{0.25, 0.25, 0.0}) == 1);
    CHECK(f(Vec3{0.75, 0.25, 0.0}) == 0);
    CHECK(f(Vec3{0.25, 0.75, 0.0}) == 0);
    CHECK(f(Vec3{0.75, 0.75, 0.0}) == 1);
    CHECK(f(Vec3{0.25, 0.25, 0.9}) == 0);   // outside the z window
    CHECK(f(Vec3{-0.1, 0.25, 0.0}) == 0);   // outside the xy window
}

TEST_CASE("model density leaf respects the proxy boundary") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.4);
    auto model = std::make_shared<const ImpostorModel<double>>(textured_model(mesh, 37));
    const BooleanField solid = BooleanField::density(model, 1e-6);
    CHECK(solid(Vec3{0.5, 0.5, 0.5}) == 1);
    CHECK(solid(Vec3{2.0, 2.0, 2.0}) == 0);  // outside the proxy
    const BooleanField strict = BooleanField::density(model, 1e9);
    CHECK(strict(Vec3{0.5, 0.5, 0.5}) == 0);
}

TEST_CASE("full and empty fields bracket the masked render") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> model = textured_model(mesh, 38);
    const Camera cam = ball_camera();
    const RenderOptions opt{RenderMode::EarlyIntegration, Vec3{0.3, 0.7, 0.2}, 1};

    require_identical(
        render_image_boolean(model, BooleanField::everything(), cam, opt),
        render_image(model, cam, opt));

    const Image empty = render_image_boolean(model, BooleanField::nothing(), cam, opt);
    for (const Vec3& px : empty.pixels)
        for (int c = 0; c < 3; ++c) REQUIRE(px[c] == opt.background[c]);
}

TEST_CASE("complementary masks reconstruct the thin render") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    // Optically thin so the two passes add almost linearly.
    const ImpostorModel<double> model = textured_model(mesh, 39, std::log(0.01));
    const BooleanField cut = BooleanField::sphere(Vec3{0.45, 0.5, 0.55}, 0.25);
    const BooleanField rest =
        BooleanField::combine(BooleanField::everything(), cut, BoolOp::Difference);

    const Camera cam = ball_camera();
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const Ray ray = cam.ray_through(x, y);
            const MaskedColor whole =
                masked_render_ray(model, BooleanField::everything(), ray);
            const MaskedColor inside = masked_render_ray(model, cut, ray);
            const MaskedColor outside = masked_render_ray(model, rest, ray);
            // Per-sample densities split exactly, so transmittances factor.
            REQUIRE(whole.transmittance ==
                    doctest::Approx(inside.transmittance * outside.transmittance)
                        .epsilon(1e-12));
            for (int c = 0; c < 3; ++c)
                REQUIRE(inside.color[c] + outside.color[c] ==
                        doctest::Approx(whole.color[c]).epsilon(1e-3));
        }
}

TEST_CASE("blend with one empty mask is the other masked render") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> a = textured_model(mesh, 40);
    const ImpostorModel<double> b = textured_model(mesh, 41);
    const BooleanField mask = BooleanField::sphere(Vec3{0.5, 0.5, 0.5}, 0.3);
    const Vec3 bg{0.9, 0.2, 0.4};
    const Camera cam = ball_camera(12);
    RenderOptions opt{RenderMode::EarlyIntegration, bg, 1};

    const Image blended =
        blend_image(a, mask, b, BooleanField::nothing(), cam, opt);
    const Image solo = render_image_boolean(a, mask, cam, opt);
    CHECK(max_pixel_delta(blended, solo) < 1e-15);
}

TEST_CASE("disjoint masks blend additively over black") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> a = textured_model(mesh, 42);
    const ImpostorModel<double> b = textured_model(mesh, 43);
    const BooleanField left = BooleanField::box(Vec3{0, 0, 0}, Vec3{0.5, 1, 1});
    const BooleanField right = BooleanField::box(Vec3{0.5, 0, 0}, Vec3{1, 1, 1});
    const Camera cam = ball_camera(12);
    const Vec3 black{0, 0, 0};

    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const Ray ray = cam.ray_through(x, y);
            const Vec3 mix = blend_ray(a, left, b, right, ray, black);
            const Vec3 pa = masked_render_ray(a, left, ray).color;
            const Vec3 pb = masked_render_ray(b, right, ray).color;
            for (int c = 0; c < 3; ++c) REQUIRE(mix[c] == pa[c] + pb[c]);
        }
}

TEST_CASE("single identity instance composes exactly like a plain render") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    auto model = std::make_shared<const ImpostorModel<double>>(textured_model(mesh, 44));
    const std::vector<SceneInstance<double>> scene{{model, Affine{}}};
    const Camera cam = ball_camera();
    const RenderOptions opt{RenderMode::DecodeFirst, Vec3{0.1, 0.5, 0.9}, 1};
    require_identical(compose_image(scene, cam, opt), render_image(*model, cam, opt));
}

TEST_CASE("translated instance with a translated camera matches") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    auto model = std::make_shared<const ImpostorModel<double>>(textured_model(mesh, 45));
    Affine shift;
    shift.translation = Vec3{2.5, -1.0, 0.75};
    const std::vector<SceneInstance<double>> scene{{model, shift}};

    const Camera cam = ball_camera();
    Camera moved_cam = cam;
    moved_cam.position = cam.position + shift.translation;

    const RenderOptions opt{RenderMode::DecodeFirst, Vec3{1, 1, 1}, 1};
    CHECK(max_pixel_delta(compose_image(scene, moved_cam, opt),
                          render_image(*model, cam, opt)) < 1e-9);
}

TEST_CASE("disjoint instances composite front to back") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    ImpostorModel<double> near_model = textured_model(mesh, 46);
    ImpostorModel<double> far_model = textured_model(mesh, 47);
    // Uniform steps so standalone sampling matches the merged stream.
    near_model.sampler.cone_angle = 0.0;
    far_model.sampler.cone_angle = 0.0;
    auto near_ptr = std::make_shared<const ImpostorModel<double>>(near_model);
    auto far_ptr = std::make_shared<const ImpostorModel<double>>(far_model);

    Affine behind;
    behind.translation = Vec3{0, 3.0, 0};  // pushed away from the camera
    const std::vector<SceneInstance<double>> scene{{near_ptr, Affine{}},
                                                   {far_ptr, behind}};

    const Camera cam = look_at_camera(Vec3{0.5, -1.6, 0.5}, Vec3{0.5, 0.5, 0.5},
                                      Vec3{0, 0, 1}, 16.0, 12, 12);
    const Vec3 bg{0.25, 0.5, 0.75};
    RenderOptions opt{RenderMode::DecodeFirst, bg, 1};

    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const Ray ray = cam.ray_through(x, y);
            const Vec3 got = compose_ray(scene, ray, opt);

            RenderOptions solo = opt;
            solo.background = Vec3{0, 0, 0};
            const Vec3 c_near = render_ray(*near_ptr, ray, solo);
            Ray far_ray = ray;
            far_ray.origin = ray.origin - behind.translation;
            const Vec3 c_far = render_ray(*far_ptr, far_ray, solo);
            solo.background = Vec3{1, 1, 1};
            const double t_near =
                render_ray(*near_ptr, ray, solo).x - c_near.x;
            const double t_far = render_ray(*far_ptr, far_ray, solo).x - c_far.x;

            const Vec3 want = c_near + (c_far + bg * t_far) * t_near;
            for (int c = 0; c < 3; ++c)
                REQUIRE(got[c] == doctest::Approx(want[c]).epsilon(1e-9));
        }
}

TEST_CASE("an occluded instance contributes nothing") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    ImpostorModel<double> wall = textured_model(mesh, 48, 25.0);  // saturated wall
    auto wall_ptr = std::make_shared<const ImpostorModel<double>>(wall);
    auto hidden = std::make_shared<const ImpostorModel<double>>(textured_model(mesh, 49));

    Affine behind;
    behind.translation = Vec3{0, 2.0, 0};
    const std::vector<SceneInstance<double>> with{{wall_ptr, Affine{}},
                                                  {hidden, behind}};
    const std::vector<SceneInstance<double>> without{{wall_ptr, Affine{}}};

    const Camera cam = look_at_camera(Vec3{0.5, -1.6, 0.5}, Vec3{0.5, 0.5, 0.5},
                                      Vec3{0, 0, 1}, 16.0, 10, 10);
    const RenderOptions opt{RenderMode::DecodeFirst, Vec3{1, 1, 1}, 1};
    CHECK(max_pixel_delta(compose_image(with, cam, opt),
                          compose_image(without, cam, opt)) < 1e-4);
}

TEST_CASE("interpolated deformation sequences stay steady") {
    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    const ImpostorModel<double> model = textured_model(mesh, 50);

    std::vector<Vec3> target = mesh.vertices;
    Rng rng(8);
    for (Vec3& v : target)
        v += Vec3{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                  rng.uniform(-0.05, 0.05)};

    const Camera cam = ball_camera(14);
    const RenderOptions opt{RenderMode::DecodeFirst, Vec3{1, 1, 1}, 1};
    const int frames = 21;
    std::vector<Image> sequence;
    for (int f = 0; f < frames; ++f) {
        const double t = double(f) / (frames - 1);
        std::vector<Vec3> verts(mesh.vertices.size());
        for (size_t i = 0; i < verts.size(); ++i)
            verts[i] = mesh.vertices[i] * (1.0 - t) + target[i] * t;
        sequence.push_back(render_image(deform(model, verts), cam, opt));
    }

    std::vector<double> deltas;
    for (int f = 1; f < frames; ++f) {
        double acc = 0.0;
        for (size_t i = 0; i < sequence[f].pixels.size(); ++i)
            for (int c = 0; c < 3; ++c)
                acc += std::abs(sequence[f].pixels[i][c] - sequence[f - 1].pixels[i][c]);
        deltas.push_back(acc / (sequence[f].pixels.size() * 3));
    }
    std::vector<double> sorted = deltas;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    CHECK(median > 0.0);
    for (double d : deltas) CHECK(d <= 3.0 * median);
}

TEST_CASE("scripts tokenize with comments and line numbers") {
    std::istringstream in(
        "# heading comment\n"
        "\n"
        "union sphere 0.5 0.5 0.5 0.25\n"
        "diff box 0 0 0 1 1 1   # trailing note\n");
    const auto cmds = parse_script(in);
    REQUIRE(cmds.size() == 2);
    CHECK(cmds[0].op == "union");
    CHECK(cmds[0].line == 3);
    REQUIRE(cmds[0].args.size() == 5);
    CHECK(cmds[0].args[0] == "sphere");
    CHECK(cmds[1].op == "diff");
    CHECK(cmds[1].line == 4);
    CHECK(cmds[1].args.size() == 7);
}

TEST_CASE("boolean scripts fold onto a field") {
    CHECK(parse_bool_op("union") == BoolOp::Union);
    CHECK(parse_bool_op("inter") == BoolOp::Intersect);
    CHECK(parse_bool_op("diff") == BoolOp::Difference);
    CHECK(parse_bool_op("xor") == BoolOp::Xor);
    CHECK_THROWS_AS(parse_bool_op("nand"), DataError);

    std::istringstream in(
        "diff sphere 0.5 0.5 0.5 0.2\n"
        "inter box 0 0 0 1 1 1\n");
    const BooleanField field =
        fold_boolean_script<double>(parse_script(in), BooleanField::everything());
    CHECK(field(Vec3{0.5, 0.5, 0.5}) == 0);  // carved out by the sphere
    CHECK(field(Vec3{0.9, 0.9, 0.9}) == 1);  // inside the box, outside the sphere
    CHECK(field(Vec3{1.5, 0.5, 0.5}) == 0);  // clipped by the box

    std::istringstream bad("union sphere 0.5 oops 0.5 0.2\n");
    try {
        fold_boolean_script<double>(parse_script(bad), BooleanField::everything());
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("composite scenes load from files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nimp_edit_scratch";
    fs::create_directories(dir);

    const TetMesh mesh = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
    save_model((dir / "toy.nimp").string(), textured_model(mesh, 51));

    {
        std::ofstream out(dir / "scene.txt");
        out << "# two placed copies\n";
        out << "instance toy.nimp 1 0 0 0 1 0 0 0 1 0 0 0\n";
        out << "instance toy.nimp 0.5 0 0 0 0.5 0 0 0 0.5 2 0 0\n";
    }
    const auto scene = load_composite_scene<double>((dir / "scene.txt").string());
    REQUIRE(scene.size() == 2);
    CHECK(scene[0].to_world.is_identity());
    CHECK(scene[1].to_world.translation.x == 2.0);
    CHECK(scene[1].model->mesh.tet_count() == mesh.tet_count());

    const Camera cam = ball_camera(8);
    const Image img = compose_image(scene, cam, RenderOptions{});
    for (const Vec3& px : img.pixels)
        for (int c = 0; c < 3; ++c) CHECK(std::isfinite(px[c]));

    {
        std::ofstream out(dir / "bad.txt");
        out << "instance toy.nimp 0 0 0 0 0 0 0 0 0 0 0 0\n";
    }
    CHECK_THROWS_AS(load_composite_scene<double>((dir / "bad.txt").string()), DataError);
    {
        std::ofstream out(dir / "bad2.txt");
        out << "prop toy.nimp 1 0 0 0 1 0 0 0 1 0 0 0\n";
    }
    CHECK_THROWS_AS(load_composite_scene<double>((dir / "bad2.txt").string()),
                    DataError);
    fs::remove_all(dir);
}
