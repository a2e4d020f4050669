// Python bindings for the impostor pipeline. Double precision throughout;
// images cross the boundary as flat row-major RGB lists to keep the module
// dependency-free.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "nimp/editing.hpp"
#include "nimp/procedural.hpp"
#include "nimp/training.hpp"

namespace py = pybind11;
using namespace nimp;

namespace {

using Model = ImpostorModel<double>;

Vec3 to_vec3(const std::array<double, 3>& a) { return Vec3{a[0], a[1], a[2]}; }

std::array<double, 3> from_vec3(const Vec3& v) { return {v.x, v.y, v.z}; }

std::vector<double> flatten_image(const Image& img) {
    std::vector<double> flat;
    flat.reserve(img.pixels.size() * 3);
    for (const Vec3& p : img.pixels) {
        flat.push_back(p.x);
        flat.push_back(p.y);
        flat.push_back(p.z);
    }
    return flat;
}

Image unflatten_image(int width, int height, const std::vector<double>& flat) {
    if (flat.size() != static_cast<size_t>(width) * height * 3)
        throw DataError("pixel list length does not match width*height*3");
    Image img(width, height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = Vec3{flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
    return img;
}

RenderMode mode_from_name(const std::string& name) {
    if (name == "decode-first") return RenderMode::DecodeFirst;
    if (name == "early") return RenderMode::EarlyIntegration;
    throw DataError("unknown render mode '" + name + "'");
}

ModelConfig config_from_kwargs(int levels, int features, int global_log2, int max_res,
                               int sh_degree, int density_hidden, int radiance_hidden,
                               int radiance_layers) {
    ModelConfig cfg;
    cfg.levels = levels;
    cfg.features = features;
    cfg.global_log2 = global_log2;
    cfg.max_res = max_res;
    cfg.sh_degree = sh_degree;
    cfg.density_hidden = density_hidden;
    cfg.radiance_hidden = radiance_hidden;
    cfg.radiance_hidden_layers = radiance_layers;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_nimp, m) {
    m.doc() = "tetrahedral neural impostors: training, rendering, editing";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<TetMesh>(m, "TetMesh")
        .def_property_readonly("vertex_count",
                               [](const TetMesh& mesh) { return mesh.vertex_count(); })
        .def_property_readonly("tet_count",
                               [](const TetMesh& mesh) { return mesh.tet_count(); })
        .def("vertices",
             [](const TetMesh& mesh) {
                 std::vector<std::array<double, 3>> out;
                 out.reserve(mesh.vertices.size());
                 for (const Vec3& v : mesh.vertices) out.push_back(from_vec3(v));
                 return out;
             })
        .def("locate",
             [](const TetMesh& mesh, const std::array<double, 3>& p) {
                 return locate_point(mesh, to_vec3(p));
             },
             py::arg("point"))
        .def("save",
             [](const TetMesh& mesh, const std::string& path) {
                 save_tetmesh(mesh, path);
             },
             py::arg("path"));

    m.def("load_mesh", &load_tetmesh, py::arg("path"));
    m.def(
        "ball_mesh",
        [](const std::array<double, 3>& center, double half_extent) {
            return make_ball_mesh(to_vec3(center), half_extent);
        },
        py::arg("center") = std::array<double, 3>{0.5, 0.5, 0.5},
        py::arg("half_extent") = 0.5);
    m.def(
        "grid_mesh",
        [](int n, const std::array<double, 3>& origin, double cell, double jitter,
           std::uint64_t seed, double keep) {
            return make_grid_mesh(n, n, n, to_vec3(origin), cell, jitter, seed, keep);
        },
        py::arg("n"), py::arg("origin") = std::array<double, 3>{0, 0, 0},
        py::arg("cell") = 0.25, py::arg("jitter") = 0.0, py::arg("seed") = 0,
        py::arg("keep") = 1.0);
    m.def("split_tet", &split_tet_8, py::arg("mesh"), py::arg("tet"));

    py::class_<Camera>(m, "Camera")
        .def_property_readonly("width", [](const Camera& c) { return c.width; })
        .def_property_readonly("height", [](const Camera& c) { return c.height; });

    m.def(
        "look_at",
        [](const std::array<double, 3>& eye, const std::array<double, 3>& target,
           double focal, int width, int height, const std::array<double, 3>& up) {
            return look_at_camera(to_vec3(eye), to_vec3(target), to_vec3(up), focal,
                                  width, height);
        },
        py::arg("eye"), py::arg("target"), py::arg("focal"), py::arg("width"),
        py::arg("height"), py::arg("up") = std::array<double, 3>{0, 0, 1});
    m.def("save_cameras", &save_cameras, py::arg("path"), py::arg("cameras"));
    m.def("load_cameras", &load_cameras, py::arg("path"));

    py::class_<Image>(m, "Image")
        .def(py::init([](int width, int height, const std::vector<double>& pixels) {
                 return unflatten_image(width, height, pixels);
             }),
             py::arg("width"), py::arg("height"), py::arg("pixels"))
        .def_property_readonly("width", [](const Image& i) { return i.width; })
        .def_property_readonly("height", [](const Image& i) { return i.height; })
        .def("pixels", &flatten_image)
        .def("save",
             [](const Image& img, const std::string& path) { save_image(path, img); },
             py::arg("path"));

    m.def("load_image", &load_image, py::arg("path"));
    m.def("mse", &mse, py::arg("a"), py::arg("b"));
    m.def("psnr", &psnr, py::arg("a"), py::arg("b"));

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("view_count",
                               [](const Dataset& d) { return d.cameras.size(); })
        .def_property_readonly("proxy", [](const Dataset& d) { return d.proxy; })
        .def("camera", [](const Dataset& d, int i) { return d.cameras.at(i); },
             py::arg("index"))
        .def("image", [](const Dataset& d, int i) { return d.images.at(i); },
             py::arg("index"))
        .def("save",
             [](const Dataset& d, const std::string& dir) { save_dataset(dir, d); },
             py::arg("dir"));

    m.def("load_dataset", &load_dataset, py::arg("dir"));
    m.def(
        "toy_dataset",
        [](int views, int size, int ref_steps) {
            AnalyticScene scene;
            const TetMesh proxy = make_ball_mesh(Vec3{0.5, 0.5, 0.5}, 0.5);
            return make_dataset(scene, proxy, views, size, Vec3{1, 1, 1}, ref_steps);
        },
        py::arg("views") = 8, py::arg("size") = 64, py::arg("ref_steps") = 256);

    py::class_<Model, std::shared_ptr<Model>>(m, "Model")
        .def_property_readonly("tet_count",
                               [](const Model& m_) { return m_.mesh.tet_count(); })
        .def_property_readonly(
            "feature_dim", [](const Model& m_) { return m_.layout.feature_dim(); })
        .def("vertices",
             [](const Model& m_) {
                 std::vector<std::array<double, 3>> out;
                 out.reserve(m_.mesh.vertices.size());
                 for (const Vec3& v : m_.mesh.vertices) out.push_back(from_vec3(v));
                 return out;
             })
        .def("save",
             [](const Model& m_, const std::string& path) { save_model(path, m_); },
             py::arg("path"))
        .def(
            "render",
            [](const Model& m_, const Camera& cam, const std::array<double, 3>& bg,
               const std::string& mode, int threads) {
                RenderOptions opt;
                opt.background = to_vec3(bg);
                opt.mode = mode_from_name(mode);
                opt.threads = threads;
                return render_image(m_, cam, opt);
            },
            py::arg("camera"), py::arg("background") = std::array<double, 3>{1, 1, 1},
            py::arg("mode") = "decode-first", py::arg("threads") = 0)
        .def(
            "eval_at",
            [](const Model& m_, const std::array<double, 3>& point,
               const std::array<double, 3>& dir) {
                const Vec3 p = to_vec3(point);
                const int tet = locate_point(m_.mesh, p);
                if (tet < 0) throw DataError("point lies outside the proxy mesh");
                const PointSample s =
                    m_.eval_at(tet, barycentric_of_point(m_.mesh, tet, p),
                               normalize(to_vec3(dir)));
                return py::make_tuple(s.sigma, from_vec3(s.rgb));
            },
            py::arg("point"), py::arg("direction"))
        .def(
            "deform",
            [](const Model& m_, const std::vector<std::array<double, 3>>& verts) {
                std::vector<Vec3> moved;
                moved.reserve(verts.size());
                for (const auto& v : verts) moved.push_back(to_vec3(v));
                return deform(m_, moved);
            },
            py::arg("vertices"));

    m.def("load_model", [](const std::string& path) { return load_model<double>(path); },
          py::arg("path"));

    m.def(
        "make_model",
        [](const TetMesh& mesh, int levels, int features, int global_log2, int max_res,
           int sh_degree, int density_hidden, int radiance_hidden, int radiance_layers,
           double base_step, double cone_angle, std::uint64_t seed) {
            Rng rng(seed);
            Model model = make_model<double>(
                mesh,
                config_from_kwargs(levels, features, global_log2, max_res, sh_degree,
                                   density_hidden, radiance_hidden, radiance_layers),
                rng);
            model.sampler.base_step = base_step;
            model.sampler.cone_angle = cone_angle;
            return model;
        },
        py::arg("mesh"), py::arg("levels") = 3, py::arg("features") = 2,
        py::arg("global_log2") = 14, py::arg("max_res") = 8, py::arg("sh_degree") = 2,
        py::arg("density_hidden") = 8, py::arg("radiance_hidden") = 16,
        py::arg("radiance_layers") = 1, py::arg("base_step") = 0.12,
        py::arg("cone_angle") = 0.01, py::arg("seed") = 0);

    m.def(
        "train",
        [](Model& model, const Dataset& data, int steps, int batch, double lr_table,
           double lr_decoder, const std::string& mode, std::uint64_t seed, int threads,
           const std::function<void(int, double)>& progress) {
            TrainConfig cfg;
            cfg.steps = steps;
            cfg.batch_rays = batch;
            cfg.lr_table = lr_table;
            cfg.lr_decoder = lr_decoder;
            cfg.mode = mode_from_name(mode);
            cfg.seed = seed;
            cfg.threads = threads;
            const TrainReport rep = train(model, data, cfg, progress);
            return py::make_tuple(rep.steps_run, rep.final_loss);
        },
        py::arg("model"), py::arg("dataset"), py::arg("steps") = 200,
        py::arg("batch") = 256, py::arg("lr_table") = 1e-2,
        py::arg("lr_decoder") = 1e-3, py::arg("mode") = "decode-first",
        py::arg("seed") = 0, py::arg("threads") = 0,
        py::arg("progress") = std::function<void(int, double)>{});

    m.def(
        "retrain_local",
        [](const Model& source, const TetMesh& new_mesh, int stage1_steps,
           int stage2_steps, std::uint64_t seed, int threads) {
            RetrainConfig cfg;
            cfg.stage1_steps = stage1_steps;
            cfg.stage2_steps = stage2_steps;
            cfg.seed = seed;
            cfg.threads = threads;
            RetrainResult<double> r = retrain_local(source, new_mesh, cfg);
            return py::make_tuple(r.model, r.region, r.stage2_initial, r.stage2_final);
        },
        py::arg("model"), py::arg("mesh"), py::arg("stage1_steps") = 200,
        py::arg("stage2_steps") = 100, py::arg("seed") = 0, py::arg("threads") = 0);
}
