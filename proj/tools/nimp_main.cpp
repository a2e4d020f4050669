// Command-line front end: scene synthesis, training, rendering, editing,
// retraining, composition, and image comparison, wired for scripted use.
// Exit codes: 0 ok, 1 usage, 2 bad data, 3 numerical failure.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "nimp/editing.hpp"
#include "nimp/procedural.hpp"
#include "nimp/training.hpp"

using namespace nimp;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string precision = "double";
};

Vec3 to_vec3(const std::vector<double>& v) { return Vec3{v[0], v[1], v[2]}; }

RenderMode parse_mode(const std::string& word) {
    if (word == "decode-first") return RenderMode::DecodeFirst;
    if (word == "early") return RenderMode::EarlyIntegration;
    throw DataError("unknown render mode '" + word + "' (decode-first|early)");
}

// foo.ppm -> foo_0007.ppm
std::string frame_name(const std::string& base, int index) {
    const fs::path p(base);
    char tag[16];
    std::snprintf(tag, sizeof(tag), "_%04d", index);
    fs::path out = p.parent_path() / (p.stem().string() + tag + p.extension().string());
    return out.string();
}

struct SceneOpts {
    std::string out;
    std::string proxy = "ball";
    int views = 8;
    int holdout = 0;
    int size = 64;
    int grid_n = 3;
    double jitter = 0.2;
    double keep = 1.0;
    double half_extent = 0.5;
    int ref_steps = 256;
    std::vector<double> bg{1, 1, 1};
    bool float_frames = false;
};

TetMesh build_proxy(const SceneOpts& o, std::uint64_t seed) {
    const Vec3 center{0.5, 0.5, 0.5};
    if (o.proxy == "ball") return make_ball_mesh(center, o.half_extent);
    if (o.proxy == "tet") return make_unit_tet();
    if (o.proxy == "grid") {
        const double cell = 2.0 * o.half_extent / o.grid_n;
        const Vec3 origin = center - Vec3{o.half_extent, o.half_extent, o.half_extent};
        return make_grid_mesh(o.grid_n, o.grid_n, o.grid_n, origin, cell, o.jitter,
                              seed, o.keep);
    }
    throw DataError("unknown proxy '" + o.proxy + "' (ball|grid|tet)");
}

int run_gen_scene(const GlobalOpts& g, const SceneOpts& o) {
    AnalyticScene scene;
    const TetMesh proxy = build_proxy(o, g.seed);
    Dataset all = make_dataset(scene, proxy, o.views + o.holdout, o.size,
                               to_vec3(o.bg), o.ref_steps);

    Dataset train = all;
    train.cameras.assign(all.cameras.begin(), all.cameras.begin() + o.views);
    train.images.assign(all.images.begin(), all.images.begin() + o.views);
    save_dataset(o.out, train, o.float_frames);

    if (o.holdout > 0) {
        Dataset held = all;
        held.cameras.assign(all.cameras.begin() + o.views, all.cameras.end());
        held.images.assign(all.images.begin() + o.views, all.images.end());
        save_dataset((fs::path(o.out) / "holdout").string(), held, o.float_frames);
    }
    std::cout << "views=" << o.views << "\n";
    std::cout << "holdout=" << o.holdout << "\n";
    std::cout << "size=" << o.size << "\n";
    std::cout << "tets=" << proxy.tet_count() << "\n";
    std::cout << "out=" << o.out << "\n";
    return 0;
}

struct TrainOpts {
    std::string scene;
    std::string out;
    std::string preset = "default";
    int steps = 5000;
    int batch = 1024;
    double lr_table = 1e-2;
    double lr_decoder = 1e-3;
    std::string mode = "decode-first";
    int log_every = 100;
    // Model shape.
    int levels = -1, features = -1, global_log2 = -1, max_res = -1, sh_degree = -1;
    int density_hidden = -1, radiance_hidden = -1, radiance_layers = -1;
    double base_step = -1, cone_angle = -1;
};

ModelConfig resolve_model_config(const TrainOpts& o) {
    ModelConfig cfg;  // contract defaults
    if (o.preset == "toy") {
        cfg.levels = 3;
        cfg.features = 2;
        cfg.global_log2 = 14;
        cfg.max_res = 8;
        cfg.sh_degree = 2;
        cfg.density_hidden = 8;
        cfg.radiance_hidden = 16;
        cfg.radiance_hidden_layers = 1;
    } else if (o.preset != "default") {
        throw DataError("unknown preset '" + o.preset + "' (default|toy)");
    }
    if (o.levels > 0) cfg.levels = o.levels;
    if (o.features > 0) cfg.features = o.features;
    if (o.global_log2 > 0) cfg.global_log2 = o.global_log2;
    if (o.max_res > 0) cfg.max_res = o.max_res;
    if (o.sh_degree > 0) cfg.sh_degree = o.sh_degree;
    if (o.density_hidden > 0) cfg.density_hidden = o.density_hidden;
    if (o.radiance_hidden > 0) cfg.radiance_hidden = o.radiance_hidden;
    if (o.radiance_layers > 0) cfg.radiance_hidden_layers = o.radiance_layers;
    return cfg;
}

Dataset resolve_dataset(const std::string& scene, std::uint64_t seed) {
    if (scene == "toy" && !fs::exists(scene)) {
        AnalyticScene toy;
        SceneOpts o;
        return make_dataset(toy, build_proxy(o, seed), o.views, o.size, to_vec3(o.bg),
                            o.ref_steps);
    }
    return load_dataset(scene);
}

template <typename T>
int run_train(const GlobalOpts& g, const TrainOpts& o) {
    const Dataset data = resolve_dataset(o.scene, g.seed);
    Rng rng(g.seed);
    ImpostorModel<T> model = make_model<T>(data.proxy, resolve_model_config(o), rng);
    if (o.preset == "toy") {
        model.sampler.base_step = 0.12;
        model.sampler.cone_angle = 0.01;
    }
    if (o.base_step > 0) model.sampler.base_step = o.base_step;
    if (o.cone_angle >= 0) model.sampler.cone_angle = o.cone_angle;

    TrainConfig cfg;
    cfg.steps = o.steps;
    cfg.batch_rays = o.batch;
    cfg.lr_table = o.lr_table;
    cfg.lr_decoder = o.lr_decoder;
    cfg.mode = parse_mode(o.mode);
    cfg.threads = g.threads;
    cfg.seed = g.seed;
    cfg.log_every = o.log_every;

    TrainReport report;
    if (cfg.steps > 0) {  // steps=0 still writes the freshly initialized checkpoint
        report = train(model, data, cfg, [](int step, double loss) {
            std::cout << "step=" << step << " loss=" << loss << "\n";
        });
    }
    save_model(o.out, model);
    std::cout << "steps_run=" << report.steps_run << "\n";
    if (cfg.steps > 0) std::cout << "final_loss=" << report.final_loss << "\n";
    std::cout << "out=" << o.out << "\n";
    return 0;
}

struct RenderOpts {
    std::string model;
    std::string camera;
    std::string out;
    int index = 0;
    bool all = false;
    std::string mode = "decode-first";
    std::vector<double> bg{1, 1, 1};
};

RenderOptions to_render_options(const std::string& mode, const std::vector<double>& bg,
                                int threads) {
    RenderOptions opt;
    opt.mode = parse_mode(mode);
    opt.background = to_vec3(bg);
    opt.threads = threads;
    return opt;
}

template <typename T>
int run_render(const GlobalOpts& g, const RenderOpts& o) {
    const ImpostorModel<T> model = load_model<T>(o.model);
    const std::vector<Camera> cameras = load_cameras(o.camera);
    const RenderOptions opt = to_render_options(o.mode, o.bg, g.threads);
    if (o.all) {
        for (size_t i = 0; i < cameras.size(); ++i) {
            const std::string name = frame_name(o.out, static_cast<int>(i));
            save_image(name, render_image(model, cameras[i], opt));
            std::cout << "file=" << name << "\n";
        }
        return 0;
    }
    if (o.index < 0 || o.index >= static_cast<int>(cameras.size()))
        throw DataError("camera index " + std::to_string(o.index) + " out of range");
    const Camera& cam = cameras[o.index];
    save_image(o.out, render_image(model, cam, opt));
    std::cout << "width=" << cam.width << "\n";
    std::cout << "height=" << cam.height << "\n";
    std::cout << "file=" << o.out << "\n";
    return 0;
}

struct DeformOpts {
    std::string model;
    std::string frames;
    std::string out;
    int frame = -1;  // default: last frame
    std::string camera;
    std::string render_out;
    int index = 0;
    std::string mode = "decode-first";
    std::vector<double> bg{1, 1, 1};
};

template <typename T>
int run_deform(const GlobalOpts& g, const DeformOpts& o) {
    const ImpostorModel<T> model = load_model<T>(o.model);
    const std::vector<std::vector<Vec3>> frames = load_vertex_frames(o.frames);
    if (frames.empty()) throw DataError("frame file is empty: " + o.frames);
    const int last = static_cast<int>(frames.size()) - 1;
    const int pick = o.frame < 0 ? last : o.frame;
    if (pick > last) throw DataError("frame " + std::to_string(pick) + " out of range");

    if (!o.render_out.empty()) {
        if (o.camera.empty()) throw DataError("--render-out needs --camera");
        const std::vector<Camera> cameras = load_cameras(o.camera);
        if (o.index < 0 || o.index >= static_cast<int>(cameras.size()))
            throw DataError("camera index out of range");
        const RenderOptions opt = to_render_options(o.mode, o.bg, g.threads);
        for (size_t f = 0; f < frames.size(); ++f) {
            const ImpostorModel<T> posed = deform(model, frames[f]);
            const std::string name = frame_name(o.render_out, static_cast<int>(f));
            save_image(name, render_image(posed, cameras[o.index], opt));
            std::cout << "file=" << name << "\n";
        }
    }
    if (!o.out.empty()) {
        save_model(o.out, deform(model, frames[pick]));
        std::cout << "frame=" << pick << "\n";
        std::cout << "out=" << o.out << "\n";
    }
    std::cout << "frames=" << frames.size() << "\n";
    return 0;
}

struct BooleanOpts {
    std::string model;
    std::string script;
    std::string camera;
    std::string out;
    int index = 0;
    std::vector<double> bg{1, 1, 1};
};

template <typename T>
int run_boolean(const GlobalOpts& g, const BooleanOpts& o) {
    const ImpostorModel<T> model = load_model<T>(o.model);
    const std::string base = fs::path(o.script).parent_path().string();
    const BooleanField field = fold_boolean_script<T>(
        load_script(o.script), BooleanField::everything(), base);
    const std::vector<Camera> cameras = load_cameras(o.camera);
    if (o.index < 0 || o.index >= static_cast<int>(cameras.size()))
        throw DataError("camera index out of range");
    RenderOptions opt = to_render_options("early", o.bg, g.threads);
    save_image(o.out, render_image_boolean(model, field, cameras[o.index], opt));
    std::cout << "file=" << o.out << "\n";
    return 0;
}

struct BlendOpts {
    std::string a, b;
    std::string mask_a, mask_b;
    std::string camera;
    std::string out;
    int index = 0;
    std::vector<double> bg{1, 1, 1};
};

template <typename T>
int run_blend(const GlobalOpts& g, const BlendOpts& o) {
    const ImpostorModel<T> model_a = load_model<T>(o.a);
    const ImpostorModel<T> model_b = load_model<T>(o.b);
    auto mask_of = [](const std::string& path) {
        if (path.empty()) return BooleanField::everything();
        const std::string base = fs::path(path).parent_path().string();
        return fold_boolean_script<T>(load_script(path), BooleanField::everything(),
                                      base);
    };
    const BooleanField mask_a = mask_of(o.mask_a);
    const BooleanField mask_b = mask_of(o.mask_b);
    const std::vector<Camera> cameras = load_cameras(o.camera);
    if (o.index < 0 || o.index >= static_cast<int>(cameras.size()))
        throw DataError("camera index out of range");
    RenderOptions opt = to_render_options("early", o.bg, g.threads);
    save_image(o.out,
               blend_image(model_a, mask_a, model_b, mask_b, cameras[o.index], opt));
    std::cout << "file=" << o.out << "\n";
    return 0;
}

struct RetrainOpts {
    std::string model;
    std::string mesh;
    std::string out;
    RetrainConfig cfg;
    std::vector<double> bg{1, 1, 1};
};

template <typename T>
int run_retrain(const GlobalOpts& g, const RetrainOpts& o) {
    const ImpostorModel<T> source = load_model<T>(o.model);
    const TetMesh new_mesh = load_tetmesh(o.mesh);
    RetrainConfig cfg = o.cfg;
    cfg.background = to_vec3(o.bg);
    cfg.threads = g.threads;
    cfg.seed = g.seed;
    const RetrainResult<T> result = retrain_local(source, new_mesh, cfg);
    save_model(o.out, result.model);
    std::cout << "region=" << result.region.size() << "\n";
    std::cout << "stage1_initial=" << result.stage1_initial << "\n";
    std::cout << "stage1_final=" << result.stage1_final << "\n";
    std::cout << "stage2_initial=" << result.stage2_initial << "\n";
    std::cout << "stage2_final=" << result.stage2_final << "\n";
    std::cout << "out=" << o.out << "\n";
    return 0;
}

struct ComposeOpts {
    std::string scene;
    std::string camera;
    std::string out;
    int index = 0;
    std::vector<double> bg{1, 1, 1};
};

template <typename T>
int run_compose(const GlobalOpts& g, const ComposeOpts& o) {
    const std::vector<SceneInstance<T>> instances = load_composite_scene<T>(o.scene);
    const std::vector<Camera> cameras = load_cameras(o.camera);
    if (o.index < 0 || o.index >= static_cast<int>(cameras.size()))
        throw DataError("camera index out of range");
    RenderOptions opt;
    opt.background = to_vec3(o.bg);
    opt.threads = g.threads;
    save_image(o.out, compose_image(instances, cameras[o.index], opt));
    std::cout << "instances=" << instances.size() << "\n";
    std::cout << "file=" << o.out << "\n";
    return 0;
}

struct EvalOpts {
    std::string a, b;
};

int run_eval(const EvalOpts& o) {
    const Image a = load_image(o.a);
    const Image b = load_image(o.b);
    char line[64];
    std::snprintf(line, sizeof(line), "psnr=%.1f", psnr(a, b));
    std::cout << line << "\n";
    std::snprintf(line, sizeof(line), "mse=%.17g", mse(a, b));
    std::cout << line << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tetrahedral neural impostor toolkit"};
    app.require_subcommand(1);
    app.set_config("--config")->description("read flags from a file");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "seed for all randomness")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads, 0 = hardware")
        ->capture_default_str();
    app.add_option("--precision", g.precision, "compute precision: float|double")
        ->check(CLI::IsMember({"float", "double"}))
        ->capture_default_str();

    SceneOpts scene;
    CLI::App* c_scene = app.add_subcommand("gen-scene", "synthesize a posed dataset");
    c_scene->add_option("--out", scene.out, "output dataset directory")->required();
    c_scene->add_option("--proxy", scene.proxy, "proxy mesh: ball|grid|tet")
        ->capture_default_str();
    c_scene->add_option("--views", scene.views, "training views")->capture_default_str();
    c_scene->add_option("--holdout", scene.holdout, "extra held-out views")
        ->capture_default_str();
    c_scene->add_option("--size", scene.size, "image width and height")
        ->capture_default_str();
    c_scene->add_option("--grid-n", scene.grid_n, "grid proxy cells per axis")
        ->capture_default_str();
    c_scene->add_option("--jitter", scene.jitter, "grid proxy vertex jitter")
        ->capture_default_str();
    c_scene->add_option("--keep", scene.keep, "grid proxy keep probability")
        ->capture_default_str();
    c_scene->add_option("--half-extent", scene.half_extent, "proxy half extent")
        ->capture_default_str();
    c_scene->add_option("--ref-steps", scene.ref_steps, "reference quadrature steps")
        ->capture_default_str();
    c_scene->add_option("--bg", scene.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();
    c_scene->add_flag("--float-frames", scene.float_frames,
                      "write float frames (.pfm) instead of .ppm");

    TrainOpts tr;
    CLI::App* c_train = app.add_subcommand("train", "fit a model to a dataset");
    c_train->add_option("--scene", tr.scene, "dataset directory, or 'toy'")->required();
    c_train->add_option("--out", tr.out, "output checkpoint (.nimp)")->required();
    c_train->add_option("--preset", tr.preset, "model preset: default|toy")
        ->capture_default_str();
    c_train->add_option("--steps", tr.steps, "optimization steps")
        ->capture_default_str();
    c_train->add_option("--batch", tr.batch, "rays per step")->capture_default_str();
    c_train->add_option("--lr-table", tr.lr_table, "feature table learning rate")
        ->capture_default_str();
    c_train->add_option("--lr-decoder", tr.lr_decoder, "decoder learning rate")
        ->capture_default_str();
    c_train->add_option("--mode", tr.mode, "render mode: decode-first|early")
        ->capture_default_str();
    c_train->add_option("--log-every", tr.log_every, "steps between loss lines")
        ->capture_default_str();
    c_train->add_option("--levels", tr.levels, "hash grid levels");
    c_train->add_option("--features", tr.features, "features per level");
    c_train->add_option("--global-log2", tr.global_log2, "log2 of the table budget");
    c_train->add_option("--max-res", tr.max_res, "finest grid resolution");
    c_train->add_option("--sh-degree", tr.sh_degree, "direction encoding degree");
    c_train->add_option("--density-hidden", tr.density_hidden,
                        "density decoder hidden width");
    c_train->add_option("--radiance-hidden", tr.radiance_hidden,
                        "radiance decoder hidden width");
    c_train->add_option("--radiance-layers", tr.radiance_layers,
                        "radiance decoder hidden layers");
    c_train->add_option("--base-step", tr.base_step, "sampler base step");
    c_train->add_option("--cone-angle", tr.cone_angle, "sampler cone angle");

    RenderOpts rd;
    CLI::App* c_render = app.add_subcommand("render", "render a checkpoint");
    c_render->add_option("--model", rd.model, "checkpoint (.nimp)")->required();
    c_render->add_option("--camera", rd.camera, "camera list file")->required();
    c_render->add_option("--out", rd.out, "output image (.ppm|.pfm)")->required();
    c_render->add_option("--index", rd.index, "camera index")->capture_default_str();
    c_render->add_flag("--all", rd.all, "render every camera to numbered files");
    c_render->add_option("--mode", rd.mode, "render mode: decode-first|early")
        ->capture_default_str();
    c_render->add_option("--bg", rd.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();

    DeformOpts df;
    CLI::App* c_deform = app.add_subcommand("deform", "move the proxy vertices");
    c_deform->add_option("--model", df.model, "checkpoint (.nimp)")->required();
    c_deform->add_option("--frames", df.frames, "vertex frame file")->required();
    c_deform->add_option("--out", df.out, "checkpoint for the picked frame");
    c_deform->add_option("--frame", df.frame, "frame to keep, -1 = last")
        ->capture_default_str();
    c_deform->add_option("--camera", df.camera, "camera list for frame renders");
    c_deform->add_option("--render-out", df.render_out,
                         "base image name for per-frame renders");
    c_deform->add_option("--index", df.index, "camera index")->capture_default_str();
    c_deform->add_option("--mode", df.mode, "render mode: decode-first|early")
        ->capture_default_str();
    c_deform->add_option("--bg", df.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();

    BooleanOpts bo;
    CLI::App* c_bool = app.add_subcommand("boolean", "render a region-edited model");
    c_bool->add_option("--model", bo.model, "checkpoint (.nimp)")->required();
    c_bool->add_option("--script", bo.script, "boolean op script")->required();
    c_bool->add_option("--camera", bo.camera, "camera list file")->required();
    c_bool->add_option("--out", bo.out, "output image")->required();
    c_bool->add_option("--index", bo.index, "camera index")->capture_default_str();
    c_bool->add_option("--bg", bo.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();

    BlendOpts bl;
    CLI::App* c_blend = app.add_subcommand("blend", "blend two masked models");
    c_blend->add_option("--a", bl.a, "first checkpoint")->required();
    c_blend->add_option("--b", bl.b, "second checkpoint")->required();
    c_blend->add_option("--mask-a", bl.mask_a, "boolean script for the first model");
    c_blend->add_option("--mask-b", bl.mask_b, "boolean script for the second model");
    c_blend->add_option("--camera", bl.camera, "camera list file")->required();
    c_blend->add_option("--out", bl.out, "output image")->required();
    c_blend->add_option("--index", bl.index, "camera index")->capture_default_str();
    c_blend->add_option("--bg", bl.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();

    RetrainOpts rt;
    CLI::App* c_retrain =
        app.add_subcommand("retrain", "transfer features onto an edited proxy");
    c_retrain->add_option("--model", rt.model, "source checkpoint")->required();
    c_retrain->add_option("--mesh", rt.mesh, "edited proxy (.tetmesh)")->required();
    c_retrain->add_option("--out", rt.out, "output checkpoint")->required();
    c_retrain->add_option("--stage1-points", rt.cfg.stage1_points,
                          "feature matching points")
        ->capture_default_str();
    c_retrain->add_option("--stage1-steps", rt.cfg.stage1_steps, "feature match steps")
        ->capture_default_str();
    c_retrain->add_option("--stage1-batch", rt.cfg.stage1_batch, "feature match batch")
        ->capture_default_str();
    c_retrain->add_option("--stage1-lr", rt.cfg.stage1_lr, "feature match rate")
        ->capture_default_str();
    c_retrain->add_option("--stage2-cameras", rt.cfg.stage2_cameras,
                          "color match cameras")
        ->capture_default_str();
    c_retrain->add_option("--stage2-size", rt.cfg.stage2_size, "color match image size")
        ->capture_default_str();
    c_retrain->add_option("--stage2-steps", rt.cfg.stage2_steps, "color match steps")
        ->capture_default_str();
    c_retrain->add_option("--stage2-batch", rt.cfg.stage2_batch, "color match batch")
        ->capture_default_str();
    c_retrain->add_option("--stage2-lr", rt.cfg.stage2_lr, "color match rate")
        ->capture_default_str();
    c_retrain->add_option("--bg", rt.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();

    ComposeOpts co;
    CLI::App* c_compose = app.add_subcommand("compose", "render a multi-model scene");
    c_compose->add_option("--scene", co.scene, "composite scene file")->required();
    c_compose->add_option("--camera", co.camera, "camera list file")->required();
    c_compose->add_option("--out", co.out, "output image")->required();
    c_compose->add_option("--index", co.index, "camera index")->capture_default_str();
    c_compose->add_option("--bg", co.bg, "background color r g b")
        ->expected(3)
        ->capture_default_str();

    EvalOpts ev;
    CLI::App* c_eval = app.add_subcommand("eval", "compare two images");
    c_eval->add_option("--a", ev.a, "first image")->required();
    c_eval->add_option("--b", ev.b, "second image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const bool use_double = g.precision == "double";
    try {
        if (*c_scene) return run_gen_scene(g, scene);
        if (*c_train) return use_double ? run_train<double>(g, tr) : run_train<float>(g, tr);
        if (*c_render)
            return use_double ? run_render<double>(g, rd) : run_render<float>(g, rd);
        if (*c_deform)
            return use_double ? run_deform<double>(g, df) : run_deform<float>(g, df);
        if (*c_bool)
            return use_double ? run_boolean<double>(g, bo) : run_boolean<float>(g, bo);
        if (*c_blend)
            return use_double ? run_blend<double>(g, bl) : run_blend<float>(g, bl);
        if (*c_retrain)
            return use_double ? run_retrain<double>(g, rt) : run_retrain<float>(g, rt);
        if (*c_compose)
            return use_double ? run_compose<double>(g, co) : run_compose<float>(g, co);
        if (*c_eval) return run_eval(ev);
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
