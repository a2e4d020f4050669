#include "nimp/scene.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "nimp/error.hpp"

namespace nimp {

double AnalyticScene::sigma(const Vec3& p) const {
    if (!bounds.contains(p)) return 0.0;
    const Vec3 d = p - center;
    return peak_sigma * std::exp(-dot(d, d) / (2.0 * radius * radius));
}

Vec3 AnalyticScene::color(const Vec3& p, const Vec3& dir) const {
    const Vec3 e = bounds.extent();
    const Vec3 q{(p.x - bounds.lo.x) / e.x, (p.y - bounds.lo.y) / e.y,
                 (p.z - bounds.lo.z) / e.z};
    return Vec3{0.25 + 0.5 * q.x + 0.15 * dir.x, 0.25 + 0.5 * q.y + 0.15 * dir.y,
                0.25 + 0.5 * q.z + 0.15 * dir.z};
}

Vec3 render_reference_ray(const AnalyticScene& scene, const Ray& ray,
                          const Vec3& background, int steps) {
    if (steps < 1) throw DataError("reference renderer needs at least one step");
    double t0 = ray.t_min, t1 = ray.t_max;
    if (!clip_ray_aabb(ray.origin, ray.dir, scene.bounds, t0, t1))
        return background;
    const double dt = (t1 - t0) / steps;
    double transmittance = 1.0;
    Vec3 color{0, 0, 0};
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + (i + 0.5) * dt;
        const Vec3 p = ray.origin + ray.dir * t;
        const double tau = scene.sigma(p) * dt;
        const double a = -std::expm1(-tau);
        color += scene.color(p, ray.dir) * (transmittance * a);
        transmittance *= std::exp(-tau);
    }
    return color + background * transmittance;
}

Image render_reference(const AnalyticScene& scene, const Camera& camera,
                       const Vec3& background, int steps, int threads) {
    Image image(camera.width, camera.height);
    int n_threads =
        threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min(n_threads, std::max(1, camera.height));
    auto worker = [&](int first_row) {
        for (int y = first_row; y < camera.height; y += n_threads)
            for (int x = 0; x < camera.width; ++x)
                image.at(x, y) =
                    render_reference_ray(scene, camera.ray_through(x, y), background, steps);
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker, k);
        for (auto& t : pool) t.join();
    }
    return image;
}

std::vector<Camera> make_orbit_cameras(const Aabb& bounds, int count, int size,
                                       double distance_scale) {
    if (count < 1) throw DataError("camera orbit needs at least one view");
    const Vec3 target = (bounds.lo + bounds.hi) * 0.5;
    const double dist = distance_scale * bounds.diag();
    const double focal = size / (2.0 * std::tan(25.0 * M_PI / 180.0));
    std::vector<Camera> cameras;
    cameras.reserve(count);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        // Fibonacci sphere, poles excluded so the up vector never degenerates.
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        const Vec3 dir{r * std::cos(phi), r * std::sin(phi), z};
        const Vec3 eye = target + dir * dist;
        const Vec3 up = std::abs(dir.z) > 0.98 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
        cameras.push_back(look_at_camera(eye, target, up, focal, size, size));
    }
    return cameras;
}

Dataset make_dataset(const AnalyticScene& scene, const TetMesh& proxy, int views,
                     int size, const Vec3& background, int steps) {
    Dataset dataset;
    dataset.proxy = proxy;
    dataset.background = background;
    dataset.cameras = make_orbit_cameras(scene.bounds, views, size);
    dataset.images.reserve(views);
    for (const Camera& cam : dataset.cameras)
        dataset.images.push_back(render_reference(scene, cam, background, steps));
    return dataset;
}

namespace {

std::string frame_name(size_t index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04zu.%s", index, ext);
    return buf;
}

}  // namespace

void save_dataset(const std::string& dir, const Dataset& dataset, bool float_frames) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_cameras((fs::path(dir) / "cameras.txt").string(), dataset.cameras);
    save_tetmesh(dataset.proxy, (fs::path(dir) / "proxy.tetmesh").string());
    {
        std::ofstream out(fs::path(dir) / "scene.txt");
        out.precision(17);
        out << "background " << dataset.background.x << " " << dataset.background.y
            << " " << dataset.background.z << "\n";
        if (!out) throw DataError("cannot write scene description in " + dir);
    }
    const char* ext = float_frames ? "pfm" : "ppm";
    for (size_t i = 0; i < dataset.images.size(); ++i)
        save_image((fs::path(dir) / frame_name(i, ext)).string(), dataset.images[i]);
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    Dataset dataset;
    dataset.cameras = load_cameras((fs::path(dir) / "cameras.txt").string());
    dataset.proxy = load_tetmesh((fs::path(dir) / "proxy.tetmesh").string());
    {
        std::ifstream in(fs::path(dir) / "scene.txt");
        std::string tag;
        if (!(in >> tag >> dataset.background.x >> dataset.background.y >>
              dataset.background.z) ||
            tag != "background")
            throw DataError("malformed scene description in " + dir);
    }
    dataset.images.reserve(dataset.cameras.size());
    for (size_t i = 0; i < dataset.cameras.size(); ++i) {
        const fs::path pfm = fs::path(dir) / frame_name(i, "pfm");
        const fs::path ppm = fs::path(dir) / frame_name(i, "ppm");
        if (fs::exists(pfm))
            dataset.images.push_back(load_pfm(pfm.string()));
        else
            dataset.images.push_back(load_ppm(ppm.string()));
        if (dataset.images.back().width != dataset.cameras[i].width ||
            dataset.images.back().height != dataset.cameras[i].height)
            throw DataError("frame size does not match its camera in " + dir);
    }
    return dataset;
}

}  // namespace nimp
