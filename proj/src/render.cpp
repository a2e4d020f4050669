#include "nimp/render.hpp"

#include <cmath>
#include <thread>

namespace nimp {
template <typename T>
void trace_samples(const ImpostorModel<T>& model, RenderMode mode, const Vec3& background,
                   const Vec3& ray_dir, RayTrace<T>& trace) {
    const int fd = model.feature_dim();
    const int dd = model.dir_dim();
    const size_t n = trace.samples.size();

    trace.feat.assign(n * fd, T(0));
    trace.sigma.resize(n);
    trace.delta.resize(n);
    trace.alpha.resize(n);
    trace.weight.resize(n);
    trace.rgb.clear();
    trace.pooled.clear();
    trace.ray_rgb = Vec3{0, 0, 0};
    trace.color = Vec3{0, 0, 0};
    trace.transmittance = 1.0;

    const bool decode_first = mode == RenderMode::DecodeFirst;
    if (decode_first)
        trace.rgb.resize(n);
    else
        trace.pooled.assign(fd, T(0));

    typename Mlp<T>::Tape tape;
    std::vector<T> rad_in(fd + dd);
    std::vector<double> sh(dd);
    Vec3 sh_dir{0, 0, 0};
    bool sh_valid = false;

    double transmittance = 1.0;
    Vec3 color{0, 0, 0};
    for (size_t i = 0; i < n; ++i) {
        const TetSample& s = trace.samples[i];
        T* feat = trace.feat.data() + i * fd;
        model.encode(s.tet, s.bary, feat);

        trace.sigma[i] = decode_density(model.density_net, feat, tape);
        trace.delta[i] = s.dalpha * segment_span_l1(trace.segments[s.seg]);
        const double tau = trace.sigma[i] * trace.delta[i];
        const double pass = std::exp(-tau);
        const double a = -std::expm1(-tau);
        trace.alpha[i] = a;
        const double w = transmittance * a;
        trace.weight[i] = w;

        if (decode_first) {
            if (!sh_valid || !(s.dir.x == sh_dir.x && s.dir.y == sh_dir.y &&
                               s.dir.z == sh_dir.z)) {
                sh_encode(s.dir, model.sh_degree, sh.data());
                sh_dir = s.dir;
                sh_valid = true;
            }
            for (int k = 0; k < fd; ++k) rad_in[k] = feat[k];
            for (int k = 0; k < dd; ++k) rad_in[fd + k] = static_cast<T>(sh[k]);
            T zrgb[3];
            model.radiance_net.forward(rad_in.data(), zrgb, tape);
            Vec3 c;
            for (int ch = 0; ch < 3; ++ch)
                c[ch] = static_cast<double>(logistic(zrgb[ch]));
            trace.rgb[i] = c;
            color += c * w;
        } else {
            for (int k = 0; k < fd; ++k)
                trace.pooled[k] += static_cast<T>(w) * feat[k];
        }
        transmittance *= pass;
    }
    trace.transmittance = transmittance;

    if (decode_first) {
        trace.color = color + background * transmittance;
    } else {
        sh_encode(ray_dir, model.sh_degree, sh.data());
        for (int k = 0; k < fd; ++k) rad_in[k] = trace.pooled[k];
        for (int k = 0; k < dd; ++k) rad_in[fd + k] = static_cast<T>(sh[k]);
        T zrgb[3];
        model.radiance_net.forward(rad_in.data(), zrgb, tape);
        for (int ch = 0; ch < 3; ++ch)
            trace.ray_rgb[ch] = static_cast<double>(logistic(zrgb[ch]));
        trace.color =
            trace.ray_rgb * (1.0 - transmittance) + background * transmittance;
    }
}

template <typename T>
void trace_ray(const ImpostorModel<T>& model, const Ray& ray, RenderMode mode,
               const Vec3& background, RayTrace<T>& trace, const Vec3* dir_override) {
    const Vec3 dir = dir_override ? *dir_override : ray.dir;
    trace.segments = intersect_ray(model.mesh, ray);
    const std::vector<Vec3> dirs(trace.segments.size(), dir);
    trace.samples = sample_segments(trace.segments, dirs, model.sampler);
    trace_samples(model, mode, background, dir, trace);
}

template <typename T>
Vec3 render_ray(const ImpostorModel<T>& model, const Ray& ray, const RenderOptions& opt) {
    RayTrace<T> trace;
    trace_ray(model, ray, opt.mode, opt.background, trace,
              opt.lock_direction ? &opt.locked_direction : nullptr);
    return trace.color;
}

template <typename T>
Image render_image(const ImpostorModel<T>& model, const Camera& camera,
                   const RenderOptions& opt) {
    Image image(camera.width, camera.height);
    int n_threads = opt.threads > 0
                        ? opt.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min(n_threads, std::max(1, camera.height));

    auto worker = [&](int first_row) {
        RayTrace<T> trace;
        for (int y = first_row; y < camera.height; y += n_threads)
            for (int x = 0; x < camera.width; ++x) {
                trace_ray(model, camera.ray_through(x, y), opt.mode, opt.background,
                          trace, opt.lock_direction ? &opt.locked_direction : nullptr);
                image.at(x, y) = trace.color;
            }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker, k);
        for (auto& t : pool) t.join();
    }
    return image;
}

template void trace_samples<float>(const ImpostorModel<float>&, RenderMode, const Vec3&,
                                   const Vec3&, RayTrace<float>&);
template void trace_samples<double>(const ImpostorModel<double>&, RenderMode, const Vec3&,
                                    const Vec3&, RayTrace<double>&);
template void trace_ray<float>(const ImpostorModel<float>&, const Ray&, RenderMode,
                               const Vec3&, RayTrace<float>&, const Vec3*);
template void trace_ray<double>(const ImpostorModel<double>&, const Ray&, RenderMode,
                                const Vec3&, RayTrace<double>&, const Vec3*);
template Vec3 render_ray<float>(const ImpostorModel<float>&, const Ray&,
                                const RenderOptions&);
template Vec3 render_ray<double>(const ImpostorModel<double>&, const Ray&,
                                 const RenderOptions&);
template Image render_image<float>(const ImpostorModel<float>&, const Camera&,
                                   const RenderOptions&);
template Image render_image<double>(const ImpostorModel<double>&, const Camera&,
                                    const RenderOptions&);

}  // namespace nimp
