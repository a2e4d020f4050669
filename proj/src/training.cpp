#include "nimp/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>

#include "nimp/error.hpp"

namespace nimp {
namespace {

template <typename T>
struct Workspace {
    RayTrace<T> trace;
    typename Mlp<T>::Tape tape;
    std::vector<double> u;       // d(loss)/d(weight_i)
    std::vector<double> prefix;  // transmittance entering sample i
    std::vector<T> rad_in, drad_in, dfeat, dpool;
    std::vector<double> sh;
    T dz_rgb[3];
};

// Reverse pass for one ray on top of a completed trace. The compositing
// chain is differentiated with a suffix sweep; each sample then pushes its
// share through the decoders back onto the feature table.
template <typename T>
double ray_gradient(const ImpostorModel<T>& model, const RayTarget& rt, RenderMode mode,
                    const Vec3& bg, GradBuffers<T>& grads, Workspace<T>& ws) {
    trace_ray(model, rt.ray, mode, bg, ws.trace);
    RayTrace<T>& trace = ws.trace;
    const Vec3 diff = trace.color - rt.color;
    const double loss = dot(diff, diff);
    const Vec3 g = diff * 2.0;

    const size_t n = trace.samples.size();
    const int fd = model.feature_dim();
    const int dd = model.dir_dim();
    if (n == 0) return loss;  // pure background, nothing trainable touched

    ws.u.resize(n);
    ws.prefix.resize(n);
    ws.rad_in.resize(fd + dd);
    ws.drad_in.resize(fd + dd);
    ws.dfeat.resize(fd);
    ws.sh.resize(dd);

    const bool decode_first = mode == RenderMode::DecodeFirst;
    double v;  // d(loss)/d(final transmittance)
    if (decode_first) {
        for (size_t i = 0; i < n; ++i) ws.u[i] = dot(g, trace.rgb[i]);
        v = dot(g, bg);
    } else {
        // One radiance decode per ray: differentiate it first to get the
        // pooled-feature sensitivity.
        sh_encode(rt.ray.dir, model.sh_degree, ws.sh.data());
        for (int k = 0; k < fd; ++k) ws.rad_in[k] = trace.pooled[k];
        for (int k = 0; k < dd; ++k) ws.rad_in[fd + k] = static_cast<T>(ws.sh[k]);
        T zrgb[3];
        model.radiance_net.forward(ws.rad_in.data(), zrgb, ws.tape);
        const double opacity = 1.0 - trace.transmittance;
        for (int c = 0; c < 3; ++c) {
            const double y = trace.ray_rgb[c];
            ws.dz_rgb[c] = static_cast<T>(g[c] * opacity * y * (1.0 - y));
        }
        model.radiance_net.backward(ws.tape, ws.dz_rgb, grads.radiance_w,
                                    grads.radiance_b, ws.drad_in.data());
        ws.dpool.assign(ws.drad_in.begin(), ws.drad_in.begin() + fd);
        for (size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            const T* feat = trace.feat.data() + i * fd;
            for (int k = 0; k < fd; ++k)
                acc += static_cast<double>(ws.dpool[k]) * static_cast<double>(feat[k]);
            ws.u[i] = acc;
        }
        v = dot(g, bg - trace.ray_rgb);
    }

    double t_run = 1.0;
    for (size_t i = 0; i < n; ++i) {
        ws.prefix[i] = t_run;
        t_run *= 1.0 - trace.alpha[i];
    }

    Vec3 sh_dir{0, 0, 0};
    bool sh_valid = false;
    // suffix = sum over later samples of u_j * w_j, plus the transmittance
    // term; together with the prefix it yields d(loss)/d(opacity_i).
    double suffix = v * trace.transmittance;
    for (size_t ii = n; ii-- > 0;) {
        const TetSample& s = trace.samples[ii];
        const T* feat = trace.feat.data() + ii * fd;

        const double dsigma =
            trace.delta[ii] *
            ((1.0 - trace.alpha[ii]) * ws.prefix[ii] * ws.u[ii] - suffix);
        suffix += ws.u[ii] * trace.weight[ii];

        // Density decoder: rebuild the forward tape, then push back.
        T z;
        model.density_net.forward(feat, &z, ws.tape);
        const double dz =
            static_cast<double>(z) < kMaxDensityLog ? dsigma * trace.sigma[ii] : 0.0;
        const T dzt = static_cast<T>(dz);
        model.density_net.backward(ws.tape, &dzt, grads.density_w, grads.density_b,
                                   ws.dfeat.data());

        if (decode_first) {
            if (!sh_valid || !(s.dir.x == sh_dir.x && s.dir.y == sh_dir.y &&
                               s.dir.z == sh_dir.z)) {
                sh_encode(s.dir, model.sh_degree, ws.sh.data());
                sh_dir = s.dir;
                sh_valid = true;
            }
            for (int k = 0; k < fd; ++k) ws.rad_in[k] = feat[k];
            for (int k = 0; k < dd; ++k) ws.rad_in[fd + k] = static_cast<T>(ws.sh[k]);
            T zrgb[3];
            model.radiance_net.forward(ws.rad_in.data(), zrgb, ws.tape);
            for (int c = 0; c < 3; ++c) {
                const double y = trace.rgb[ii][c];
                ws.dz_rgb[c] =
                    static_cast<T>(g[c] * trace.weight[ii] * y * (1.0 - y));
            }
            model.radiance_net.backward(ws.tape, ws.dz_rgb, grads.radiance_w,
                                        grads.radiance_b, ws.drad_in.data());
            for (int k = 0; k < fd; ++k) ws.dfeat[k] += ws.drad_in[k];
        } else {
            const T w = static_cast<T>(trace.weight[ii]);
            for (int k = 0; k < fd; ++k) ws.dfeat[k] += w * ws.dpool[k];
        }

        encode_position_backward(model.layout, s.tet, s.bary, ws.dfeat.data(),
                                 grads.table);
    }
    return loss;
}

int resolve_threads(int requested) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, n);
}

// Spreads one batch over the thread-local grad buffers and reduces into
// buffers[0]. Returns the summed loss. Deterministic for a fixed thread count.
template <typename T>
double parallel_batch(const ImpostorModel<T>& model, const std::vector<RayTarget>& rays,
                      const std::vector<std::size_t>& batch, RenderMode mode,
                      const Vec3& bg, int n_threads,
                      std::vector<GradBuffers<T>>& buffers,
                      std::vector<Workspace<T>>& spaces) {
    const std::size_t count = batch.size();
    if (static_cast<std::size_t>(n_threads) > count)
        n_threads = static_cast<int>(std::max<std::size_t>(1, count));
    std::vector<double> losses(n_threads, 0.0);

    auto run_chunk = [&](int k) {
        const std::size_t lo = count * k / n_threads;
        const std::size_t hi = count * (k + 1) / n_threads;
        buffers[k].zero();
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            acc += ray_gradient(model, rays[batch[i]], mode, bg, buffers[k], spaces[k]);
        losses[k] = acc;
    };

    if (n_threads == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(run_chunk, k);
        for (auto& t : pool) t.join();
    }
    double loss = 0.0;
    for (int k = 0; k < n_threads; ++k) loss += losses[k];
    for (int k = 1; k < n_threads; ++k) buffers[0].add(buffers[k]);
    return loss;
}

}  // namespace

template <typename T>
double ray_batch_gradients(const ImpostorModel<T>& model, const RayTarget* batch,
                           std::size_t count, RenderMode mode, const Vec3& background,
                           GradBuffers<T>& grads) {
    Workspace<T> ws;
    double loss = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        loss += ray_gradient(model, batch[i], mode, background, grads, ws);
    return loss;
}

std::vector<RayTarget> dataset_rays(const Dataset& data) {
    std::vector<RayTarget> rays;
    for (size_t v = 0; v < data.cameras.size(); ++v) {
        const Camera& cam = data.cameras[v];
        const Image& img = data.images[v];
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
                rays.push_back(RayTarget{cam.ray_through(x, y), img.at(x, y)});
    }
    return rays;
}

template <typename T>
TrainReport train(ImpostorModel<T>& model, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(int, double)>& progress) {
    if (cfg.steps < 1 || cfg.batch_rays < 1)
        throw DataError("training needs positive step and batch counts");
    const std::vector<RayTarget> rays = dataset_rays(data);
    if (rays.empty()) throw DataError("training dataset has no rays");

    const int n_threads = resolve_threads(cfg.threads);
    std::vector<GradBuffers<T>> buffers(n_threads);
    std::vector<Workspace<T>> spaces(n_threads);
    for (auto& b : buffers) b.init(model);

    Adam<T> opt(cfg.beta1, cfg.beta2, cfg.adam_eps);
    GradBuffers<T>& g = buffers[0];
    opt.add_group(model.table.values.data(), g.table.data(), g.table.size(),
                  cfg.lr_table);
    for (size_t l = 0; l < model.density_net.weights.size(); ++l) {
        opt.add_group(model.density_net.weights[l].data(), g.density_w[l].data(),
                      g.density_w[l].size(), cfg.lr_decoder);
        opt.add_group(model.density_net.biases[l].data(), g.density_b[l].data(),
                      g.density_b[l].size(), cfg.lr_decoder);
    }
    for (size_t l = 0; l < model.radiance_net.weights.size(); ++l) {
        opt.add_group(model.radiance_net.weights[l].data(), g.radiance_w[l].data(),
                      g.radiance_w[l].size(), cfg.lr_decoder);
        opt.add_group(model.radiance_net.biases[l].data(), g.radiance_b[l].data(),
                      g.radiance_b[l].size(), cfg.lr_decoder);
    }

    Rng rng(cfg.seed);
    TrainReport report;
    std::vector<std::size_t> batch(cfg.batch_rays);
    for (int step = 0; step < cfg.steps; ++step) {
        for (auto& idx : batch) idx = rng.uniform_index(rays.size());
        const double loss_sum = parallel_batch(model, rays, batch, cfg.mode,
                                               data.background, n_threads, buffers,
                                               spaces);
        const double mean_loss = loss_sum / cfg.batch_rays;
        if (!std::isfinite(mean_loss))
            throw NumericError("training loss is not finite at step " +
                               std::to_string(step));
        buffers[0].scale(1.0 / cfg.batch_rays);
        opt.step();

        report.final_loss = mean_loss;
        report.steps_run = step + 1;
        if (step % std::max(1, cfg.log_every) == 0 || step + 1 == cfg.steps) {
            report.trace.emplace_back(step, mean_loss);
            if (progress) progress(step, mean_loss);
        }
    }
    return report;
}

namespace {

// Bit-exact key of a tet: its four vertex positions in index order.
std::string tet_key(const TetMesh& mesh, int tet) {
    std::string key(4 * 3 * sizeof(double), '\0');
    char* out = key.data();
    for (int i : mesh.tets[tet]) {
        const Vec3& v = mesh.vertices[i];
        std::memcpy(out, &v.x, sizeof(double)); out += sizeof(double);
        std::memcpy(out, &v.y, sizeof(double)); out += sizeof(double);
        std::memcpy(out, &v.z, sizeof(double)); out += sizeof(double);
    }
    return key;
}

Bary4 random_bary(Rng& rng) {
    double u[3] = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    std::sort(u, u + 3);
    return Bary4{u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]};
}

}  // namespace

template <typename T>
RetrainResult<T> retrain_local(const ImpostorModel<T>& source, const TetMesh& new_mesh,
                               const RetrainConfig& cfg) {
    RetrainResult<T> result;
    ImpostorModel<T>& model = result.model;
    const HashLayout& src_lay = source.layout;

    model.mesh = new_mesh;
    model.layout = make_layout_with_slice(
        static_cast<int>(new_mesh.tets.size()), src_lay.levels, src_lay.features,
        src_lay.global_log2, src_lay.per_tet_log2, src_lay.level_res.back());
    if (model.layout.level_res != src_lay.level_res ||
        model.layout.level_size != src_lay.level_size)
        throw DataError("feature transfer needs matching level layouts");
    model.table = FeatureTable<T>(model.layout);
    model.density_net = source.density_net;
    model.radiance_net = source.radiance_net;
    model.sh_degree = source.sh_degree;
    model.sampler = source.sampler;

    // Unchanged tets keep their slice; everything else is the region.
    std::unordered_map<std::string, int> source_tets;
    source_tets.reserve(source.mesh.tets.size());
    for (size_t t = 0; t < source.mesh.tets.size(); ++t)
        source_tets.emplace(tet_key(source.mesh, static_cast<int>(t)),
                            static_cast<int>(t));
    const std::size_t row = static_cast<std::size_t>(model.layout.tet_slice()) *
                            model.layout.features;
    Rng rng(cfg.seed);
    for (size_t t = 0; t < new_mesh.tets.size(); ++t) {
        const auto it = source_tets.find(tet_key(new_mesh, static_cast<int>(t)));
        if (it != source_tets.end()) {
            std::copy_n(source.table.values.begin() + it->second * row, row,
                        model.table.values.begin() + t * row);
        } else {
            result.region.push_back(static_cast<int>(t));
            for (std::size_t i = t * row; i < (t + 1) * row; ++i)
                model.table.values[i] = static_cast<T>(rng.uniform(-1e-4, 1e-4));
        }
    }
    if (result.region.empty()) return result;

    const int fd = model.feature_dim();

    // Stage 1: pointwise feature matching inside the region, against the
    // source field at the same world position.
    {
        std::vector<double> cum;
        double total = 0.0;
        for (int t : result.region) {
            total += std::abs(model.mesh.volumes[t]);
            cum.push_back(total);
        }
        struct Point {
            int tet;
            Bary4 bary;
            std::vector<T> target;
        };
        std::vector<Point> points;
        points.reserve(cfg.stage1_points);
        std::vector<T> src_feat(fd);
        for (int i = 0; i < cfg.stage1_points; ++i) {
            const double pick = rng.uniform01() * total;
            const size_t which =
                std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
            const int tet = result.region[std::min(which, cum.size() - 1)];
            const Bary4 b = random_bary(rng);
            const Vec3 world = point_from_barycentric(model.mesh, tet, b);
            const int src_tet = locate_point(source.mesh, world);
            if (src_tet < 0) continue;  // the source field never covered it
            const Bary4 src_b = barycentric_of_point(source.mesh, src_tet, world);
            encode_position(source.table, src_tet, src_b, src_feat.data());
            points.push_back(Point{tet, b, src_feat});
        }

        if (!points.empty()) {
            std::vector<T> grad(model.table.values.size(), T(0));
            Adam<T> opt;
            for (int t : result.region)
                opt.add_group(model.table.values.data() + t * row, grad.data() + t * row,
                              row, cfg.stage1_lr);

            std::vector<T> feat(fd), dout(fd);
            auto mean_l1 = [&]() {
                double acc = 0.0;
                for (const Point& p : points) {
                    encode_position(model.table, p.tet, p.bary, feat.data());
                    for (int k = 0; k < fd; ++k)
                        acc += std::abs(static_cast<double>(feat[k] - p.target[k]));
                }
                return acc / (points.size() * fd);
            };
            result.stage1_initial = mean_l1();

            const int batch = std::min<int>(cfg.stage1_batch,
                                            static_cast<int>(points.size()));
            for (int step = 0; step < cfg.stage1_steps; ++step) {
                std::fill(grad.begin(), grad.end(), T(0));
                for (int b = 0; b < batch; ++b) {
                    const Point& p = points[rng.uniform_index(points.size())];
                    encode_position(model.table, p.tet, p.bary, feat.data());
                    for (int k = 0; k < fd; ++k) {
                        const double d =
                            static_cast<double>(feat[k] - p.target[k]);
                        dout[k] = static_cast<T>((d > 0) - (d < 0));
                    }
                    encode_position_backward(model.layout, p.tet, p.bary, dout.data(),
                                             grad);
                }
                const double scale = 1.0 / (batch * fd);
                for (int t : result.region)
                    for (std::size_t i = t * row; i < (t + 1) * row; ++i)
                        grad[i] = static_cast<T>(grad[i] * scale);
                opt.step();
            }
            result.stage1_final = mean_l1();
        }
    }

    // Stage 2: color matching on rays through the region, target rendered
    // from the source model.
    {
        Aabb box;
        for (int t : result.region)
            for (int vi : new_mesh.tets[t]) box.expand(new_mesh.vertices[vi]);
        const auto cameras =
            make_orbit_cameras(box, cfg.stage2_cameras, cfg.stage2_size);

        std::vector<RayTarget> rays;
        const std::vector<int> region_sorted = result.region;
        auto in_region = [&](int tet) {
            return std::binary_search(region_sorted.begin(), region_sorted.end(), tet);
        };
        RenderOptions target_opt{RenderMode::EarlyIntegration, cfg.background, 1};
        for (const Camera& cam : cameras)
            for (int y = 0; y < cam.height; ++y)
                for (int x = 0; x < cam.width; ++x) {
                    const Ray ray = cam.ray_through(x, y);
                    bool touches = false;
                    for (const TetSegment& seg : intersect_ray(new_mesh, ray))
                        if (in_region(seg.tet)) {
                            touches = true;
                            break;
                        }
                    if (!touches) continue;
                    rays.push_back(
                        RayTarget{ray, render_ray(source, ray, target_opt)});
                }

        if (!rays.empty()) {
            const int n_threads = resolve_threads(cfg.threads);
            std::vector<GradBuffers<T>> buffers(n_threads);
            std::vector<Workspace<T>> spaces(n_threads);
            for (auto& b : buffers) b.init(model);
            Adam<T> opt;
            for (int t : result.region)
                opt.add_group(model.table.values.data() + t * row,
                              buffers[0].table.data() + t * row, row, cfg.stage2_lr);

            auto mean_sq = [&]() {
                double acc = 0.0;
                RenderOptions opt_now{RenderMode::EarlyIntegration, cfg.background, 1};
                for (const RayTarget& rt : rays) {
                    const Vec3 d = render_ray(model, rt.ray, opt_now) - rt.color;
                    acc += dot(d, d);
                }
                return acc / rays.size();
            };
            result.stage2_initial = mean_sq();

            const int batch_n = std::min<int>(cfg.stage2_batch,
                                              static_cast<int>(rays.size()));
            std::vector<std::size_t> batch(batch_n);
            for (int step = 0; step < cfg.stage2_steps; ++step) {
                for (auto& idx : batch) idx = rng.uniform_index(rays.size());
                const double loss =
                    parallel_batch(model, rays, batch, RenderMode::EarlyIntegration,
                                   cfg.background, n_threads, buffers, spaces);
                if (!std::isfinite(loss))
                    throw NumericError("feature transfer diverged at step " +
                                       std::to_string(step));
                buffers[0].scale(1.0 / batch_n);
                opt.step();
            }
            result.stage2_final = mean_sq();
        }
    }
    return result;
}

template double ray_batch_gradients<float>(const ImpostorModel<float>&, const RayTarget*,
                                           std::size_t, RenderMode, const Vec3&,
                                           GradBuffers<float>&);
template double ray_batch_gradients<double>(const ImpostorModel<double>&,
                                            const RayTarget*, std::size_t, RenderMode,
                                            const Vec3&, GradBuffers<double>&);
template TrainReport train<float>(ImpostorModel<float>&, const Dataset&,
                                  const TrainConfig&,
                                  const std::function<void(int, double)>&);
template TrainReport train<double>(ImpostorModel<double>&, const Dataset&,
                                   const TrainConfig&,
                                   const std::function<void(int, double)>&);
template RetrainResult<float> retrain_local<float>(const ImpostorModel<float>&,
                                                   const TetMesh&, const RetrainConfig&);
template RetrainResult<double> retrain_local<double>(const ImpostorModel<double>&,
                                                     const TetMesh&,
                                                     const RetrainConfig&);

}  // namespace nimp
