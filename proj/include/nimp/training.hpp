#pragma once

#include <functional>
#include <utility>

#include "nimp/render.hpp"
#include "nimp/scene.hpp"

namespace nimp {

// Adam over raw parameter arrays. Moments are kept in double even for float
// models; the tiny epsilon follows the hash-grid training recipe.
template <typename T>
class Adam {
  public:
    Adam(double beta1 = 0.9, double beta2 = 0.99, double eps = 1e-15)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void add_group(T* value, const T* grad, std::size_t size, double lr) {
        groups_.push_back(Group{value, grad, size, lr, std::vector<double>(size, 0.0),
                                std::vector<double>(size, 0.0)});
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (Group& g : groups_) {
            for (std::size_t i = 0; i < g.size; ++i) {
                const double grad = static_cast<double>(g.grad[i]);
                g.m[i] = beta1_ * g.m[i] + (1.0 - beta1_) * grad;
                g.v[i] = beta2_ * g.v[i] + (1.0 - beta2_) * grad * grad;
                const double update =
                    g.lr * (g.m[i] / bc1) / (std::sqrt(g.v[i] / bc2) + eps_);
                g.value[i] = static_cast<T>(static_cast<double>(g.value[i]) - update);
            }
        }
    }

  private:
    struct Group {
        T* value;
        const T* grad;
        std::size_t size;
        double lr;
        std::vector<double> m, v;
    };
    double beta1_, beta2_, eps_;
    std::vector<Group> groups_;
    long t_ = 0;
};

// Gradient accumulators shaped like the trainable state of a model.
template <typename T>
struct GradBuffers {
    std::vector<T> table;
    std::vector<std::vector<T>> density_w, density_b;
    std::vector<std::vector<T>> radiance_w, radiance_b;

    void init(const ImpostorModel<T>& model) {
        table.assign(model.table.values.size(), T(0));
        model.density_net.make_grads(density_w, density_b);
        model.radiance_net.make_grads(radiance_w, radiance_b);
    }
    void zero() {
        std::fill(table.begin(), table.end(), T(0));
        for (auto& g : density_w) std::fill(g.begin(), g.end(), T(0));
        for (auto& g : density_b) std::fill(g.begin(), g.end(), T(0));
        for (auto& g : radiance_w) std::fill(g.begin(), g.end(), T(0));
        for (auto& g : radiance_b) std::fill(g.begin(), g.end(), T(0));
    }
    void add(const GradBuffers& o) {
        for (std::size_t i = 0; i < table.size(); ++i) table[i] += o.table[i];
        auto add_all = [](auto& a, const auto& b) {
            for (std::size_t l = 0; l < a.size(); ++l)
                for (std::size_t i = 0; i < a[l].size(); ++i) a[l][i] += b[l][i];
        };
        add_all(density_w, o.density_w);
        add_all(density_b, o.density_b);
        add_all(radiance_w, o.radiance_w);
        add_all(radiance_b, o.radiance_b);
    }
    void scale(double s) {
        for (T& v : table) v = static_cast<T>(v * s);
        auto scale_all = [s](auto& a) {
            for (auto& l : a)
                for (T& v : l) v = static_cast<T>(v * s);
        };
        scale_all(density_w);
        scale_all(density_b);
        scale_all(radiance_w);
        scale_all(radiance_b);
    }
};

struct RayTarget {
    Ray ray;
    Vec3 color;
};

// Per-ray squared error summed over the batch (not averaged), with exact
// gradients for the table and both decoders accumulated into grads.
template <typename T>
double ray_batch_gradients(const ImpostorModel<T>& model, const RayTarget* batch,
                           std::size_t count, RenderMode mode, const Vec3& background,
                           GradBuffers<T>& grads);

// Every pixel of every view as a supervised ray.
std::vector<RayTarget> dataset_rays(const Dataset& data);

struct TrainConfig {
    int steps = 5000;
    int batch_rays = 1024;
    double lr_table = 1e-2;
    double lr_decoder = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double adam_eps = 1e-15;
    RenderMode mode = RenderMode::DecodeFirst;
    int threads = 0;
    std::uint64_t seed = 0;
    int log_every = 100;
};

struct TrainReport {
    std::vector<std::pair<int, double>> trace;  // (step, mean batch loss)
    double final_loss = 0.0;
    int steps_run = 0;
};

template <typename T>
TrainReport train(ImpostorModel<T>& model, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(int, double)>& progress = {});

// Local feature transfer onto an edited proxy. Tets whose vertex quadruple
// is unchanged keep their feature slice verbatim; the rest (the region) is
// refit in two passes: pointwise feature matching against the source field,
// then ray-level color matching against source renders. Decoders carry over
// frozen.
struct RetrainConfig {
    int stage1_points = 1 << 14;
    int stage1_steps = 500;
    int stage1_batch = 1024;
    double stage1_lr = 1e-2;
    int stage2_cameras = 6;
    int stage2_size = 24;
    int stage2_steps = 300;
    int stage2_batch = 256;
    double stage2_lr = 5e-3;
    Vec3 background{1, 1, 1};
    int threads = 0;
    std::uint64_t seed = 0;
};

template <typename T>
struct RetrainResult {
    ImpostorModel<T> model;
    std::vector<int> region;       // retrained tets of the new mesh
    double stage1_initial = 0.0;   // mean L1 feature error before/after
    double stage1_final = 0.0;
    double stage2_initial = 0.0;   // mean squared color error before/after
    double stage2_final = 0.0;
};

template <typename T>
RetrainResult<T> retrain_local(const ImpostorModel<T>& source, const TetMesh& new_mesh,
                               const RetrainConfig& cfg);

}  // namespace nimp
