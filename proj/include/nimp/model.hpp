#pragma once

#include <string>

#include "nimp/encoding.hpp"
#include "nimp/mesh.hpp"
#include "nimp/mlp.hpp"
#include "nimp/sampling.hpp"
#include "nimp/sh.hpp"

namespace nimp {

struct ModelConfig {
    int levels = 8;
    int features = 2;
    int global_log2 = 19;
    int max_res = 16;
    int sh_degree = 4;
    int density_hidden = 16;
    int radiance_hidden = 64;
    int radiance_hidden_layers = 2;
};

struct PointSample {
    double sigma = 0.0;
    Vec3 rgb{0, 0, 0};
};

// A proxy mesh plus everything needed to evaluate the field inside it: the
// shared feature table, the density and view-dependent color decoders, and
// the sampling step policy baked in at training time.
template <typename T>
struct ImpostorModel {
    TetMesh mesh;
    HashLayout layout;
    FeatureTable<T> table;
    Mlp<T> density_net;
    Mlp<T> radiance_net;
    int sh_degree = 4;
    SamplerParams sampler;

    int feature_dim() const { return layout.feature_dim(); }
    int dir_dim() const { return sh_dim(sh_degree); }

    void encode(int tet, const Bary4& bary, T* out) const {
        encode_position(table, tet, bary, out);
    }

    double sigma_at(int tet, const Bary4& bary) const {
        std::vector<T> feat(feature_dim());
        encode(tet, bary, feat.data());
        typename Mlp<T>::Tape tape;
        T z;
        density_net.forward(feat.data(), &z, tape);
        return static_cast<double>(exp_density(z));
    }

    PointSample eval_at(int tet, const Bary4& bary, const Vec3& dir) const {
        const int fd = feature_dim(), dd = dir_dim();
        std::vector<T> feat(fd + dd);
        encode(tet, bary, feat.data());
        std::vector<double> sh(dd);
        sh_encode(dir, sh_degree, sh.data());
        for (int i = 0; i < dd; ++i) feat[fd + i] = static_cast<T>(sh[i]);

        typename Mlp<T>::Tape tape;
        PointSample out;
        T z;
        density_net.forward(feat.data(), &z, tape);
        out.sigma = static_cast<double>(exp_density(z));
        T rgb[3];
        radiance_net.forward(feat.data(), rgb, tape);
        for (int c = 0; c < 3; ++c) out.rgb[c] = static_cast<double>(logistic(rgb[c]));
        return out;
    }
};

template <typename T>
ImpostorModel<T> make_model(const TetMesh& mesh, const ModelConfig& cfg, Rng& rng) {
    ImpostorModel<T> model;
    model.mesh = mesh;
    model.layout = make_layout(static_cast<int>(mesh.tets.size()), cfg.levels,
                               cfg.features, cfg.global_log2, cfg.max_res);
    model.table = FeatureTable<T>(model.layout);
    model.table.init_uniform(rng);
    model.sh_degree = cfg.sh_degree;

    const int fd = model.layout.feature_dim();
    model.density_net = Mlp<T>({fd, cfg.density_hidden, 1});
    std::vector<int> rad_sizes{fd + sh_dim(cfg.sh_degree)};
    for (int l = 0; l < cfg.radiance_hidden_layers; ++l)
        rad_sizes.push_back(cfg.radiance_hidden);
    rad_sizes.push_back(3);
    model.radiance_net = Mlp<T>(rad_sizes);
    model.density_net.init(rng);
    model.radiance_net.init(rng);
    return model;
}

// Binary checkpoint, little-endian, features and decoder parameters as f32.
template <typename T>
void save_model(const std::string& path, const ImpostorModel<T>& model);
template <typename T>
ImpostorModel<T> load_model(const std::string& path);

}  // namespace nimp
