#pragma once

#include "nimp/image.hpp"
#include "nimp/model.hpp"
#include "nimp/sampling.hpp"

namespace nimp {

// DecodeFirst turns every sample into (sigma, rgb) and composites colors.
// EarlyIntegration composites the raw feature vectors with the same weights
// and decodes the pooled feature once per ray.
enum class RenderMode { DecodeFirst, EarlyIntegration };

struct RenderOptions {
    RenderMode mode = RenderMode::DecodeFirst;
    Vec3 background{1, 1, 1};
    int threads = 0;  // 0 picks the hardware count
    // When set, this unit vector feeds the view-direction encoding instead of
    // the ray direction; geometry is still sampled along the real ray. Lets a
    // warped proxy be compared against its rest pose with the view term held.
    bool lock_direction = false;
    Vec3 locked_direction{0, 0, 1};
};

// Saturated densities stay finite so downstream products are well defined.
constexpr double kMaxDensityLog = 60.0;

template <typename T>
double decode_density(const Mlp<T>& net, const T* feat, typename Mlp<T>::Tape& tape) {
    T z;
    net.forward(feat, &z, tape);
    double zd = static_cast<double>(z);
    if (zd > kMaxDensityLog) zd = kMaxDensityLog;
    return std::exp(zd);
}

// Optical depth per sample is its alpha extent scaled by the barycentric
// span of the segment; the proxy carries its own integration measure, so
// deforming the mesh leaves the measure attached to the material.
inline double segment_span_l1(const TetSegment& seg) {
    return bary_l1(seg.bary_in, seg.bary_out);
}

// Forward-pass record for one ray. The trainer reuses everything here for
// its reverse sweep; plain rendering only reads color.
template <typename T>
struct RayTrace {
    std::vector<TetSegment> segments;
    std::vector<TetSample> samples;
    std::vector<T> feat;         // one feature row per sample
    std::vector<double> sigma;   // decoded density
    std::vector<double> delta;   // integration measure per sample
    std::vector<double> alpha;   // opacity 1 - exp(-sigma * delta)
    std::vector<double> weight;  // compositing weight
    std::vector<Vec3> rgb;       // per-sample color (DecodeFirst only)
    std::vector<T> pooled;       // weighted feature sum (EarlyIntegration only)
    Vec3 ray_rgb{0, 0, 0};       // decoded pooled color (EarlyIntegration only)
    double transmittance = 1.0;
    Vec3 color{0, 0, 0};
};

template <typename T>
void trace_ray(const ImpostorModel<T>& model, const Ray& ray, RenderMode mode,
               const Vec3& background, RayTrace<T>& trace,
               const Vec3* dir_override = nullptr);

// Composites already-sampled segments; used directly by scene composition,
// where the samples come from several instances.
template <typename T>
void trace_samples(const ImpostorModel<T>& model, RenderMode mode, const Vec3& background,
                   const Vec3& ray_dir, RayTrace<T>& trace);

template <typename T>
Vec3 render_ray(const ImpostorModel<T>& model, const Ray& ray, const RenderOptions& opt);

template <typename T>
Image render_image(const ImpostorModel<T>& model, const Camera& camera,
                   const RenderOptions& opt);

}  // namespace nimp
