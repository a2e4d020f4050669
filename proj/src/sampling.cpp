#include "nimp/sampling.hpp"

#include "nimp/error.hpp"

namespace nimp {

std::vector<TetSample> sample_segments(const std::vector<TetSegment>& segments,
                                       const std::vector<Vec3>& dirs,
                                       const SamplerParams& params) {
    if (!(params.base_step > 0.0) || params.base_step > 1.0)
        throw DataError("sampler base_step must be in (0, 1]");
    if (params.cone_angle < 0.0 || params.cone_angle >= 1.0)
        throw DataError("sampler cone_angle must be in [0, 1)");
    if (params.max_samples_per_ray < 1) throw DataError("max_samples_per_ray must be positive");
    if (dirs.size() != segments.size())
        throw DataError("sample_segments needs one direction per segment");

    std::vector<TetSample> samples;
    double step = params.base_step;
    double accumulated = 0.0;
    for (size_t s = 0; s < segments.size(); ++s) {
        const TetSegment& seg = segments[s];
        double alpha = 0.0;
        while (alpha < 1.0) {
            if (static_cast<int>(samples.size()) >= params.max_samples_per_ray) return samples;
            double next = alpha + step;
            double taken = step;
            if (next >= 1.0) {  // final sample clamps to the exit
                next = 1.0;
                taken = 1.0 - alpha;
            }
            TetSample sample;
            sample.tet = seg.tet;
            sample.seg = static_cast<int>(s);
            sample.alpha = next;
            sample.dalpha = taken;
            sample.bary = bary_lerp(seg.bary_in, seg.bary_out, next);
            sample.dir = dirs[s];
            samples.push_back(sample);
            accumulated += sample.dalpha;
            step += params.cone_angle * accumulated;
            alpha = next;
        }
    }
    return samples;
}

RaySamples sample_ray(const TetMesh& mesh, const Ray& ray, const SamplerParams& params) {
    RaySamples out;
    out.segments = intersect_ray(mesh, ray);
    const std::vector<Vec3> dirs(out.segments.size(), ray.dir);
    out.samples = sample_segments(out.segments, dirs, params);
    return out;
}

}  // namespace nimp
