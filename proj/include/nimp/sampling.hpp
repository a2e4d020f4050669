#pragma once

#include <vector>

#include "nimp/mesh.hpp"

namespace nimp {

// Step growth along a ray: step_{i+1} = step_i + cone_angle * A_i where A_i is
// the sum of all steps taken so far, accumulated across every segment of the
// ray. cone_angle = 0 gives uniform steps of base_step.
struct SamplerParams {
    double base_step = 0.05;   // first step, in per-segment alpha units, (0, 1]
    double cone_angle = 0.01;  // growth factor, [0, 1)
    int max_samples_per_ray = 512;
};

// One integration sample. The sample owns the alpha interval
// [alpha - dalpha, alpha] of its segment; the field is evaluated at the
// interval's end position, whose barycentric coordinates are stored in bary.
struct TetSample {
    int tet = -1;
    int seg = -1;  // index into the segment list that produced this sample
    double alpha = 0.0;
    double dalpha = 0.0;
    Bary4 bary;
    Vec3 dir;
};

struct RaySamples {
    std::vector<TetSegment> segments;
    std::vector<TetSample> samples;
};

// Samples an explicit segment list. dirs holds the direction to attach per
// segment (composition feeds per-instance local directions; plain rendering
// broadcasts the ray direction). Step state carries across segments.
std::vector<TetSample> sample_segments(const std::vector<TetSegment>& segments,
                                       const std::vector<Vec3>& dirs,
                                       const SamplerParams& params);

RaySamples sample_ray(const TetMesh& mesh, const Ray& ray, const SamplerParams& params);

}  // namespace nimp
