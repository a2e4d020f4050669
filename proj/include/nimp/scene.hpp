#pragma once

#include <string>
#include <vector>

#include "nimp/image.hpp"
#include "nimp/mesh.hpp"

namespace nimp {

// Closed-form volumetric test subject: a gaussian density blob with a smooth
// position- and view-dependent color, truncated to the proxy bounds. Training
// data rendered from it has a known-good integrator to compare against.
struct AnalyticScene {
    Vec3 center{0.5, 0.5, 0.5};
    double radius = 0.22;      // gaussian width
    double peak_sigma = 14.0;  // density at the center
    Aabb bounds{Vec3{0, 0, 0}, Vec3{1, 1, 1}};

    double sigma(const Vec3& p) const;
    Vec3 color(const Vec3& p, const Vec3& dir) const;
};

// Fixed-step midpoint quadrature through the scene bounds. steps >= 512 keeps
// the discretization error far below the tolerances used in tests.
Vec3 render_reference_ray(const AnalyticScene& scene, const Ray& ray,
                          const Vec3& background, int steps);
Image render_reference(const AnalyticScene& scene, const Camera& camera,
                       const Vec3& background, int steps, int threads = 0);

// Posed views of one subject plus the proxy mesh they were shot around.
struct Dataset {
    std::vector<Camera> cameras;
    std::vector<Image> images;
    TetMesh proxy;
    Vec3 background{1, 1, 1};
};

// Cameras on a Fibonacci sphere around the box center, all looking inward.
std::vector<Camera> make_orbit_cameras(const Aabb& bounds, int count, int size,
                                       double distance_scale = 1.6);

Dataset make_dataset(const AnalyticScene& scene, const TetMesh& proxy, int views,
                     int size, const Vec3& background, int steps);

// Directory layout: cameras.txt, scene.txt (background color), proxy.tetmesh,
// frame_0000.ppm ... (or .pfm when float_frames is set).
void save_dataset(const std::string& dir, const Dataset& dataset,
                  bool float_frames = false);
Dataset load_dataset(const std::string& dir);

}  // namespace nimp
