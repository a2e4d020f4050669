#pragma once

#include <string>
#include <vector>

#include "nimp/mesh.hpp"
#include "nimp/vec.hpp"

namespace nimp {

// Linear RGB raster, row-major from the top-left pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Vec3> pixels;

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h) {}

    Vec3& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    const Vec3& at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// 8-bit binary PPM. Values clamp to [0,1] on save.
void save_ppm(const std::string& path, const Image& image);
Image load_ppm(const std::string& path);

// Float PFM (color, little-endian). Lossless for test fixtures.
void save_pfm(const std::string& path, const Image& image);
Image load_pfm(const std::string& path);

// Dispatch on extension: .ppm or .pfm.
void save_image(const std::string& path, const Image& image);
Image load_image(const std::string& path);

double mse(const Image& a, const Image& b);
// Peak signal-to-noise against a unit-range signal; identical images report
// the 99 dB ceiling.
double psnr(const Image& a, const Image& b);

// Pinhole camera. rotation maps camera coordinates (x right, y down,
// z forward) to world coordinates; pixel (x, y) looks along
// rotation * ((x + 0.5 - w/2) / focal, (y + 0.5 - h/2) / focal, 1).
struct Camera {
    Vec3 position{0, 0, 0};
    Mat3 rotation = Mat3::identity();
    double focal = 1.0;
    int width = 0;
    int height = 0;

    Ray ray_through(int x, int y) const;
};

Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                      int width, int height);

// Text camera list: header "cameras N", then one line per camera holding the
// position, the row-major rotation, the focal length in pixels, and the size.
void save_cameras(const std::string& path, const std::vector<Camera>& cameras);
std::vector<Camera> load_cameras(const std::string& path);

}  // namespace nimp
