#include "nimp/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nimp/error.hpp"

namespace nimp {
namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::string ext_of(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string e = path.substr(dot + 1);
    for (char& c : e) c = static_cast<char>(std::tolower(c));
    return e;
}

// PPM allows comment lines between header tokens.
int next_header_int(std::istream& in) {
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        return std::stoi(tok);
    }
    throw DataError("image header truncated");
}

}  // namespace

void save_ppm(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open image for writing: " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Vec3& p = image.at(x, y);
            for (int c = 0; c < 3; ++c)
                row[x * 3 + c] =
                    static_cast<unsigned char>(std::lround(clamp01(p[c]) * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out) throw DataError("image write failed: " + path);
}

Image load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw DataError("not a binary PPM: " + path);
    const int w = next_header_int(in);
    const int h = next_header_int(in);
    const int maxval = next_header_int(in);
    if (w <= 0 || h <= 0 || maxval != 255) throw DataError("unsupported PPM: " + path);
    in.get();  // single whitespace after the header
    Image image(w, h);
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), row.size());
        if (!in) throw DataError("PPM truncated: " + path);
        for (int x = 0; x < w; ++x)
            image.at(x, y) = Vec3{row[x * 3 + 0] / 255.0, row[x * 3 + 1] / 255.0,
                                  row[x * 3 + 2] / 255.0};
    }
    return image;
}

void save_pfm(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open image for writing: " + path);
    // Negative scale marks little-endian data; rows run bottom to top.
    out << "PF\n" << image.width << " " << image.height << "\n-1.0\n";
    std::vector<float> row(static_cast<size_t>(image.width) * 3);
    for (int y = image.height - 1; y >= 0; --y) {
        for (int x = 0; x < image.width; ++x) {
            const Vec3& p = image.at(x, y);
            row[x * 3 + 0] = static_cast<float>(p.x);
            row[x * 3 + 1] = static_cast<float>(p.y);
            row[x * 3 + 2] = static_cast<float>(p.z);
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
    }
    if (!out) throw DataError("image write failed: " + path);
}

Image load_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "PF") throw DataError("not a color PFM: " + path);
    int w, h;
    double scale;
    in >> w >> h >> scale;
    if (w <= 0 || h <= 0 || scale >= 0.0) throw DataError("unsupported PFM: " + path);
    in.get();
    Image image(w, h);
    std::vector<float> row(static_cast<size_t>(w) * 3);
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
        if (!in) throw DataError("PFM truncated: " + path);
        for (int x = 0; x < w; ++x)
            image.at(x, y) = Vec3{row[x * 3 + 0], row[x * 3 + 1], row[x * 3 + 2]};
    }
    return image;
}

void save_image(const std::string& path, const Image& image) {
    const std::string e = ext_of(path);
    if (e == "pfm")
        save_pfm(path, image);
    else if (e == "ppm")
        save_ppm(path, image);
    else
        throw DataError("unknown image extension: " + path);
}

Image load_image(const std::string& path) {
    const std::string e = ext_of(path);
    if (e == "pfm") return load_pfm(path);
    if (e == "ppm") return load_ppm(path);
    throw DataError("unknown image extension: " + path);
}

double mse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw DataError("image size mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const Vec3 d = a.pixels[i] - b.pixels[i];
        acc += d.x * d.x + d.y * d.y + d.z * d.z;
    }
    return acc / (static_cast<double>(a.pixels.size()) * 3.0);
}

double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / m));
}

Ray Camera::ray_through(int x, int y) const {
    const double px = (x + 0.5 - 0.5 * width) / focal;
    const double py = (y + 0.5 - 0.5 * height) / focal;
    Ray ray;
    ray.origin = position;
    ray.dir = normalize(rotation * Vec3{px, py, 1.0});
    return ray;
}

Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                      int width, int height) {
    const Vec3 forward = normalize(target - eye);
    Vec3 right = cross(up, forward);
    if (norm(right) < 1e-12) throw DataError("camera up is parallel to the view axis");
    right = normalize(right);
    const Vec3 down = cross(right, forward);  // y grows toward the image bottom
    Camera cam;
    cam.position = eye;
    cam.rotation = Mat3::from_cols(right, down, forward);
    cam.focal = focal;
    cam.width = width;
    cam.height = height;
    return cam;
}

void save_cameras(const std::string& path, const std::vector<Camera>& cameras) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open camera list for writing: " + path);
    out << "cameras " << cameras.size() << "\n";
    out.precision(17);
    for (const Camera& c : cameras) {
        out << "cam " << c.position.x << " " << c.position.y << " " << c.position.z;
        for (int i = 0; i < 9; ++i) out << " " << c.rotation.m[i];
        out << " " << c.focal << " " << c.width << " " << c.height << "\n";
    }
    if (!out) throw DataError("camera list write failed: " + path);
}

std::vector<Camera> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open camera list: " + path);
    std::string tag;
    size_t n = 0;
    if (!(in >> tag >> n) || tag != "cameras")
        throw DataError("malformed camera list: " + path);
    std::vector<Camera> cameras(n);
    for (Camera& c : cameras) {
        if (!(in >> tag) || tag != "cam")
            throw DataError("malformed camera entry: " + path);
        in >> c.position.x >> c.position.y >> c.position.z;
        for (int i = 0; i < 9; ++i) in >> c.rotation.m[i];
        in >> c.focal >> c.width >> c.height;
        if (!in) throw DataError("malformed camera entry: " + path);
        if (c.width <= 0 || c.height <= 0 || c.focal <= 0)
            throw DataError("camera parameters out of range: " + path);
    }
    return cameras;
}

}  // namespace nimp
