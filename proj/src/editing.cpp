#include "nimp/editing.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

namespace nimp {

template <typename T>
ImpostorModel<T> deform(const ImpostorModel<T>& model, std::vector<Vec3> vertices) {
    ImpostorModel<T> out = model;
    // The rebuild rejects inverted or collapsed tets, listing the offenders.
    out.mesh = rebuild_with_vertices(model.mesh, std::move(vertices));

    const double diag = std::max(out.mesh.bounds.diag(), 1e-30);
    int thin = 0, first = -1;
    for (int t = 0; t < out.mesh.tet_count(); ++t)
        if (out.mesh.volumes[t] < 1e-10 * diag * diag * diag) {
            ++thin;
            if (first < 0) first = t;
        }
    if (thin > 0)
        std::cerr << "warning: deformation leaves " << thin
                  << " near-degenerate tets (first: " << first << ")\n";
    return out;
}

template <typename T>
int boolean_status(const ImpostorModel<T>& model, int tet, const Bary4& bary,
                   double eps) {
    return model.sigma_at(tet, bary) > eps ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Boolean fields

struct BooleanField::Node {
    // Leaves own a predicate; interior nodes own an operator and children.
    std::function<int(const Vec3&)> leaf;
    BoolOp op = BoolOp::Union;
    std::shared_ptr<const Node> a, b;
};

BooleanField::BooleanField(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

BooleanField BooleanField::everything() {
    auto n = std::make_shared<Node>();
    n->leaf = [](const Vec3&) { return 1; };
    return BooleanField(n);
}

BooleanField BooleanField::nothing() {
    auto n = std::make_shared<Node>();
    n->leaf = [](const Vec3&) { return 0; };
    return BooleanField(n);
}

BooleanField BooleanField::sphere(const Vec3& center, double radius) {
    if (radius < 0) throw DataError("sphere radius must be nonnegative");
    auto n = std::make_shared<Node>();
    n->leaf = [center, r2 = radius * radius](const Vec3& p) {
        const Vec3 d = p - center;
        return dot(d, d) <= r2 ? 1 : 0;
    };
    return BooleanField(n);
}

BooleanField BooleanField::box(const Vec3& lo, const Vec3& hi) {
    auto n = std::make_shared<Node>();
    n->leaf = [lo, hi](const Vec3& p) {
        return (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
                p.z >= lo.z && p.z <= hi.z)
                   ? 1
                   : 0;
    };
    return BooleanField(n);
}

BooleanField BooleanField::stamp(Image mask, const Vec3& lo, const Vec3& hi) {
    if (mask.width <= 0 || mask.height <= 0) throw DataError("stamp mask is empty");
    if (!(hi.x > lo.x) || !(hi.y > lo.y))
        throw DataError("stamp window must have positive xy extent");
    auto img = std::make_shared<const Image>(std::move(mask));
    auto n = std::make_shared<Node>();
    n->leaf = [img, lo, hi](const Vec3& p) {
        if (p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y || p.z < lo.z ||
            p.z > hi.z)
            return 0;
        const double u = (p.x - lo.x) / (hi.x - lo.x);
        const double v = (p.y - lo.y) / (hi.y - lo.y);
        const int px = std::min(static_cast<int>(u * img->width), img->width - 1);
        const int py = std::min(static_cast<int>(v * img->height), img->height - 1);
        const Vec3& c = img->at(px, py);
        return (c.x + c.y + c.z) / 3.0 > 0.5 ? 1 : 0;
    };
    return BooleanField(n);
}

template <typename T>
BooleanField BooleanField::density(std::shared_ptr<const ImpostorModel<T>> model,
                                   double eps) {
    if (!model) throw DataError("boolean density leaf needs a model");
    auto n = std::make_shared<Node>();
    n->leaf = [model, eps](const Vec3& p) {
        const int tet = locate_point(model->mesh, p);
        if (tet < 0) return 0;
        return boolean_status(*model, tet, barycentric_of_point(model->mesh, tet, p),
                              eps);
    };
    return BooleanField(n);
}

BooleanField BooleanField::combine(BooleanField a, BooleanField b, BoolOp op) {
    if (!a.valid() || !b.valid()) throw DataError("boolean operand is empty");
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = a.root_;
    n->b = b.root_;
    return BooleanField(n);
}

int BooleanField::operator()(const Vec3& p) const {
    if (!root_) throw DataError("boolean field is empty");
    struct Eval {
        static int run(const Node& n, const Vec3& p) {
            if (n.leaf) return n.leaf(p);
            const int a = run(*n.a, p);
            const int b = run(*n.b, p);
            switch (n.op) {
                case BoolOp::Union: return a + b - a * b;
                case BoolOp::Intersect: return a * b;
                case BoolOp::Difference: return a - a * b;
                case BoolOp::Xor: return (a + b) % 2;
            }
            return 0;
        }
    };
    return Eval::run(*root_, p);
}

// ---------------------------------------------------------------------------
// Masked and blended rendering

template <typename T>
MaskedColor masked_render_ray(const ImpostorModel<T>& model, const BooleanField& field,
                              const Ray& ray) {
    const std::vector<TetSegment> segments = intersect_ray(model.mesh, ray);
    const std::vector<Vec3> dirs(segments.size(), ray.dir);
    const std::vector<TetSample> samples =
        sample_segments(segments, dirs, model.sampler);

    const int fd = model.feature_dim();
    const int dd = model.dir_dim();
    std::vector<T> feat(fd), pooled(fd, T(0)), rad_in(fd + dd);
    std::vector<double> sh(dd);
    typename Mlp<T>::Tape tape;

    double transmittance = 1.0;
    for (const TetSample& s : samples) {
        const Vec3 world = point_from_barycentric(model.mesh, s.tet, s.bary);
        if (!field(world)) continue;  // gated density is zero: nothing changes
        model.encode(s.tet, s.bary, feat.data());
        const double sigma = decode_density(model.density_net, feat.data(), tape);
        const double delta = s.dalpha * segment_span_l1(segments[s.seg]);
        const double tau = sigma * delta;
        const double pass = std::exp(-tau);
        const double a = -std::expm1(-tau);
        const double w = transmittance * a;
        for (int k = 0; k < fd; ++k) pooled[k] += static_cast<T>(w) * feat[k];
        transmittance *= pass;
    }

    MaskedColor out;
    out.transmittance = transmittance;
    sh_encode(ray.dir, model.sh_degree, sh.data());
    for (int k = 0; k < fd; ++k) rad_in[k] = pooled[k];
    for (int k = 0; k < dd; ++k) rad_in[fd + k] = static_cast<T>(sh[k]);
    T zrgb[3];
    model.radiance_net.forward(rad_in.data(), zrgb, tape);
    Vec3 ray_rgb;
    for (int ch = 0; ch < 3; ++ch) ray_rgb[ch] = static_cast<double>(logistic(zrgb[ch]));
    out.color = ray_rgb * (1.0 - transmittance);
    return out;
}

template <typename T>
Vec3 render_ray_boolean(const ImpostorModel<T>& model, const BooleanField& field,
                        const Ray& ray, const RenderOptions& opt) {
    const MaskedColor part = masked_render_ray(model, field, ray);
    return part.color + opt.background * part.transmittance;
}

namespace {

int pick_threads(int requested, int rows) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    return std::min(n, std::max(1, rows));
}

// Round-robin rows, same schedule as the plain image renderer, so results
// are identical for any worker count.
template <typename F>
void for_each_pixel(const Camera& camera, int threads, F&& shade) {
    const int n_threads = pick_threads(threads, camera.height);
    auto worker = [&](int first_row) {
        for (int y = first_row; y < camera.height; y += n_threads)
            for (int x = 0; x < camera.width; ++x) shade(x, y);
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker, k);
        for (auto& t : pool) t.join();
    }
}

}  // namespace

template <typename T>
Image render_image_boolean(const ImpostorModel<T>& model, const BooleanField& field,
                           const Camera& camera, const RenderOptions& opt) {
    Image image(camera.width, camera.height);
    for_each_pixel(camera, opt.threads, [&](int x, int y) {
        image.at(x, y) = render_ray_boolean(model, field, camera.ray_through(x, y), opt);
    });
    return image;
}

template <typename T>
Vec3 blend_ray(const ImpostorModel<T>& a, const BooleanField& mask_a,
               const ImpostorModel<T>& b, const BooleanField& mask_b, const Ray& ray,
               const Vec3& background) {
    const MaskedColor pa = masked_render_ray(a, mask_a, ray);
    const MaskedColor pb = masked_render_ray(b, mask_b, ray);
    return pa.color + pb.color + background * (pa.transmittance * pb.transmittance);
}

template <typename T>
Image blend_image(const ImpostorModel<T>& a, const BooleanField& mask_a,
                  const ImpostorModel<T>& b, const BooleanField& mask_b,
                  const Camera& camera, const RenderOptions& opt) {
    Image image(camera.width, camera.height);
    for_each_pixel(camera, opt.threads, [&](int x, int y) {
        image.at(x, y) =
            blend_ray(a, mask_a, b, mask_b, camera.ray_through(x, y), opt.background);
    });
    return image;
}

// ---------------------------------------------------------------------------
// Composition

Affine Affine::inverse() const {
    if (std::abs(linear.det()) < 1e-15)
        throw DataError("instance transform is singular");
    Affine out;
    out.linear = linear.inverse();
    out.translation = -(out.linear * translation);
    return out;
}

bool Affine::is_identity() const {
    const Mat3 id = Mat3::identity();
    for (int i = 0; i < 9; ++i)
        if (linear.m[i] != id.m[i]) return false;
    return translation.x == 0 && translation.y == 0 && translation.z == 0;
}

template <typename T>
Vec3 compose_ray(const std::vector<SceneInstance<T>>& instances, const Ray& ray,
                 const RenderOptions& opt) {
    if (instances.empty()) return opt.background;

    std::vector<TetSegment> merged;
    std::vector<int> owner;
    std::vector<Vec3> dirs;
    for (size_t k = 0; k < instances.size(); ++k) {
        const SceneInstance<T>& inst = instances[k];
        if (!inst.model) throw DataError("composite instance without a model");
        Ray local = ray;
        Vec3 sdir = ray.dir;
        if (!inst.to_world.is_identity()) {
            const Affine inv = inst.to_world.inverse();
            local.origin = inv.apply(ray.origin);
            local.dir = inv.linear * ray.dir;  // keeps the world ray parameter
            sdir = normalize(local.dir);
        }
        for (const TetSegment& seg : intersect_ray(inst.model->mesh, local)) {
            merged.push_back(seg);
            owner.push_back(static_cast<int>(k));
            dirs.push_back(sdir);
        }
    }

    std::vector<size_t> order(merged.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        if (merged[i].t_in != merged[j].t_in) return merged[i].t_in < merged[j].t_in;
        if (owner[i] != owner[j]) return owner[i] < owner[j];
        return merged[i].tet < merged[j].tet;
    });
    std::vector<TetSegment> segments;
    std::vector<int> seg_owner;
    std::vector<Vec3> seg_dirs;
    segments.reserve(merged.size());
    for (size_t i : order) {
        segments.push_back(merged[i]);
        seg_owner.push_back(owner[i]);
        seg_dirs.push_back(dirs[i]);
    }

    const std::vector<TetSample> samples =
        sample_segments(segments, seg_dirs, instances[0].model->sampler);

    // Per-instance scratch sized for its own feature width.
    const size_t n_inst = instances.size();
    std::vector<std::vector<T>> feat(n_inst), rad_in(n_inst);
    std::vector<std::vector<double>> sh(n_inst);
    for (size_t k = 0; k < n_inst; ++k) {
        feat[k].resize(instances[k].model->feature_dim());
        rad_in[k].resize(instances[k].model->feature_dim() +
                         instances[k].model->dir_dim());
        sh[k].resize(instances[k].model->dir_dim());
    }
    std::vector<Vec3> sh_dir(n_inst, Vec3{0, 0, 0});
    std::vector<bool> sh_valid(n_inst, false);
    typename Mlp<T>::Tape tape;

    double transmittance = 1.0;
    Vec3 color{0, 0, 0};
    for (const TetSample& s : samples) {
        const int k = seg_owner[s.seg];
        const ImpostorModel<T>& model = *instances[k].model;
        const int fd = model.feature_dim();
        const int dd = model.dir_dim();
        model.encode(s.tet, s.bary, feat[k].data());

        const double sigma = decode_density(model.density_net, feat[k].data(), tape);
        const double delta = s.dalpha * segment_span_l1(segments[s.seg]);
        const double tau = sigma * delta;
        const double pass = std::exp(-tau);
        const double a = -std::expm1(-tau);
        const double w = transmittance * a;

        if (!sh_valid[k] || !(s.dir.x == sh_dir[k].x && s.dir.y == sh_dir[k].y &&
                              s.dir.z == sh_dir[k].z)) {
            sh_encode(s.dir, model.sh_degree, sh[k].data());
            sh_dir[k] = s.dir;
            sh_valid[k] = true;
        }
        for (int i = 0; i < fd; ++i) rad_in[k][i] = feat[k][i];
        for (int i = 0; i < dd; ++i) rad_in[k][fd + i] = static_cast<T>(sh[k][i]);
        T zrgb[3];
        model.radiance_net.forward(rad_in[k].data(), zrgb, tape);
        Vec3 c;
        for (int ch = 0; ch < 3; ++ch) c[ch] = static_cast<double>(logistic(zrgb[ch]));
        color += c * w;
        transmittance *= pass;
    }
    return color + opt.background * transmittance;
}

template <typename T>
Image compose_image(const std::vector<SceneInstance<T>>& instances,
                    const Camera& camera, const RenderOptions& opt) {
    Image image(camera.width, camera.height);
    for_each_pixel(camera, opt.threads, [&](int x, int y) {
        image.at(x, y) = compose_ray(instances, camera.ray_through(x, y), opt);
    });
    return image;
}

// ---------------------------------------------------------------------------
// Scripts

std::vector<ScriptCommand> parse_script(std::istream& in) {
    std::vector<ScriptCommand> commands;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream words(line);
        ScriptCommand cmd;
        cmd.line = number;
        if (!(words >> cmd.op)) continue;
        std::string word;
        while (words >> word) cmd.args.push_back(word);
        commands.push_back(std::move(cmd));
    }
    return commands;
}

std::vector<ScriptCommand> load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open script " + path);
    return parse_script(in);
}

BoolOp parse_bool_op(const std::string& word) {
    if (word == "union") return BoolOp::Union;
    if (word == "inter") return BoolOp::Intersect;
    if (word == "diff") return BoolOp::Difference;
    if (word == "xor") return BoolOp::Xor;
    throw DataError("unknown boolean operator '" + word +
                    "' (expected union|inter|diff|xor)");
}

namespace {

double parse_number(const std::string& word, const char* what) {
    try {
        size_t used = 0;
        const double v = std::stod(word, &used);
        if (used != word.size()) throw std::invalid_argument(word);
        return v;
    } catch (const std::exception&) {
        throw DataError(std::string("expected a number for ") + what + ", got '" +
                        word + "'");
    }
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    if (base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(base_dir) / path).string();
}

}  // namespace

template <typename T>
BooleanField parse_bool_leaf(const std::vector<std::string>& args, std::size_t from,
                             const std::string& base_dir) {
    if (from >= args.size()) throw DataError("missing boolean leaf");
    const std::string& kind = args[from];
    const size_t n = args.size() - from - 1;
    auto num = [&](size_t i, const char* what) {
        return parse_number(args[from + 1 + i], what);
    };
    if (kind == "sphere") {
        if (n != 4) throw DataError("sphere leaf needs: cx cy cz r");
        return BooleanField::sphere(
            Vec3{num(0, "cx"), num(1, "cy"), num(2, "cz")}, num(3, "r"));
    }
    if (kind == "box") {
        if (n != 6) throw DataError("box leaf needs: lox loy loz hix hiy hiz");
        return BooleanField::box(Vec3{num(0, "lox"), num(1, "loy"), num(2, "loz")},
                                 Vec3{num(3, "hix"), num(4, "hiy"), num(5, "hiz")});
    }
    if (kind == "stamp") {
        if (n != 5 && n != 7)
            throw DataError("stamp leaf needs: mask.ppm lox loy hix hiy [loz hiz]");
        const Image mask = load_image(resolve(args[from + 1], base_dir));
        const double loz = n == 7 ? num(5, "loz") : -1e30;
        const double hiz = n == 7 ? num(6, "hiz") : 1e30;
        return BooleanField::stamp(mask, Vec3{num(1, "lox"), num(2, "loy"), loz},
                                   Vec3{num(3, "hix"), num(4, "hiy"), hiz});
    }
    if (kind == "model") {
        if (n != 1 && n != 2) throw DataError("model leaf needs: path [eps]");
        auto model = std::make_shared<const ImpostorModel<T>>(
            load_model<T>(resolve(args[from + 1], base_dir)));
        const double eps = n == 2 ? num(1, "eps") : kDefaultBooleanEps;
        return BooleanField::density<T>(std::move(model), eps);
    }
    throw DataError("unknown boolean leaf '" + kind +
                    "' (expected sphere|box|stamp|model)");
}

template <typename T>
BooleanField fold_boolean_script(const std::vector<ScriptCommand>& commands,
                                 BooleanField start, const std::string& base_dir) {
    BooleanField field = std::move(start);
    for (const ScriptCommand& cmd : commands) {
        try {
            const BoolOp op = parse_bool_op(cmd.op);
            field = BooleanField::combine(std::move(field),
                                          parse_bool_leaf<T>(cmd.args, 0, base_dir), op);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(cmd.line) + ": " + e.what());
        }
    }
    return field;
}

template <typename T>
std::vector<SceneInstance<T>> load_composite_scene(const std::string& path) {
    const std::string base_dir = std::filesystem::path(path).parent_path().string();
    std::vector<SceneInstance<T>> instances;
    for (const ScriptCommand& cmd : load_script(path)) {
        try {
            if (cmd.op != "instance")
                throw DataError("unknown scene command '" + cmd.op + "'");
            if (cmd.args.size() != 13)
                throw DataError(
                    "instance needs: model.nimp m00 m01 m02 m10 m11 m12 m20 m21 m22 "
                    "tx ty tz");
            double v[12];
            for (int i = 0; i < 12; ++i) v[i] = parse_number(cmd.args[i + 1], "matrix");
            SceneInstance<T> inst;
            inst.model = std::make_shared<const ImpostorModel<T>>(
                load_model<T>(resolve(cmd.args[0], base_dir)));
            inst.to_world.linear = Mat3::from_rows(
                Vec3{v[0], v[1], v[2]}, Vec3{v[3], v[4], v[5]}, Vec3{v[6], v[7], v[8]});
            inst.to_world.translation = Vec3{v[9], v[10], v[11]};
            if (std::abs(inst.to_world.linear.det()) < 1e-15)
                throw DataError("instance transform is singular");
            instances.push_back(std::move(inst));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(cmd.line) + ": " + e.what());
        }
    }
    if (instances.empty()) throw DataError("scene file has no instances: " + path);
    return instances;
}

// ---------------------------------------------------------------------------

template ImpostorModel<float> deform<float>(const ImpostorModel<float>&,
                                            std::vector<Vec3>);
template ImpostorModel<double> deform<double>(const ImpostorModel<double>&,
                                              std::vector<Vec3>);
template int boolean_status<float>(const ImpostorModel<float>&, int, const Bary4&,
                                   double);
template int boolean_status<double>(const ImpostorModel<double>&, int, const Bary4&,
                                    double);
template BooleanField BooleanField::density<float>(
    std::shared_ptr<const ImpostorModel<float>>, double);
template BooleanField BooleanField::density<double>(
    std::shared_ptr<const ImpostorModel<double>>, double);
template MaskedColor masked_render_ray<float>(const ImpostorModel<float>&,
                                              const BooleanField&, const Ray&);
template MaskedColor masked_render_ray<double>(const ImpostorModel<double>&,
                                               const BooleanField&, const Ray&);
template Vec3 render_ray_boolean<float>(const ImpostorModel<float>&, const BooleanField&,
                                        const Ray&, const RenderOptions&);
template Vec3 render_ray_boolean<double>(const ImpostorModel<double>&,
                                         const BooleanField&, const Ray&,
                                         const RenderOptions&);
template Image render_image_boolean<float>(const ImpostorModel<float>&,
                                           const BooleanField&, const Camera&,
                                           const RenderOptions&);
template Image render_image_boolean<double>(const ImpostorModel<double>&,
                                            const BooleanField&, const Camera&,
                                            const RenderOptions&);
template Vec3 blend_ray<float>(const ImpostorModel<float>&, const BooleanField&,
                               const ImpostorModel<float>&, const BooleanField&,
                               const Ray&, const Vec3&);
template Vec3 blend_ray<double>(const ImpostorModel<double>&, const BooleanField&,
                                const ImpostorModel<double>&, const BooleanField&,
                                const Ray&, const Vec3&);
template Image blend_image<float>(const ImpostorModel<float>&, const BooleanField&,
                                  const ImpostorModel<float>&, const BooleanField&,
                                  const Camera&, const RenderOptions&);
template Image blend_image<double>(const ImpostorModel<double>&, const BooleanField&,
                                   const ImpostorModel<double>&, const BooleanField&,
                                   const Camera&, const RenderOptions&);
template Vec3 compose_ray<float>(const std::vector<SceneInstance<float>>&, const Ray&,
                                 const RenderOptions&);
template Vec3 compose_ray<double>(const std::vector<SceneInstance<double>>&, const Ray&,
                                  const RenderOptions&);
template Image compose_image<float>(const std::vector<SceneInstance<float>>&,
                                    const Camera&, const RenderOptions&);
template Image compose_image<double>(const std::vector<SceneInstance<double>>&,
                                     const Camera&, const RenderOptions&);
template BooleanField parse_bool_leaf<float>(const std::vector<std::string>&,
                                             std::size_t, const std::string&);
template BooleanField parse_bool_leaf<double>(const std::vector<std::string>&,
                                              std::size_t, const std::string&);
template BooleanField fold_boolean_script<float>(const std::vector<ScriptCommand>&,
                                                 BooleanField, const std::string&);
template BooleanField fold_boolean_script<double>(const std::vector<ScriptCommand>&,
                                                  BooleanField, const std::string&);
template std::vector<SceneInstance<float>> load_composite_scene<float>(
    const std::string&);
template std::vector<SceneInstance<double>> load_composite_scene<double>(
    const std::string&);

}  // namespace nimp
