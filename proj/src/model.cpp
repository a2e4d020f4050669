#include "nimp/model.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "nimp/error.hpp"

namespace nimp {
namespace {

constexpr char kMagic[6] = {'N', 'I', 'M', 'P', '0', '1'};

template <typename V>
void put(std::ostream& out, V v) {
    char buf[sizeof(V)];
    std::memcpy(buf, &v, sizeof(V));
    out.write(buf, sizeof(V));
}

template <typename V>
V get(std::istream& in) {
    char buf[sizeof(V)];
    in.read(buf, sizeof(V));
    if (!in) throw DataError("checkpoint truncated");
    V v;
    std::memcpy(&v, buf, sizeof(V));
    return v;
}

template <typename T>
void put_net(std::ostream& out, const Mlp<T>& net) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.sizes.size()));
    for (int s : net.sizes) put<std::int32_t>(out, s);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (const T& w : net.weights[l]) put<float>(out, static_cast<float>(w));
        for (const T& b : net.biases[l]) put<float>(out, static_cast<float>(b));
    }
}

template <typename T>
Mlp<T> get_net(std::istream& in) {
    const std::uint32_t n = get<std::uint32_t>(in);
    if (n < 2 || n > 64) throw DataError("checkpoint has a malformed network");
    std::vector<int> sizes(n);
    for (auto& s : sizes) s = get<std::int32_t>(in);
    Mlp<T> net(sizes);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (T& w : net.weights[l]) w = static_cast<T>(get<float>(in));
        for (T& b : net.biases[l]) b = static_cast<T>(get<float>(in));
    }
    return net;
}

}  // namespace

template <typename T>
void save_model(const std::string& path, const ImpostorModel<T>& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint16_t>(out, 1);  // format revision

    const auto& mesh = model.mesh;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.vertices.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.tets.size()));
    for (const Vec3& v : mesh.vertices) {
        put<double>(out, v.x);
        put<double>(out, v.y);
        put<double>(out, v.z);
    }
    for (const auto& t : mesh.tets)
        for (int i : t) put<std::int32_t>(out, i);

    const HashLayout& lay = model.layout;
    put<std::int32_t>(out, lay.levels);
    put<std::int32_t>(out, lay.features);
    put<std::int32_t>(out, lay.global_log2);
    put<std::int32_t>(out, lay.per_tet_log2);
    for (int l = 0; l < lay.levels; ++l) put<std::int32_t>(out, lay.level_res[l]);
    for (int l = 0; l < lay.levels; ++l) put<std::int32_t>(out, lay.level_offset[l]);
    for (int l = 0; l < lay.levels; ++l) put<std::int32_t>(out, lay.level_size[l]);

    put<std::int32_t>(out, model.sh_degree);
    put<double>(out, model.sampler.base_step);
    put<double>(out, model.sampler.cone_angle);
    put<std::int32_t>(out, model.sampler.max_samples_per_ray);

    put_net(out, model.density_net);
    put_net(out, model.radiance_net);

    put<std::uint64_t>(out, static_cast<std::uint64_t>(model.table.values.size()));
    for (const T& v : model.table.values) put<float>(out, static_cast<float>(v));
    if (!out) throw DataError("checkpoint write failed: " + path);
}

template <typename T>
ImpostorModel<T> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a model checkpoint: " + path);
    const auto revision = get<std::uint16_t>(in);
    if (revision != 1) throw DataError("unsupported checkpoint revision");

    const auto nv = get<std::uint32_t>(in);
    const auto nt = get<std::uint32_t>(in);
    if (nv < 4 || nt < 1 || nv > 50'000'000 || nt > 50'000'000)
        throw DataError("checkpoint mesh counts out of range");
    std::vector<Vec3> vertices(nv);
    for (Vec3& v : vertices) {
        v.x = get<double>(in);
        v.y = get<double>(in);
        v.z = get<double>(in);
    }
    std::vector<std::array<int, 4>> tets(nt);
    for (auto& t : tets)
        for (int& i : t) i = get<std::int32_t>(in);

    ImpostorModel<T> model;
    model.mesh = build_mesh(vertices, tets);

    HashLayout lay;
    lay.tet_count = static_cast<int>(nt);
    lay.levels = get<std::int32_t>(in);
    lay.features = get<std::int32_t>(in);
    lay.global_log2 = get<std::int32_t>(in);
    lay.per_tet_log2 = get<std::int32_t>(in);
    if (lay.levels < 1 || lay.levels > 64 || lay.features < 1 || lay.features > 64 ||
        lay.per_tet_log2 < 4 || lay.per_tet_log2 > 30)
        throw DataError("checkpoint table layout out of range");
    lay.level_res.resize(lay.levels);
    lay.level_offset.resize(lay.levels);
    lay.level_size.resize(lay.levels);
    for (int l = 0; l < lay.levels; ++l) lay.level_res[l] = get<std::int32_t>(in);
    for (int l = 0; l < lay.levels; ++l) lay.level_offset[l] = get<std::int32_t>(in);
    for (int l = 0; l < lay.levels; ++l) lay.level_size[l] = get<std::int32_t>(in);
    int cursor = 0;
    for (int l = 0; l < lay.levels; ++l) {
        if (lay.level_res[l] < 1 || lay.level_size[l] < 1 ||
            lay.level_offset[l] != cursor)
            throw DataError("checkpoint table layout is inconsistent");
        cursor += lay.level_size[l];
    }
    if (cursor > lay.tet_slice()) throw DataError("checkpoint table layout is inconsistent");
    model.layout = lay;

    model.sh_degree = get<std::int32_t>(in);
    if (model.sh_degree < 1 || model.sh_degree > 4)
        throw DataError("checkpoint direction degree out of range");
    model.sampler.base_step = get<double>(in);
    model.sampler.cone_angle = get<double>(in);
    model.sampler.max_samples_per_ray = get<std::int32_t>(in);

    model.density_net = get_net<T>(in);
    model.radiance_net = get_net<T>(in);
    if (model.density_net.input_dim() != lay.feature_dim() ||
        model.density_net.output_dim() != 1 ||
        model.radiance_net.input_dim() != lay.feature_dim() + sh_dim(model.sh_degree) ||
        model.radiance_net.output_dim() != 3)
        throw DataError("checkpoint decoder shapes do not match the table layout");

    const auto count = get<std::uint64_t>(in);
    if (count != lay.total_vectors() * static_cast<std::uint64_t>(lay.features))
        throw DataError("checkpoint table size does not match its layout");
    model.table = FeatureTable<T>(lay);
    for (T& v : model.table.values) v = static_cast<T>(get<float>(in));
    return model;
}

template void save_model<float>(const std::string&, const ImpostorModel<float>&);
template void save_model<double>(const std::string&, const ImpostorModel<double>&);
template ImpostorModel<float> load_model<float>(const std::string&);
template ImpostorModel<double> load_model<double>(const std::string&);

}  // namespace nimp
