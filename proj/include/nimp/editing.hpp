#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "nimp/render.hpp"

namespace nimp {

// Moves the proxy vertices while keeping every feature and decoder intact;
// the field rides along in barycentric space. Throws when the frame size
// mismatches or any tet flips orientation (the message lists offenders);
// near-degenerate tets only earn a warning on stderr.
template <typename T>
ImpostorModel<T> deform(const ImpostorModel<T>& model, std::vector<Vec3> vertices);

// 1 iff the decoded density at the sample exceeds the threshold.
template <typename T>
int boolean_status(const ImpostorModel<T>& model, int tet, const Bary4& bary,
                   double eps);

// Density cut separating "solid" from "empty" when a model acts as a set;
// the decoded density is exp(z) and never reaches zero, so the cut sits
// strictly above it.
constexpr double kDefaultBooleanEps = 0.01;

enum class BoolOp { Union, Intersect, Difference, Xor };

// Set-valued expression tree over world-space predicates. Values are 0/1 and
// the operators use the arithmetic forms a+b-ab, ab, a-ab, (a+b) mod 2.
class BooleanField {
  public:
    BooleanField() = default;  // invalid until assigned; evaluation throws

    static BooleanField everything();
    static BooleanField nothing();
    static BooleanField sphere(const Vec3& center, double radius);
    static BooleanField box(const Vec3& lo, const Vec3& hi);
    // Mask image stamped through the volume: inside where (x, y) falls in the
    // window and the covering pixel's mean channel value exceeds one half,
    // for any z between lo.z and hi.z.
    static BooleanField stamp(Image mask, const Vec3& lo, const Vec3& hi);
    // Solid region of a model: density above eps wherever the point lands in
    // the proxy, empty outside it. The model stays alive with the field.
    template <typename T>
    static BooleanField density(std::shared_ptr<const ImpostorModel<T>> model,
                                double eps = kDefaultBooleanEps);
    static BooleanField combine(BooleanField a, BooleanField b, BoolOp op);

    int operator()(const Vec3& p) const;
    bool valid() const { return root_ != nullptr; }

  private:
    struct Node;
    explicit BooleanField(std::shared_ptr<const Node> root);
    std::shared_ptr<const Node> root_;
};

// One masked early-integration pass. The color excludes the background term
// so callers can composite several passes themselves.
struct MaskedColor {
    Vec3 color{0, 0, 0};
    double transmittance = 1.0;
};
template <typename T>
MaskedColor masked_render_ray(const ImpostorModel<T>& model, const BooleanField& field,
                              const Ray& ray);

// Early-integration render with each sample's density gated by the field.
// With the field covering everything this reproduces the plain render.
template <typename T>
Vec3 render_ray_boolean(const ImpostorModel<T>& model, const BooleanField& field,
                        const Ray& ray, const RenderOptions& opt);
template <typename T>
Image render_image_boolean(const ImpostorModel<T>& model, const BooleanField& field,
                           const Camera& camera, const RenderOptions& opt);

// Two-term blend: each model contributes its own masked pass and the
// background shines through both transmittances. Overlapping masks simply
// add, which can overshoot; pick disjoint regions when that matters.
template <typename T>
Vec3 blend_ray(const ImpostorModel<T>& a, const BooleanField& mask_a,
               const ImpostorModel<T>& b, const BooleanField& mask_b, const Ray& ray,
               const Vec3& background);
template <typename T>
Image blend_image(const ImpostorModel<T>& a, const BooleanField& mask_a,
                  const ImpostorModel<T>& b, const BooleanField& mask_b,
                  const Camera& camera, const RenderOptions& opt);

// Placement p_local -> linear * p_local + translation.
struct Affine {
    Mat3 linear = Mat3::identity();
    Vec3 translation{0, 0, 0};
    Vec3 apply(const Vec3& p) const { return linear * p + translation; }
    Affine inverse() const;  // throws when the linear part is singular
    bool is_identity() const;
};

template <typename T>
struct SceneInstance {
    std::shared_ptr<const ImpostorModel<T>> model;
    Affine to_world;
};

// Renders several placed models through one transmittance chain: the world
// ray is pulled into each instance's frame, per-tet segments are merged in
// ray order, and every sample decodes against its own model with its local
// view direction. Marching parameters come from the first instance.
template <typename T>
Vec3 compose_ray(const std::vector<SceneInstance<T>>& instances, const Ray& ray,
                 const RenderOptions& opt);
template <typename T>
Image compose_image(const std::vector<SceneInstance<T>>& instances,
                    const Camera& camera, const RenderOptions& opt);

// Line-oriented command files: one command per line, '#' starts a comment,
// blank lines are skipped. The first token names the command.
struct ScriptCommand {
    std::string op;
    std::vector<std::string> args;
    int line = 0;  // 1-based source line for diagnostics
};
std::vector<ScriptCommand> parse_script(std::istream& in);
std::vector<ScriptCommand> load_script(const std::string& path);

// union | inter | diff | xor
BoolOp parse_bool_op(const std::string& word);

// Region leaves named by arguments, starting at args[from]:
//   sphere cx cy cz r
//   box lox loy loz hix hiy hiz
//   stamp mask.ppm lox loy hix hiy [loz hiz]
//   model path.nimp [eps]
// Relative paths resolve against base_dir when given.
template <typename T>
BooleanField parse_bool_leaf(const std::vector<std::string>& args, std::size_t from = 0,
                             const std::string& base_dir = "");

// Folds "<op> <leaf...>" commands onto a running field.
template <typename T>
BooleanField fold_boolean_script(const std::vector<ScriptCommand>& commands,
                                 BooleanField start, const std::string& base_dir = "");

// Composite scene files, one instance per line:
//   instance model.nimp m00 m01 m02 m10 m11 m12 m20 m21 m22 tx ty tz
// Model paths resolve against the scene file's directory.
template <typename T>
std::vector<SceneInstance<T>> load_composite_scene(const std::string& path);

}  // namespace nimp
