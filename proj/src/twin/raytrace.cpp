// SPDX-License-Identifier: Apache-2.0
#include "dtcb/error.hpp"
#include "dtcb/scene.hpp"

#include <algorithm>
#include <cmath>

namespace dtcb {

namespace {

constexpr double kGeomEps = 1e-9;

struct Vec2 {
    double x, y;
};

// A vertical building face: the plane coord[axis] == c, spanning [lo, hi]
// along the other horizontal axis and [0, height] in z.
struct Face {
    int axis;        // 0: x = c, 1: y = c
    double c;
    double lo, hi;
    double normal;   // +1 / -1, outward direction along `axis`
    double height;
    double loss_db;
};

double along(const Vec2& p, int axis) { return axis == 0 ? p.x : p.y; }
double across(const Vec2& p, int axis) { return axis == 0 ? p.y : p.x; }

double side(const Face& f, const Vec2& p) { return f.normal * (along(p, f.axis) - f.c); }

Vec2 mirror(const Face& f, const Vec2& p) {
    return f.axis == 0 ? Vec2{2.0 * f.c - p.x, p.y} : Vec2{p.x, 2.0 * f.c - p.y};
}

double effective_loss(const Scene& scene, const FidelityKnobs& knobs, const Building& b) {
    const double base = knobs.material_override ? knobs.material_override->reflection_loss_db
                                                : scene.material(b.material).reflection_loss_db;
    return std::max(0.0, base + knobs.material_loss_delta_db);
}

std::vector<Face> collect_faces(const Scene& scene, const FidelityKnobs& knobs) {
    std::vector<Face> faces;
    faces.reserve(scene.buildings.size() * 4);
    for (const Building& b : scene.buildings) {
        const double loss = effective_loss(scene, knobs, b);
        faces.push_back({0, b.xmin, b.ymin, b.ymax, -1.0, b.height, loss});
        faces.push_back({0, b.xmax, b.ymin, b.ymax, +1.0, b.height, loss});
        faces.push_back({1, b.ymin, b.xmin, b.xmax, -1.0, b.height, loss});
        faces.push_back({1, b.ymax, b.xmin, b.xmax, +1.0, b.height, loss});
    }
    return faces;
}

// Does the open segment p->q pass through the interior of the box?
bool segment_hits_building(const Vec3& p, const Vec3& q, const Building& b) {
    const double d[3] = {q.x - p.x, q.y - p.y, q.z - p.z};
    const double o[3] = {p.x, p.y, p.z};
    const double lo[3] = {b.xmin, b.ymin, 0.0};
    const double hi[3] = {b.xmax, b.ymax, b.height};
    double t0 = 0.0;
    double t1 = 1.0;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] <= lo[a] + kGeomEps || o[a] >= hi[a] - kGeomEps) return false;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a];
        double tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1) return false;
    }
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    return (t1 - t0) * len > 1e-7;
}

bool segment_clear(const Scene& scene, const Vec3& p, const Vec3& q) {
    for (const Building& b : scene.buildings)
        if (segment_hits_building(p, q, b)) return false;
    return true;
}

double aoa_from_direction(const Scene& scene, double dx, double dy) {
    const double n = std::hypot(dx, dy);
    if (n < 1e-12) return kPi / 2;
    // Array axis: broadside rotated by +90 degrees.
    const double ux = -std::sin(scene.bs_boresight);
    const double uy = std::cos(scene.bs_boresight);
    const double c = std::clamp((ux * dx + uy * dy) / n, -1.0, 1.0);
    return std::acos(c);
}

class Tracer {
public:
    Tracer(const Scene& scene, const FidelityKnobs& knobs, const Vec3& ue, const ArrayConfig& cfg)
        : scene_(scene), faces_(collect_faces(scene, knobs)), ue_(ue), cfg_(cfg),
          order_(knobs.max_reflection_order) {}

    std::vector<TracedPath> run() {
        if (los_check(scene_, ue_)) {
            TracedPath p;
            p.points = {scene_.bs_position, ue_};
            finish(p);
            out_.push_back(std::move(p));
        }
        for (int n = 1; n <= order_; ++n) {
            seq_.assign(static_cast<std::size_t>(n), 0);
            images_.assign(static_cast<std::size_t>(n) + 1, Vec2{});
            images_[0] = {scene_.bs_position.x, scene_.bs_position.y};
            enumerate(0, n);
        }
        return std::move(out_);
    }

private:
    void enumerate(int depth, int n) {
        if (depth == n) {
            try_sequence(n);
            return;
        }
        for (int f = 0; f < static_cast<int>(faces_.size()); ++f) {
            if (depth > 0 && seq_[depth - 1] == f) continue;
            const Face& face = faces_[f];
            // The (image) source must face the reflecting side of the wall.
            if (side(face, images_[depth]) <= kGeomEps) continue;
            seq_[depth] = f;
            images_[depth + 1] = mirror(face, images_[depth]);
            enumerate(depth + 1, n);
        }
    }

    void try_sequence(int n) {
        std::vector<Vec2> pts(static_cast<std::size_t>(n) + 2);
        pts[0] = {scene_.bs_position.x, scene_.bs_position.y};
        pts[n + 1] = {ue_.x, ue_.y};
        Vec2 target = pts[n + 1];
        for (int i = n; i >= 1; --i) {
            const Face& f = faces_[seq_[i - 1]];
            const Vec2& img = images_[i];
            if (side(f, target) <= kGeomEps) return;
            const double a0 = along(img, f.axis);
            const double a1 = along(target, f.axis);
            const double t = (f.c - a0) / (a1 - a0);
            const double c0 = across(img, f.axis);
            const double c1 = across(target, f.axis);
            const double hit = c0 + t * (c1 - c0);
            if (hit < f.lo - kGeomEps || hit > f.hi + kGeomEps) return;
            target = f.axis == 0 ? Vec2{f.c, hit} : Vec2{hit, f.c};
            pts[i] = target;
        }
        // Every bounce must be approached from the reflecting side.
        for (int i = 1; i <= n; ++i)
            if (side(faces_[seq_[i - 1]], pts[i - 1]) <= kGeomEps) return;

        double horizontal = 0.0;
        std::vector<double> cumulative(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            horizontal += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
            cumulative[i] = horizontal;
        }
        if (horizontal < kGeomEps) return;

        TracedPath path;
        path.points.resize(pts.size());
        const double z0 = scene_.bs_position.z;
        const double z1 = ue_.z;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double z = z0 + (z1 - z0) * (cumulative[i] / horizontal);
            path.points[i] = {pts[i].x, pts[i].y, z};
        }
        path.points.front() = scene_.bs_position;
        path.points.back() = ue_;
        for (int i = 1; i <= n; ++i) {
            const Face& f = faces_[seq_[i - 1]];
            const double z = path.points[i].z;
            if (z <= 0.0 || z >= f.height) return;
        }
        for (std::size_t i = 1; i < path.points.size(); ++i)
            if (!segment_clear(scene_, path.points[i - 1], path.points[i])) return;

        path.faces.assign(seq_.begin(), seq_.begin() + n);
        for (int fi : path.faces) path.loss_db += faces_[fi].loss_db;
        finish(path);
        out_.push_back(std::move(path));
    }

    void finish(TracedPath& p) const {
        double len = 0.0;
        for (std::size_t i = 1; i < p.points.size(); ++i) {
            const Vec3& a = p.points[i - 1];
            const Vec3& b = p.points[i];
            len += std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) + (b.z - a.z) * (b.z - a.z));
        }
        p.length = len;
        const double lambda = cfg_.wavelength();
        const double mag = lambda / (4.0 * kPi * len) * std::pow(10.0, -p.loss_db / 20.0);
        p.component.gain = std::polar(mag, -cfg_.wavenumber() * len);
        p.component.interaction_count = static_cast<int>(p.faces.size());
        p.component.angle_of_arrival =
            aoa_from_direction(scene_, p.points[1].x - p.points[0].x, p.points[1].y - p.points[0].y);
    }

    const Scene& scene_;
    std::vector<Face> faces_;
    Vec3 ue_;
    ArrayConfig cfg_;
    int order_;
    std::vector<int> seq_;
    std::vector<Vec2> images_;
    std::vector<TracedPath> out_;
};

} // namespace

int UserGrid::nx() const { return static_cast<int>(std::floor((xmax - xmin) / spacing + 1e-9)) + 1; }
int UserGrid::ny() const { return static_cast<int>(std::floor((ymax - ymin) / spacing + 1e-9)) + 1; }

bool UserGrid::contains(const Vec3& p) const {
    constexpr double tol = 1e-9;
    return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
}

void Scene::validate() const {
    for (const Material& m : materials)
        if (!(m.reflection_loss_db >= 0.0))
            throw ConfigError("scene: material '" + m.name + "' has a negative reflection loss");
    for (std::size_t i = 0; i < buildings.size(); ++i) {
        const Building& b = buildings[i];
        if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin) || !(b.height > 0.0))
            throw ConfigError("scene: building " + std::to_string(i) + " is degenerate");
        material(b.material);
        if (b.contains_xy(bs_position.x, bs_position.y) && bs_position.z < b.height)
            throw ConfigError("scene: base station lies inside building " + std::to_string(i));
    }
    if (!(user_grid.spacing > 0.0)) throw ConfigError("scene: user grid spacing must be > 0");
    if (user_grid.xmax < user_grid.xmin || user_grid.ymax < user_grid.ymin)
        throw ConfigError("scene: user grid rectangle is inverted");
}

const Material& Scene::material(const std::string& name) const {
    for (const Material& m : materials)
        if (m.name == name) return m;
    throw ConfigError("scene: unknown material '" + name + "'");
}

bool Scene::inside_building(double x, double y) const {
    return std::any_of(buildings.begin(), buildings.end(),
                       [&](const Building& b) { return b.contains_xy(x, y); });
}

void FidelityKnobs::validate() const {
    if (max_reflection_order < 0 || max_reflection_order > kMaxReflectionOrder)
        throw ConfigError("fidelity: max_reflection_order must be in [0, 4]");
    if (!(geometry_noise_sigma >= 0.0)) throw ConfigError("fidelity: geometry_noise_sigma must be >= 0");
    if (material_override && !(material_override->reflection_loss_db >= 0.0))
        throw ConfigError("fidelity: material override has a negative reflection loss");
}

bool los_check(const Scene& scene, const Vec3& ue) { return segment_clear(scene, scene.bs_position, ue); }

std::vector<TracedPath> trace_path_geometry(const Scene& scene, const FidelityKnobs& knobs,
                                            const Vec3& ue, const ArrayConfig& cfg) {
    knobs.validate();
    if (!scene.user_grid.contains(ue)) throw DataError("trace: user position outside the user grid");
    return Tracer(scene, knobs, ue, cfg).run();
}

std::vector<PathComponent> trace_paths(const Scene& scene, const FidelityKnobs& knobs, const Vec3& ue,
                                       const ArrayConfig& cfg) {
    std::vector<PathComponent> out;
    for (const TracedPath& p : trace_path_geometry(scene, knobs, ue, cfg)) out.push_back(p.component);
    return out;
}

} // namespace dtcb
