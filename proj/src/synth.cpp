#include "lmc/synth.hpp"

#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lmc/rng.hpp"

namespace lmc {

FieldKind field_from_name(const std::string& name) {
    if (name == "translation") return FieldKind::translation;
    if (name == "rotation_scale") return FieldKind::rotation_scale;
    if (name == "affine") return FieldKind::affine;
    if (name == "piecewise_affine") return FieldKind::piecewise_affine;
    throw std::invalid_argument("unknown field kind '" + name + "'");
}

std::string field_name(FieldKind kind) {
    switch (kind) {
        case FieldKind::translation: return "translation";
        case FieldKind::rotation_scale: return "rotation_scale";
        case FieldKind::affine: return "affine";
        case FieldKind::piecewise_affine: return "piecewise_affine";
    }
    return "?";
}

void SceneSpec::validate() const {
    if (n_points < 1) throw std::invalid_argument("SceneSpec: n_points must be >= 1");
    if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0))
        throw std::invalid_argument("SceneSpec: outlier_ratio must lie in [0,1)");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw std::invalid_argument("SceneSpec: noise_std must be finite and >= 0");
    if (field_kind == FieldKind::piecewise_affine && regions < 2)
        throw std::invalid_argument("SceneSpec: piecewise_affine needs regions >= 2");
}

namespace {

struct AffineMap2 {
    Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
    Eigen::Vector2d t = Eigen::Vector2d::Zero();

    Eigen::Vector2d apply(const Eigen::Vector2d& p) const { return a * p + t; }
};

// Draw order (fixed): translation tx,ty | rotation_scale cx,cy,angle,scale |
// affine a00,a01,a10,a11,tx,ty.
AffineMap2 draw_translation(Rng& rng) {
    AffineMap2 m;
    m.t[0] = rng.next_in(-0.4, 0.4);
    m.t[1] = rng.next_in(-0.4, 0.4);
    return m;
}

AffineMap2 draw_rotation_scale(Rng& rng) {
    Eigen::Vector2d c;
    c[0] = rng.next_in(-0.3, 0.3);
    c[1] = rng.next_in(-0.3, 0.3);
    const double angle = rng.next_in(-M_PI / 6.0, M_PI / 6.0);
    const double scale = rng.next_in(0.7, 1.1);
    AffineMap2 m;
    m.a << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    m.a *= scale;
    m.t = c - m.a * c;
    return m;
}

AffineMap2 draw_affine(Rng& rng) {
    AffineMap2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m.a(r, c) = (r == c ? 1.0 : 0.0) + rng.next_in(-0.25, 0.25);
    m.t[0] = rng.next_in(-0.3, 0.3);
    m.t[1] = rng.next_in(-0.3, 0.3);
    return m;
}

bool in_unit_box(const Eigen::Vector2d& p) {
    return p[0] >= -1.0 && p[0] <= 1.0 && p[1] >= -1.0 && p[1] <= 1.0;
}

}  // namespace

CorrespondenceSet generate_scene(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int n = spec.n_points;

    // 1. field parameters
    std::vector<AffineMap2> maps;
    std::vector<Eigen::Vector2d> sites;  // piecewise region centers
    switch (spec.field_kind) {
        case FieldKind::translation: maps.push_back(draw_translation(rng)); break;
        case FieldKind::rotation_scale: maps.push_back(draw_rotation_scale(rng)); break;
        case FieldKind::affine: maps.push_back(draw_affine(rng)); break;
        case FieldKind::piecewise_affine:
            sites.resize(spec.regions);
            for (auto& s : sites) {
                s[0] = rng.next_in(-1.0, 1.0);
                s[1] = rng.next_in(-1.0, 1.0);
            }
            for (int r = 0; r < spec.regions; ++r) maps.push_back(draw_affine(rng));
            break;
    }
    auto region_of = [&sites](const Eigen::Vector2d& p) {
        int best = 0;
        double best_d = (p - sites[0]).squaredNorm();
        for (std::size_t r = 1; r < sites.size(); ++r) {
            const double d = (p - sites[r]).squaredNorm();
            if (d < best_d) {  // strict: ties go to the lower site index
                best_d = d;
                best = static_cast<int>(r);
            }
        }
        return best;
    };

    // 2. exact outlier allocation: round(n * ratio) shuffled indices
    const int n_out = static_cast<int>(std::lround(n * spec.outlier_ratio));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    std::vector<int> labels(n, 1);
    for (int t = 0; t < n_out; ++t) labels[order[t]] = 0;

    // 3. points, in index order
    CorrespondenceSet set;
    set.items.resize(n);
    set.labels = labels;
    for (int i = 0; i < n; ++i) {
        if (labels[i] == 0) {
            set.items[i] = {rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0),
                            rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0)};
            continue;
        }
        bool placed = false;
        int map_idx = 0;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            Eigen::Vector2d src(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0));
            map_idx = sites.empty() ? 0 : region_of(src);
            Eigen::Vector2d dst = maps[map_idx].apply(src);
            if (spec.noise_std > 0.0) {
                const auto [gx, gy] = rng.next_gaussian_pair();
                dst[0] += spec.noise_std * gx;
                dst[1] += spec.noise_std * gy;
            }
            if (in_unit_box(dst)) {
                set.items[i] = {src[0], src[1], dst[0], dst[1]};
                placed = true;
            }
        }
        if (!placed)
            throw std::runtime_error("generate_scene: could not keep a target of " +
                                     field_name(spec.field_kind) + " map " +
                                     std::to_string(map_idx) + " inside [-1,1] after 1000 tries");
    }
    set.validate(true);
    return set;
}

}  // namespace lmc
