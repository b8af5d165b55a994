#include "padnet/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "padnet/config.hpp"
#include "padnet/ops.hpp"

namespace padnet {
namespace {

std::array<double, 3> class_color(std::size_t cls) {
    static constexpr std::array<std::array<double, 3>, 8> kPalette{{
        {0.50, 0.50, 0.50},  // background / ground plane
        {0.80, 0.25, 0.20},
        {0.20, 0.65, 0.30},
        {0.25, 0.35, 0.85},
        {0.85, 0.75, 0.20},
        {0.70, 0.30, 0.75},
        {0.20, 0.75, 0.75},
        {0.95, 0.55, 0.35},
    }};
    if (cls < kPalette.size()) return kPalette[cls];
    Rng rng = make_rng(cls, 99);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    return {u(rng), u(rng), u(rng)};
}

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::size_t nearest_src(std::size_t o, std::size_t in, std::size_t out) {
    if (out <= 1) return 0;
    const double src = static_cast<double>(o) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
    return std::min(in - 1, static_cast<std::size_t>(std::lround(src)));
}

}  // namespace

void SceneConfig::validate() const {
    const std::string p = "scene.";
    if (height == 0 || width == 0 || height % 8 != 0 || width % 8 != 0) {
        throw SchemaError(p + "height", "canvas must be non-empty and divisible by 8");
    }
    if (min_objects > max_objects) throw SchemaError(p + "min_objects", "exceeds max_objects");
    if (num_classes < 2 || num_classes > 255) throw SchemaError(p + "num_classes", "must be in [2, 255]");
    if (!(near_depth > 0.0) || !(far_depth > near_depth)) {
        throw SchemaError(p + "near_depth", "need 0 < near_depth < far_depth");
    }
    if (!(camera_constant > 0.0)) throw SchemaError(p + "camera_constant", "must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw SchemaError(p + "dropout", "must be in [0, 1)");
    if (!(noise >= 0.0)) throw SchemaError(p + "noise", "must be non-negative");
}

Sample generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
    cfg.validate();
    Rng rng = make_rng(seed, 100);
    const std::size_t H = cfg.height, W = cfg.width;
    const double span = cfg.far_depth - cfg.near_depth;
    auto plane_depth = [&](std::size_t y) {
        return cfg.near_depth + span * static_cast<double>(y) / static_cast<double>(std::max<std::size_t>(H - 1, 1));
    };

    Sample s;
    s.num_classes = cfg.num_classes;
    s.depth = Tensor4(Shape{1, 1, H, W});
    s.labels = LabelMap(1, H, W, 0);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) s.depth.at(0, 0, y, x) = plane_depth(y);

    std::uniform_int_distribution<std::size_t> count_dist(cfg.min_objects, cfg.max_objects);
    const std::size_t objects = count_dist(rng);
    const std::size_t min_side = std::max<std::size_t>(2, std::min(H, W) / 8);
    const std::size_t max_side = std::max(min_side, std::min(H, W) / 2);
    std::uniform_int_distribution<std::size_t> side(min_side, max_side);
    std::uniform_int_distribution<std::size_t> cls_dist(1, cfg.num_classes - 1);
    std::uniform_real_distribution<double> near_frac(0.45, 0.85);
    std::uniform_real_distribution<double> slope_dist(-0.3, 0.1);
    std::bernoulli_distribution sloped(0.5), slope_along_x(0.5);

    for (std::size_t k = 0; k < objects; ++k) {
        const std::size_t oh = side(rng), ow = side(rng);
        const std::size_t y0 = std::uniform_int_distribution<std::size_t>(0, H - oh)(rng);
        const std::size_t x0 = std::uniform_int_distribution<std::size_t>(0, W - ow)(rng);
        const auto cls = static_cast<std::uint8_t>(cls_dist(rng));
        // Nearer than the plane anywhere inside the rectangle: the plane is
        // shallowest on the top row, and the slope factor stays below 1.1.
        const double base = near_frac(rng) * plane_depth(y0);
        const double slope = sloped(rng) ? slope_dist(rng) : 0.0;
        const bool along_x = slope_along_x(rng);
        for (std::size_t y = y0; y < y0 + oh; ++y)
            for (std::size_t x = x0; x < x0 + ow; ++x) {
                const double t = along_x ? static_cast<double>(x - x0) / static_cast<double>(ow)
                                         : static_cast<double>(y - y0) / static_cast<double>(oh);
                const double d = base * (1.0 + slope * t);
                if (d < s.depth.at(0, 0, y, x)) {
                    s.depth.at(0, 0, y, x) = d;
                    s.labels.at(0, y, x) = cls;
                }
            }
    }

    s.image = Tensor4(Shape{1, 3, H, W});
    std::normal_distribution<double> noise(0.0, cfg.noise);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            const double d = s.depth.at(0, 0, y, x);
            const double shade = std::clamp(1.0 - 0.5 * (d - cfg.near_depth) / span, 0.4, 1.0);
            const auto color = class_color(s.labels.at(0, y, x));
            for (std::size_t c = 0; c < 3; ++c) {
                s.image.at(0, c, y, x) = to_f32(std::clamp(color[c] * shade + noise(rng), 0.0, 1.0));
            }
        }

    std::bernoulli_distribution drop(cfg.dropout);
    for (double& d : s.depth.data()) {
        d = drop(rng) ? 0.0 : to_f32(d);
    }
    derive_targets(s, cfg.camera_constant);
    return s;
}

NormalMap normals_from_depth(const Tensor4& depth, const Tensor4& valid_mask, double scale) {
    const Shape s = depth.shape();
    if (s.c != 1) throw ConfigError("normals_from_depth: depth must have one channel, got " + s.str());
    if (valid_mask.shape() != s) throw ConfigError("normals_from_depth: mask shape mismatch");
    NormalMap out{Tensor4(Shape{s.n, 3, s.h, s.w}), Tensor4(s)};
    auto valid = [&](std::size_t n, std::size_t y, std::size_t x) { return valid_mask.at(n, 0, y, x) != 0.0; };
    auto z = [&](std::size_t n, std::size_t y, std::size_t x) { return scale * depth.at(n, 0, y, x); };

    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) {
                if (!valid(n, y, x)) continue;
                // Stencil endpoints along each axis (one-sided at borders).
                const std::size_t xl = x > 0 ? x - 1 : x, xr = x + 1 < s.w ? x + 1 : x;
                const std::size_t yu = y > 0 ? y - 1 : y, yd = y + 1 < s.h ? y + 1 : y;
                if (!valid(n, y, xl) || !valid(n, y, xr) || !valid(n, yu, x) || !valid(n, yd, x)) continue;
                const double dzdx = xr > xl ? (z(n, y, xr) - z(n, y, xl)) / static_cast<double>(xr - xl) : 0.0;
                const double dzdy = yd > yu ? (z(n, yd, x) - z(n, yu, x)) / static_cast<double>(yd - yu) : 0.0;
                const double norm = std::sqrt(dzdx * dzdx + dzdy * dzdy + 1.0);
                out.normal.at(n, 0, y, x) = -dzdx / norm;
                out.normal.at(n, 1, y, x) = -dzdy / norm;
                out.normal.at(n, 2, y, x) = 1.0 / norm;
                out.mask.at(n, 0, y, x) = 1.0;
            }
    return out;
}

Tensor4 contours_from_semantics(const LabelMap& labels, std::uint8_t ignore_index) {
    Tensor4 out(Shape{labels.n, 1, labels.h, labels.w});
    for (std::size_t n = 0; n < labels.n; ++n)
        for (std::size_t y = 0; y < labels.h; ++y)
            for (std::size_t x = 0; x < labels.w; ++x) {
                const std::uint8_t own = labels.at(n, y, x);
                auto differs = [&](std::size_t yy, std::size_t xx) {
                    const std::uint8_t other = labels.at(n, yy, xx);
                    return other != ignore_index && other != own;
                };
                const bool edge = (x > 0 && differs(y, x - 1)) || (x + 1 < labels.w && differs(y, x + 1)) ||
                                  (y > 0 && differs(y - 1, x)) || (y + 1 < labels.h && differs(y + 1, x));
                out.at(n, 0, y, x) = edge ? 1.0 : 0.0;
            }
    return out;
}

void derive_targets(Sample& sample, double camera_constant) {
    sample.valid_mask = Tensor4(sample.depth.shape());
    for (std::size_t i = 0; i < sample.depth.size(); ++i) sample.valid_mask[i] = sample.depth[i] > 0.0 ? 1.0 : 0.0;
    NormalMap nm = normals_from_depth(sample.depth, sample.valid_mask, camera_constant);
    sample.normal = std::move(nm.normal);
    sample.normal_mask = std::move(nm.mask);
    sample.contour = contours_from_semantics(sample.labels);
}

Tensor4 resize_bilinear(const Tensor4& t, std::size_t out_h, std::size_t out_w) {
    Tape tape;
    return bilinear_resize(tape.constant(t), out_h, out_w).value();
}

Tensor4 resize_nearest(const Tensor4& t, std::size_t out_h, std::size_t out_w) {
    const Shape s = t.shape();
    Tensor4 out(Shape{s.n, s.c, out_h, out_w});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t y = 0; y < out_h; ++y)
                for (std::size_t x = 0; x < out_w; ++x)
                    out.at(n, c, y, x) = t.at(n, c, nearest_src(y, s.h, out_h), nearest_src(x, s.w, out_w));
    return out;
}

LabelMap resize_nearest(const LabelMap& labels, std::size_t out_h, std::size_t out_w) {
    LabelMap out(labels.n, out_h, out_w);
    for (std::size_t n = 0; n < labels.n; ++n)
        for (std::size_t y = 0; y < out_h; ++y)
            for (std::size_t x = 0; x < out_w; ++x)
                out.at(n, y, x) = labels.at(n, nearest_src(y, labels.h, out_h), nearest_src(x, labels.w, out_w));
    return out;
}

Sample augment_with(const Sample& sample, const AugmentParams& params, double camera_constant) {
    if (!(params.ratio > 0.0)) throw ConfigError("augment: ratio must be positive");
    const std::size_t H = sample.height(), W = sample.width();
    const auto rh = static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(H) * params.ratio)));
    const auto rw = static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(W) * params.ratio)));

    Tensor4 image = resize_bilinear(sample.image, rh, rw);
    Tensor4 depth = resize_bilinear(sample.depth, rh, rw);
    const Tensor4 support = resize_bilinear(sample.valid_mask, rh, rw);
    LabelMap labels = resize_nearest(sample.labels, rh, rw);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        // Interpolated depth is only trusted where every contributing pixel was valid.
        depth[i] = support[i] >= 1.0 - 1e-12 ? depth[i] / params.ratio : 0.0;
    }

    Sample out;
    out.num_classes = sample.num_classes;
    out.image = Tensor4(Shape{1, 3, H, W});
    out.depth = Tensor4(Shape{1, 1, H, W});
    out.labels = LabelMap(1, H, W, kIgnoreLabel);
    for (std::size_t y = 0; y < H; ++y) {
        const long sy = static_cast<long>(y) + params.crop_y;
        if (sy < 0 || sy >= static_cast<long>(rh)) continue;
        for (std::size_t x = 0; x < W; ++x) {
            const long cx = static_cast<long>(x) + params.crop_x;
            if (cx < 0 || cx >= static_cast<long>(rw)) continue;
            const auto yy = static_cast<std::size_t>(sy);
            const std::size_t xx = params.flip ? rw - 1 - static_cast<std::size_t>(cx) : static_cast<std::size_t>(cx);
            for (std::size_t c = 0; c < 3; ++c) out.image.at(0, c, y, x) = image.at(0, c, yy, xx);
            out.depth.at(0, 0, y, x) = depth.at(0, 0, yy, xx);
            out.labels.at(0, y, x) = labels.at(0, yy, xx);
        }
    }
    derive_targets(out, camera_constant);
    return out;
}

AugmentParams draw_augment(const Sample& sample, Rng& rng, std::span<const double> ratios) {
    if (ratios.empty()) throw ConfigError("augment: empty ratio set");
    AugmentParams p;
    p.ratio = ratios[std::uniform_int_distribution<std::size_t>(0, ratios.size() - 1)(rng)];
    p.flip = std::bernoulli_distribution(0.5)(rng);
    auto offset = [&](std::size_t extent) {
        const long scaled = std::max(1L, std::lround(static_cast<double>(extent) * p.ratio));
        const long slack = scaled - static_cast<long>(extent);
        return std::uniform_int_distribution<long>(std::min(0L, slack), std::max(0L, slack))(rng);
    };
    p.crop_y = offset(sample.height());
    p.crop_x = offset(sample.width());
    return p;
}

Sample augment(const Sample& sample, Rng& rng, std::span<const double> ratios, double camera_constant) {
    return augment_with(sample, draw_augment(sample, rng, ratios), camera_constant);
}

Batch make_batch(std::span<const Sample* const> samples) {
    if (samples.empty()) throw UsageError("make_batch: empty batch");
    const std::size_t n = samples.size(), H = samples[0]->height(), W = samples[0]->width();
    Batch b;
    auto stack = [&](auto member, std::size_t channels) {
        Tensor4 t(Shape{n, channels, H, W});
        for (std::size_t i = 0; i < n; ++i) {
            const Tensor4& src = samples[i]->*member;
            if (src.shape() != Shape{1, channels, H, W}) throw ConfigError("make_batch: sample shapes differ");
            std::copy(src.data().begin(), src.data().end(), t.ptr(i));
        }
        return t;
    };
    b.image = stack(&Sample::image, 3);
    b.depth = stack(&Sample::depth, 1);
    b.valid_mask = stack(&Sample::valid_mask, 1);
    b.normal = stack(&Sample::normal, 3);
    b.normal_mask = stack(&Sample::normal_mask, 1);
    b.contour = stack(&Sample::contour, 1);
    b.labels = LabelMap(n, H, W);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(samples[i]->labels.data.begin(), samples[i]->labels.data.end(), b.labels.data.begin() + i * H * W);
    }
    const std::size_t qh = H / 4, qw = W / 4;
    b.q_depth = resize_nearest(b.depth, qh, qw);
    b.q_valid_mask = resize_nearest(b.valid_mask, qh, qw);
    b.q_normal = resize_nearest(b.normal, qh, qw);
    b.q_normal_mask = resize_nearest(b.normal_mask, qh, qw);
    b.q_contour = resize_nearest(b.contour, qh, qw);
    b.q_labels = resize_nearest(b.labels, qh, qw);
    return b;
}

}  // namespace padnet
