#include "clutterpush/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpush::kernels {

namespace {

// Precomputed world-frame footprint for fast point tests.
struct Footprint {
    bool disk{false};
    Vec2 center;
    double radius2{0};
    std::vector<Vec2> verts;
    Aabb box;

    Footprint(const ShapeSpec& shape, const Pose2D& pose)
        : disk(shape.kind == ShapeKind::disk), center(pose.position()), radius2(shape.radius * shape.radius),
          verts(world_vertices(shape, pose)), box(bounding_box(shape, pose)) {}

    [[nodiscard]] bool contains(Vec2 p) const noexcept {
        if (disk) {
            const Vec2 d = p - center;
            return dot(d, d) <= radius2;
        }
        const std::size_t n = verts.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (cross(verts[(i + 1) % n] - verts[i], p - verts[i]) < 0) return false;
        }
        return true;
    }
};

struct RowRange {
    int r0, r1, c0, c1;
};

RowRange raster_range(const GridGeometry& geom, const Aabb& box) {
    const Vec2 lo = geom.to_grid(box.min);
    const Vec2 hi = geom.to_grid(box.max);
    return {std::max(0, static_cast<int>(std::floor(lo.y)) - 1), std::min(geom.height - 1, static_cast<int>(std::ceil(hi.y)) + 1),
            std::max(0, static_cast<int>(std::floor(lo.x)) - 1), std::min(geom.width - 1, static_cast<int>(std::ceil(hi.x)) + 1)};
}

void raster_row(std::span<double> image, const GridGeometry& geom, const Footprint& fp, const RowRange& rr, int r,
                double height) {
    for (int c = rr.c0; c <= rr.c1; ++c) {
        if (fp.contains(geom.cell_center(r, c))) {
            double& v = image[geom.index(r, c)];
            v = std::max(v, height);
        }
    }
}

std::int64_t edt_inf(int width, int height) {
    return 2 * (static_cast<std::int64_t>(width) * width + static_cast<std::int64_t>(height) * height) + 1;
}

// Felzenszwalb-Huttenlocher lower envelope of parabolas on one line.
// `f` and `d` are strided views.
void edt_1d(const std::int64_t* f, std::ptrdiff_t f_stride, std::int64_t* d, std::ptrdiff_t d_stride, int n,
            std::vector<int>& v, std::vector<double>& z) {
    v.assign(static_cast<std::size_t>(n), 0);
    z.assign(static_cast<std::size_t>(n) + 1, 0.0);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto fv = [&](int q) { return static_cast<double>(f[q * f_stride]); };
    for (int q = 1; q < n; ++q) {
        auto intersect = [&](int p) {
            return ((fv(q) + static_cast<double>(q) * q) - (fv(p) + static_cast<double>(p) * p)) / (2.0 * (q - p));
        };
        double s = intersect(v[static_cast<std::size_t>(k)]);
        // z[0] is -inf, so k never drops below zero.
        while (s <= z[static_cast<std::size_t>(k)]) {
            --k;
            s = intersect(v[static_cast<std::size_t>(k)]);
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
        const int p = v[static_cast<std::size_t>(k)];
        const std::int64_t dq = q - p;
        d[q * d_stride] = dq * dq + f[p * f_stride];
    }
}

void edt_columns(std::span<const std::uint8_t> marked, std::vector<std::int64_t>& tmp, int width, int height, int c,
                 std::vector<int>& v, std::vector<double>& z, std::vector<std::int64_t>& f) {
    const std::int64_t inf = edt_inf(width, height);
    f.resize(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r)
        f[static_cast<std::size_t>(r)] = marked[static_cast<std::size_t>(r) * width + c] ? 0 : inf;
    edt_1d(f.data(), 1, tmp.data() + c, width, height, v, z);
}

void edt_row(const std::vector<std::int64_t>& tmp, std::vector<std::int64_t>& out, int width, int height, int r,
             std::vector<int>& v, std::vector<double>& z) {
    const std::int64_t inf = edt_inf(width, height);
    const std::size_t base = static_cast<std::size_t>(r) * width;
    edt_1d(tmp.data() + base, 1, out.data() + base, 1, width, v, z);
    for (int c = 0; c < width; ++c) {
        auto& d = out[base + static_cast<std::size_t>(c)];
        if (d >= inf) d = kNoObstacle;
    }
}

double bilinear(std::span<const double> image, const GridGeometry& geom, Vec2 world) {
    // Continuous pixel coordinates relative to pixel centers.
    const Vec2 g = geom.to_grid(world) - Vec2{0.5, 0.5};
    const double fx = std::floor(g.x);
    const double fy = std::floor(g.y);
    const double tx = g.x - fx;
    const double ty = g.y - fy;
    const int c0 = static_cast<int>(fx);
    const int r0 = static_cast<int>(fy);
    auto at = [&](int r, int c) { return geom.in_bounds(r, c) ? image[geom.index(r, c)] : 0.0; };
    return (1 - ty) * ((1 - tx) * at(r0, c0) + tx * at(r0, c0 + 1)) + ty * ((1 - tx) * at(r0 + 1, c0) + tx * at(r0 + 1, c0 + 1));
}

void window_row(std::span<const double> image, const GridGeometry& geom, Vec2 center, double yaw, double spacing,
                int size, int r, std::span<double> out) {
    const double half = size / 2.0;
    const double cs = std::cos(yaw);
    const double sn = std::sin(yaw);
    const double v = (r + 0.5 - half) * spacing;
    for (int c = 0; c < size; ++c) {
        const double u = (c + 0.5 - half) * spacing;
        const Vec2 w{center.x + cs * u - sn * v, center.y + sn * u + cs * v};
        out[static_cast<std::size_t>(r) * size + c] = bilinear(image, geom, w);
    }
}

double cosine_row(const double* row, std::span<const double> query, std::span<const std::uint8_t> mask) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t j = 0; j < query.size(); ++j) {
        if (!mask.empty() && !mask[j]) continue;
        ab += row[j] * query[j];
        aa += row[j] * row[j];
        bb += query[j] * query[j];
    }
    if (aa == 0 || bb == 0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

void conv_channel(std::span<const double> in, int in_c, int in_h, int in_w, std::span<const double> weights,
                  std::span<const double> bias, int kh, int kw, int sh, int sw, int ph, int pw, std::span<double> out,
                  int out_h, int out_w, int oc) {
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(oc)];
            for (int ic = 0; ic < in_c; ++ic) {
                for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy * sh - ph + ky;
                    if (iy < 0 || iy >= in_h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        const int ix = ox * sw - pw + kx;
                        if (ix < 0 || ix >= in_w) continue;
                        const std::size_t wi = ((static_cast<std::size_t>(oc) * in_c + ic) * kh + ky) * kw + kx;
                        const std::size_t ii = (static_cast<std::size_t>(ic) * in_h + iy) * in_w + ix;
                        acc += weights[wi] * in[ii];
                    }
                }
            }
            out[(static_cast<std::size_t>(oc) * out_h + oy) * out_w + ox] = acc;
        }
    }
}

} // namespace

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) noexcept {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

namespace serial {

void rasterize_max(std::span<double> image, const GridGeometry& geom, const ShapeSpec& shape, const Pose2D& pose,
                   double height) {
    const Footprint fp(shape, pose);
    const RowRange rr = raster_range(geom, fp.box);
    for (int r = rr.r0; r <= rr.r1; ++r) raster_row(image, geom, fp, rr, r, height);
}

std::vector<std::int64_t> squared_edt(std::span<const std::uint8_t> marked, int width, int height) {
    std::vector<std::int64_t> tmp(static_cast<std::size_t>(width) * height);
    std::vector<std::int64_t> out(tmp.size());
    std::vector<int> v;
    std::vector<double> z;
    std::vector<std::int64_t> f;
    for (int c = 0; c < width; ++c) edt_columns(marked, tmp, width, height, c, v, z, f);
    for (int r = 0; r < height; ++r) edt_row(tmp, out, width, height, r, v, z);
    return out;
}

void sample_window(std::span<const double> image, const GridGeometry& geom, Vec2 center, double yaw, double spacing,
                   int size, std::span<double> out) {
    for (int r = 0; r < size; ++r) window_row(image, geom, center, yaw, spacing, size, r, out);
}

void cosine_rows(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                 std::span<const std::uint8_t> mask, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cosine_row(rows.data() + i * dim, query, mask);
}

void conv2d(std::span<const double> in, int in_c, int in_h, int in_w, std::span<const double> weights,
            std::span<const double> bias, int out_c, int kh, int kw, int sh, int sw, int ph, int pw,
            std::span<double> out, int out_h, int out_w) {
    for (int oc = 0; oc < out_c; ++oc)
        conv_channel(in, in_c, in_h, in_w, weights, bias, kh, kw, sh, sw, ph, pw, out, out_h, out_w, oc);
}

} // namespace serial

namespace omp {

void rasterize_max(std::span<double> image, const GridGeometry& geom, const ShapeSpec& shape, const Pose2D& pose,
                   double height) {
    const Footprint fp(shape, pose);
    const RowRange rr = raster_range(geom, fp.box);
#pragma omp parallel for schedule(static)
    for (int r = rr.r0; r <= rr.r1; ++r) raster_row(image, geom, fp, rr, r, height);
}

std::vector<std::int64_t> squared_edt(std::span<const std::uint8_t> marked, int width, int height) {
    std::vector<std::int64_t> tmp(static_cast<std::size_t>(width) * height);
    std::vector<std::int64_t> out(tmp.size());
#pragma omp parallel
    {
        std::vector<int> v;
        std::vector<double> z;
        std::vector<std::int64_t> f;
#pragma omp for schedule(static)
        for (int c = 0; c < width; ++c) edt_columns(marked, tmp, width, height, c, v, z, f);
#pragma omp for schedule(static)
        for (int r = 0; r < height; ++r) edt_row(tmp, out, width, height, r, v, z);
    }
    return out;
}

void sample_window(std::span<const double> image, const GridGeometry& geom, Vec2 center, double yaw, double spacing,
                   int size, std::span<double> out) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < size; ++r) window_row(image, geom, center, yaw, spacing, size, r, out);
}

void cosine_rows(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                 std::span<const std::uint8_t> mask, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = cosine_row(rows.data() + static_cast<std::size_t>(i) * dim, query, mask);
}

void conv2d(std::span<const double> in, int in_c, int in_h, int in_w, std::span<const double> weights,
            std::span<const double> bias, int out_c, int kh, int kw, int sh, int sw, int ph, int pw,
            std::span<double> out, int out_h, int out_w) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < out_c; ++oc)
        conv_channel(in, in_c, in_h, in_w, weights, bias, kh, kw, sh, sw, ph, pw, out, out_h, out_w, oc);
}

} // namespace omp

} // namespace cpush::kernels
