#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP version that must produce bit-identical output
// (each output element is computed independently, no cross-thread
// reductions). Library code calls the OpenMP versions; the references are
// kept for tests and the benchmark target.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "clutterpush/geometry.hpp"

namespace cpush {

// Raster layout shared by depth images and occupancy grids: cell (r, c) has
// its center at origin + ((c + 0.5) * resolution, (r + 0.5) * resolution).
struct GridGeometry {
    int width{0};
    int height{0};
    double resolution{1.0};
    Vec2 origin{};

    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    [[nodiscard]] std::size_t index(int r, int c) const noexcept {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c);
    }
    [[nodiscard]] bool in_bounds(int r, int c) const noexcept { return r >= 0 && c >= 0 && r < height && c < width; }
    [[nodiscard]] Vec2 cell_center(int r, int c) const noexcept {
        return origin + Vec2{(c + 0.5) * resolution, (r + 0.5) * resolution};
    }
    // Continuous grid coordinates: cell (r, c) spans [c, c+1] x [r, r+1].
    [[nodiscard]] Vec2 to_grid(Vec2 world) const noexcept { return (world - origin) / resolution; }
    [[nodiscard]] Vec2 to_world(Vec2 grid) const noexcept { return origin + grid * resolution; }

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

namespace kernels {

inline constexpr std::int64_t kNoObstacle = std::numeric_limits<std::int64_t>::max();

int max_threads() noexcept;
void set_threads(int n) noexcept;

namespace serial {

// image[i] = max(image[i], height) for every pixel whose center lies in the
// footprint.
void rasterize_max(std::span<double> image, const GridGeometry& geom, const ShapeSpec& shape, const Pose2D& pose,
                   double height);

// Exact squared Euclidean distance (in cells) from each cell center to the
// nearest marked cell center; kNoObstacle when nothing is marked.
std::vector<std::int64_t> squared_edt(std::span<const std::uint8_t> marked, int width, int height);

// Bilinear resampling of `image` on a size x size window centered at
// `center`, rotated by `yaw`, with `spacing` meters between window pixels.
// Samples outside the image read as 0.
void sample_window(std::span<const double> image, const GridGeometry& geom, Vec2 center, double yaw, double spacing,
                   int size, std::span<double> out);

// out[i] = cosine(rows[i], query) over the masked dimensions; zero-norm -> 0.
void cosine_rows(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                 std::span<const std::uint8_t> mask, std::span<double> out);

// CHW convolution, zero padding, bias added, no activation.
void conv2d(std::span<const double> in, int in_c, int in_h, int in_w, std::span<const double> weights,
            std::span<const double> bias, int out_c, int kh, int kw, int sh, int sw, int ph, int pw,
            std::span<double> out, int out_h, int out_w);

} // namespace serial

namespace omp {

void rasterize_max(std::span<double> image, const GridGeometry& geom, const ShapeSpec& shape, const Pose2D& pose,
                   double height);
std::vector<std::int64_t> squared_edt(std::span<const std::uint8_t> marked, int width, int height);
void sample_window(std::span<const double> image, const GridGeometry& geom, Vec2 center, double yaw, double spacing,
                   int size, std::span<double> out);
void cosine_rows(std::span<const double> rows, std::size_t dim, std::span<const double> query,
                 std::span<const std::uint8_t> mask, std::span<double> out);
void conv2d(std::span<const double> in, int in_c, int in_h, int in_w, std::span<const double> weights,
            std::span<const double> bias, int out_c, int kh, int kw, int sh, int sw, int ph, int pw,
            std::span<double> out, int out_h, int out_w);

} // namespace omp

} // namespace kernels
} // namespace cpush
