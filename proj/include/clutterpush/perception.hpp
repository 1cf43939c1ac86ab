#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clutterpush/kernels.hpp"
#include "clutterpush/world.hpp"

namespace cpush {

namespace perception_defaults {
inline constexpr int kImageSize = 256;
inline constexpr int kWindowSize = 64;
inline constexpr int kLatentDim = 32;
// Declared per-role heights above the table (m) and the normalization
// ceiling for window values.
inline constexpr double kObstacleHeight = 0.08;
inline constexpr double kPusheeHeight = 0.05;
inline constexpr double kEeHeight = 0.10;
inline constexpr double kMaxHeight = 0.10;
} // namespace perception_defaults

double body_height(BodyRole role) noexcept;

// Square-pixel raster covering the workspace; the longer side gets `size`
// pixels.
GridGeometry image_geometry(const Aabb& bounds, int size = perception_defaults::kImageSize);

struct DepthImage {
    GridGeometry geom;
    std::vector<double> values;  // height above table, row-major, row 0 at min y

    [[nodiscard]] double at(int r, int c) const { return values[geom.index(r, c)]; }
};

struct OccupancyGrid {
    GridGeometry geom;
    std::vector<std::uint8_t> cells;  // 1 = occupied

    OccupancyGrid() = default;
    explicit OccupancyGrid(GridGeometry g) : geom(g), cells(g.size(), 0) {}

    [[nodiscard]] bool occupied(int r, int c) const { return cells[geom.index(r, c)] != 0; }
    // Cells outside the grid count as occupied.
    [[nodiscard]] bool blocked(int r, int c) const { return !geom.in_bounds(r, c) || occupied(r, c); }
    void set(int r, int c, bool occ) { cells[geom.index(r, c)] = occ ? 1 : 0; }
    [[nodiscard]] std::size_t count_occupied() const;

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

struct LocalWindow {
    static constexpr int kSize = perception_defaults::kWindowSize;
    std::vector<double> pixels = std::vector<double>(static_cast<std::size_t>(kSize) * kSize, 0.0);
    Vec2 center;
    double orientation{0};

    [[nodiscard]] double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * kSize + c]; }
};

struct RenderOptions {
    double noise_sd{0};  // additive Gaussian noise on non-background pixels
    std::uint64_t noise_seed{0};
};

DepthImage render_depth(const WorldState& world, const RenderOptions& options = {});

// Occupied iff depth > 0 and the cell center is outside the pushee and EE.
OccupancyGrid occupancy_from_depth(const DepthImage& depth, const BodyState& pushee, const BodyState& ee);

// Exact squared distance (cells^2) from each cell to the nearest occupied
// cell; kernels::kNoObstacle when the grid is empty.
std::vector<std::int64_t> squared_distance_field(const OccupancyGrid& grid);

// Occupied iff within `radius` meters (cell-center to cell-center) of an
// originally occupied cell.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

// Obstacle grid inflated by half the pushee's circumscribed diameter.
OccupancyGrid planning_grid(const WorldState& world);

// 64x64 crop of `depth` centered on the pushee and aligned with its heading,
// pushee and EE pixels masked, normalized by kMaxHeight into [0, 1].
LocalWindow egocentric_window(const DepthImage& depth, const BodyState& pushee, const BodyState& ee);

// Encoder layers mirror the weight-file schema.
enum class LayerType { conv2d, maxpool, avgpool, batchnorm, flatten, dense };
enum class Activation { identity, relu };

struct LayerSpec {
    LayerType type{LayerType::flatten};
    std::vector<int> shape;      // conv2d: [out, in, kh, kw]; dense: [out, in]; batchnorm: [channels]
    std::array<int, 2> kernel{1, 1};  // pools
    std::array<int, 2> stride{1, 1};
    std::array<int, 2> padding{0, 0};
    std::vector<double> weights;
    std::vector<double> bias;
    // batchnorm (inference form)
    std::vector<double> gamma, beta, mean, var;
    double eps{1e-3};
    Activation activation{Activation::identity};
};

struct EncoderSpec {
    enum class Kind { builtin_avgpool, weight_file };
    Kind kind{Kind::builtin_avgpool};
    std::vector<LayerSpec> layers;

    static EncoderSpec builtin() { return {}; }
};

using Latent = std::array<double, perception_defaults::kLatentDim>;

// Throws Error(malformed_encoder) when shapes do not chain from
// [1, 64, 64] to 32 outputs.
void validate_encoder(const EncoderSpec& spec);
Latent encode_window(const LocalWindow& window, const EncoderSpec& encoder);

EncoderSpec load_encoder(const std::filesystem::path& path);
EncoderSpec parse_encoder(const std::string& json_text);
std::string encoder_to_json(const EncoderSpec& spec);

// Plain-text PGM (P2). Occupied cells are written as 0, free as 255; the
// geometry travels in "# origin x y" / "# resolution r" comment lines.
void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid read_pgm(const std::filesystem::path& path);
void write_pgm(const DepthImage& depth, const std::filesystem::path& path);

} // namespace cpush
