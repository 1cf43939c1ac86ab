#include "clutterpush/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clutterpush/error.hpp"
#include "clutterpush/rng.hpp"

namespace cpush {

using nlohmann::json;

double body_height(BodyRole role) noexcept {
    switch (role) {
    case BodyRole::pushee: return perception_defaults::kPusheeHeight;
    case BodyRole::obstacle: return perception_defaults::kObstacleHeight;
    case BodyRole::end_effector: return perception_defaults::kEeHeight;
    }
    return 0;
}

GridGeometry image_geometry(const Aabb& bounds, int size) {
    const Vec2 ext = bounds.extent();
    const double res = std::max(ext.x, ext.y) / size;
    GridGeometry g;
    g.resolution = res;
    g.origin = bounds.min;
    g.width = std::max(1, static_cast<int>(std::lround(ext.x / res)));
    g.height = std::max(1, static_cast<int>(std::lround(ext.y / res)));
    return g;
}

std::size_t OccupancyGrid::count_occupied() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

DepthImage render_depth(const WorldState& world, const RenderOptions& options) {
    DepthImage img;
    img.geom = image_geometry(world.bounds);
    img.values.assign(img.geom.size(), 0.0);
    for (const BodyState& b : world.bodies) {
        kernels::omp::rasterize_max(img.values, img.geom, b.shape, b.pose, body_height(b.role));
    }
    if (options.noise_sd > 0) {
        Rng rng(options.noise_seed);
        for (double& v : img.values) {
            if (v == 0) continue;
            // Box-Muller on our own uniform stream keeps noise replayable.
            const double u1 = std::max(rng.uniform(), 1e-300);
            const double u2 = rng.uniform();
            const double n = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            v = std::max(1e-6, v + options.noise_sd * n);
        }
    }
    return img;
}

namespace {

std::vector<double> footprint_mask(const GridGeometry& geom, const BodyState& a, const BodyState& b) {
    std::vector<double> mask(geom.size(), 0.0);
    kernels::omp::rasterize_max(mask, geom, a.shape, a.pose, 1.0);
    kernels::omp::rasterize_max(mask, geom, b.shape, b.pose, 1.0);
    return mask;
}

} // namespace

OccupancyGrid occupancy_from_depth(const DepthImage& depth, const BodyState& pushee, const BodyState& ee) {
    OccupancyGrid grid(depth.geom);
    const auto mask = footprint_mask(depth.geom, pushee, ee);
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        grid.cells[i] = (depth.values[i] > 0 && mask[i] == 0) ? 1 : 0;
    }
    return grid;
}

std::vector<std::int64_t> squared_distance_field(const OccupancyGrid& grid) {
    return kernels::omp::squared_edt(grid.cells, grid.geom.width, grid.geom.height);
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
    if (radius < 0) throw Error(ErrorCode::invalid_argument, "inflation radius must be non-negative");
    if (radius == 0) return grid;
    const double r_cells = radius / grid.geom.resolution;
    const double limit = r_cells * r_cells * (1.0 + 1e-12);
    const auto d2 = squared_distance_field(grid);
    OccupancyGrid out(grid.geom);
    for (std::size_t i = 0; i < d2.size(); ++i) {
        out.cells[i] = (d2[i] != kernels::kNoObstacle && static_cast<double>(d2[i]) <= limit) ? 1 : 0;
    }
    return out;
}

OccupancyGrid planning_grid(const WorldState& world) {
    const DepthImage depth = render_depth(world);
    const BodyState& pushee = world.pushee();
    return inflate(occupancy_from_depth(depth, pushee, world.end_effector()), pushee.shape.circumscribed_radius());
}

LocalWindow egocentric_window(const DepthImage& depth, const BodyState& pushee, const BodyState& ee) {
    std::vector<double> masked = depth.values;
    const auto mask = footprint_mask(depth.geom, pushee, ee);
    for (std::size_t i = 0; i < masked.size(); ++i) {
        if (mask[i] != 0) masked[i] = 0.0;
    }

    LocalWindow win;
    win.center = pushee.pose.position();
    win.orientation = pushee.pose.theta;
    kernels::omp::sample_window(masked, depth.geom, win.center, win.orientation, depth.geom.resolution,
                                LocalWindow::kSize, win.pixels);
    for (double& v : win.pixels) v = std::clamp(v / perception_defaults::kMaxHeight, 0.0, 1.0);
    return win;
}

// ---------------------------------------------------------------------------
// Encoder

namespace {

struct Tensor {
    int c{0}, h{0}, w{0};
    std::vector<double> data;
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(c) * h * w; }
};

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::malformed_encoder, what); }

void apply_activation(std::vector<double>& v, Activation a) {
    if (a == Activation::relu) {
        for (double& x : v) x = std::max(0.0, x);
    }
}

int conv_out(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

// Shape propagation shared by validation and evaluation.
struct ShapeState {
    int c{1}, h{perception_defaults::kWindowSize}, w{perception_defaults::kWindowSize};
    bool flat{false};
    [[nodiscard]] int flat_size() const { return c * h * w; }
};

void propagate(ShapeState& s, const LayerSpec& l, std::size_t idx) {
    const std::string where = "layer " + std::to_string(idx) + ": ";
    switch (l.type) {
    case LayerType::conv2d: {
        if (s.flat) malformed(where + "conv2d after flatten");
        if (l.shape.size() != 4) malformed(where + "conv2d shape must be [out, in, kh, kw]");
        const int oc = l.shape[0], ic = l.shape[1], kh = l.shape[2], kw = l.shape[3];
        if (ic != s.c) malformed(where + "conv2d input channels " + std::to_string(ic) + " != " + std::to_string(s.c));
        if (oc <= 0 || kh <= 0 || kw <= 0 || l.stride[0] <= 0 || l.stride[1] <= 0 || l.padding[0] < 0 || l.padding[1] < 0)
            malformed(where + "conv2d dimensions must be positive");
        if (l.weights.size() != static_cast<std::size_t>(oc) * ic * kh * kw) malformed(where + "conv2d weight count mismatch");
        if (!l.bias.empty() && l.bias.size() != static_cast<std::size_t>(oc)) malformed(where + "conv2d bias count mismatch");
        s.c = oc;
        s.h = conv_out(s.h, kh, l.stride[0], l.padding[0]);
        s.w = conv_out(s.w, kw, l.stride[1], l.padding[1]);
        if (s.h <= 0 || s.w <= 0) malformed(where + "conv2d output is empty");
        break;
    }
    case LayerType::maxpool:
    case LayerType::avgpool:
        if (s.flat) malformed(where + "pooling after flatten");
        if (l.kernel[0] <= 0 || l.kernel[1] <= 0 || l.stride[0] <= 0 || l.stride[1] <= 0)
            malformed(where + "pool dimensions must be positive");
        s.h = conv_out(s.h, l.kernel[0], l.stride[0], 0);
        s.w = conv_out(s.w, l.kernel[1], l.stride[1], 0);
        if (s.h <= 0 || s.w <= 0) malformed(where + "pool output is empty");
        break;
    case LayerType::batchnorm: {
        const std::size_t ch = static_cast<std::size_t>(s.flat ? s.flat_size() : s.c);
        if (l.gamma.size() != ch || l.beta.size() != ch || l.mean.size() != ch || l.var.size() != ch)
            malformed(where + "batchnorm parameter count mismatch");
        break;
    }
    case LayerType::flatten:
        s.flat = true;
        break;
    case LayerType::dense: {
        if (l.shape.size() != 2) malformed(where + "dense shape must be [out, in]");
        const int out = l.shape[0], in = l.shape[1];
        if (in != s.flat_size()) malformed(where + "dense input " + std::to_string(in) + " != " + std::to_string(s.flat_size()));
        if (l.weights.size() != static_cast<std::size_t>(out) * in) malformed(where + "dense weight count mismatch");
        if (!l.bias.empty() && l.bias.size() != static_cast<std::size_t>(out)) malformed(where + "dense bias count mismatch");
        s = ShapeState{out, 1, 1, true};
        break;
    }
    }
}

Tensor pool(const Tensor& in, const LayerSpec& l) {
    Tensor out;
    out.c = in.c;
    out.h = conv_out(in.h, l.kernel[0], l.stride[0], 0);
    out.w = conv_out(in.w, l.kernel[1], l.stride[1], 0);
    out.data.assign(out.size(), 0.0);
    const bool is_max = l.type == LayerType::maxpool;
    for (int c = 0; c < in.c; ++c) {
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
                for (int ky = 0; ky < l.kernel[0]; ++ky) {
                    for (int kx = 0; kx < l.kernel[1]; ++kx) {
                        const double v = in.data[(static_cast<std::size_t>(c) * in.h + oy * l.stride[0] + ky) * in.w +
                                                 ox * l.stride[1] + kx];
                        acc = is_max ? std::max(acc, v) : acc + v;
                    }
                }
                if (!is_max) acc /= static_cast<double>(l.kernel[0] * l.kernel[1]);
                out.data[(static_cast<std::size_t>(c) * out.h + oy) * out.w + ox] = acc;
            }
        }
    }
    return out;
}

Latent builtin_avgpool(const LocalWindow& window) {
    // 4 x 8 tiles of 16 x 8 pixels, row-major tile order.
    constexpr int kTileRows = 4, kTileCols = 8;
    constexpr int th = LocalWindow::kSize / kTileRows, tw = LocalWindow::kSize / kTileCols;
    Latent out{};
    for (int tr = 0; tr < kTileRows; ++tr) {
        for (int tc = 0; tc < kTileCols; ++tc) {
            double sum = 0;
            for (int r = tr * th; r < (tr + 1) * th; ++r)
                for (int c = tc * tw; c < (tc + 1) * tw; ++c) sum += window.at(r, c);
            out[static_cast<std::size_t>(tr * kTileCols + tc)] = sum / (th * tw);
        }
    }
    return out;
}

LayerType parse_layer_type(const std::string& s) {
    if (s == "conv2d") return LayerType::conv2d;
    if (s == "maxpool") return LayerType::maxpool;
    if (s == "avgpool") return LayerType::avgpool;
    if (s == "batchnorm") return LayerType::batchnorm;
    if (s == "flatten") return LayerType::flatten;
    if (s == "dense") return LayerType::dense;
    malformed("unknown layer type '" + s + "'");
}

std::string layer_type_name(LayerType t) {
    switch (t) {
    case LayerType::conv2d: return "conv2d";
    case LayerType::maxpool: return "maxpool";
    case LayerType::avgpool: return "avgpool";
    case LayerType::batchnorm: return "batchnorm";
    case LayerType::flatten: return "flatten";
    case LayerType::dense: return "dense";
    }
    return "";
}

std::array<int, 2> pair_or(const json& j, const char* key, std::array<int, 2> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number_integer()) return {v.get<int>(), v.get<int>()};
    const auto arr = v.get<std::vector<int>>();
    if (arr.size() != 2) malformed(std::string(key) + " must have 2 entries");
    return {arr[0], arr[1]};
}

} // namespace

void validate_encoder(const EncoderSpec& spec) {
    if (spec.kind == EncoderSpec::Kind::builtin_avgpool) return;
    if (spec.layers.empty()) malformed("weight-file encoder has no layers");
    ShapeState s;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) propagate(s, spec.layers[i], i);
    if (s.flat_size() != perception_defaults::kLatentDim)
        malformed("encoder output dimension " + std::to_string(s.flat_size()) + " != 32");
}

Latent encode_window(const LocalWindow& window, const EncoderSpec& encoder) {
    if (encoder.kind == EncoderSpec::Kind::builtin_avgpool) return builtin_avgpool(window);
    validate_encoder(encoder);

    Tensor t{1, LocalWindow::kSize, LocalWindow::kSize, window.pixels};
    for (const LayerSpec& l : encoder.layers) {
        switch (l.type) {
        case LayerType::conv2d: {
            Tensor out;
            out.c = l.shape[0];
            out.h = conv_out(t.h, l.shape[2], l.stride[0], l.padding[0]);
            out.w = conv_out(t.w, l.shape[3], l.stride[1], l.padding[1]);
            out.data.assign(out.size(), 0.0);
            kernels::omp::conv2d(t.data, t.c, t.h, t.w, l.weights, l.bias, out.c, l.shape[2], l.shape[3], l.stride[0],
                                 l.stride[1], l.padding[0], l.padding[1], out.data, out.h, out.w);
            apply_activation(out.data, l.activation);
            t = std::move(out);
            break;
        }
        case LayerType::maxpool:
        case LayerType::avgpool:
            t = pool(t, l);
            break;
        case LayerType::batchnorm: {
            const bool per_element = t.h == 1 && t.w == 1 && l.gamma.size() == t.size();
            const std::size_t plane = per_element ? 1 : static_cast<std::size_t>(t.h) * t.w;
            for (std::size_t i = 0; i < t.data.size(); ++i) {
                const std::size_t ch = i / plane;
                t.data[i] = l.gamma[ch] * (t.data[i] - l.mean[ch]) / std::sqrt(l.var[ch] + l.eps) + l.beta[ch];
            }
            apply_activation(t.data, l.activation);
            break;
        }
        case LayerType::flatten:
            t = Tensor{static_cast<int>(t.size()), 1, 1, std::move(t.data)};
            break;
        case LayerType::dense: {
            const int out_n = l.shape[0], in_n = l.shape[1];
            Tensor out{out_n, 1, 1, std::vector<double>(static_cast<std::size_t>(out_n), 0.0)};
            for (int o = 0; o < out_n; ++o) {
                double acc = l.bias.empty() ? 0.0 : l.bias[static_cast<std::size_t>(o)];
                for (int i = 0; i < in_n; ++i) acc += l.weights[static_cast<std::size_t>(o) * in_n + i] * t.data[static_cast<std::size_t>(i)];
                out.data[static_cast<std::size_t>(o)] = acc;
            }
            apply_activation(out.data, l.activation);
            t = std::move(out);
            break;
        }
        }
    }
    Latent z{};
    std::copy_n(t.data.begin(), z.size(), z.begin());
    return z;
}

EncoderSpec parse_encoder(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        malformed(std::string("encoder file is not valid JSON: ") + e.what());
    }
    EncoderSpec spec;
    try {
        const std::string kind = j.value("kind", std::string("weight_file"));
        if (kind == "builtin_avgpool") return EncoderSpec::builtin();
        if (kind != "weight_file") malformed("unknown encoder kind '" + kind + "'");
        spec.kind = EncoderSpec::Kind::weight_file;
        if (j.contains("input_shape") && j.at("input_shape").get<std::vector<int>>() != std::vector<int>{1, 64, 64})
            malformed("input_shape must be [1, 64, 64]");
        if (j.contains("output_dim") && j.at("output_dim").get<int>() != perception_defaults::kLatentDim)
            malformed("output_dim must be 32");
        for (const auto& jl : j.at("layers")) {
            LayerSpec l;
            l.type = parse_layer_type(jl.at("type").get<std::string>());
            if (jl.contains("shape")) l.shape = jl.at("shape").get<std::vector<int>>();
            if (l.type == LayerType::maxpool || l.type == LayerType::avgpool) {
                l.kernel = pair_or(jl, "kernel", {2, 2});
                l.stride = pair_or(jl, "stride", l.kernel);
            } else {
                l.stride = pair_or(jl, "stride", {1, 1});
                l.padding = pair_or(jl, "padding", {0, 0});
            }
            if (jl.contains("weights")) l.weights = jl.at("weights").get<std::vector<double>>();
            if (jl.contains("bias")) l.bias = jl.at("bias").get<std::vector<double>>();
            if (l.type == LayerType::batchnorm) {
                l.gamma = jl.at("gamma").get<std::vector<double>>();
                l.beta = jl.at("beta").get<std::vector<double>>();
                l.mean = jl.at("mean").get<std::vector<double>>();
                l.var = jl.at("var").get<std::vector<double>>();
                l.eps = jl.value("eps", 1e-3);
            }
            const std::string act = jl.value("activation", std::string("identity"));
            if (act == "relu") l.activation = Activation::relu;
            else if (act == "identity") l.activation = Activation::identity;
            else malformed("unknown activation '" + act + "'");
            spec.layers.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        malformed(std::string("encoder file field error: ") + e.what());
    }
    validate_encoder(spec);
    return spec;
}

EncoderSpec load_encoder(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open encoder file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_encoder(ss.str());
}

std::string encoder_to_json(const EncoderSpec& spec) {
    json j;
    if (spec.kind == EncoderSpec::Kind::builtin_avgpool) {
        j["kind"] = "builtin_avgpool";
        return j.dump(2);
    }
    j["format"] = "clutterpush-encoder";
    j["version"] = 1;
    j["kind"] = "weight_file";
    j["input_shape"] = {1, 64, 64};
    j["output_dim"] = perception_defaults::kLatentDim;
    j["layers"] = json::array();
    for (const LayerSpec& l : spec.layers) {
        json jl;
        jl["type"] = layer_type_name(l.type);
        if (!l.shape.empty()) jl["shape"] = l.shape;
        if (l.type == LayerType::maxpool || l.type == LayerType::avgpool) {
            jl["kernel"] = l.kernel;
            jl["stride"] = l.stride;
        } else if (l.type == LayerType::conv2d) {
            jl["stride"] = l.stride;
            jl["padding"] = l.padding;
        }
        if (!l.weights.empty()) jl["weights"] = l.weights;
        if (!l.bias.empty()) jl["bias"] = l.bias;
        if (l.type == LayerType::batchnorm) {
            jl["gamma"] = l.gamma;
            jl["beta"] = l.beta;
            jl["mean"] = l.mean;
            jl["var"] = l.var;
            jl["eps"] = l.eps;
        }
        jl["activation"] = l.activation == Activation::relu ? "relu" : "identity";
        j["layers"].push_back(std::move(jl));
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// PGM

namespace {

void write_pgm_header(std::ostream& out, const GridGeometry& g) {
    out.precision(17);
    out << "P2\n# origin " << g.origin.x << ' ' << g.origin.y << "\n# resolution " << g.resolution << '\n'
        << g.width << ' ' << g.height << "\n255\n";
}

} // namespace

void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    write_pgm_header(out, grid.geom);
    for (int r = 0; r < grid.geom.height; ++r) {
        for (int c = 0; c < grid.geom.width; ++c) out << (c ? " " : "") << (grid.occupied(r, c) ? 0 : 255);
        out << '\n';
    }
}

void write_pgm(const DepthImage& depth, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    write_pgm_header(out, depth.geom);
    for (int r = 0; r < depth.geom.height; ++r) {
        for (int c = 0; c < depth.geom.width; ++c) {
            const double v = std::clamp(depth.at(r, c) / perception_defaults::kMaxHeight, 0.0, 1.0);
            out << (c ? " " : "") << static_cast<int>(std::lround(v * 255));
        }
        out << '\n';
    }
}

OccupancyGrid read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
    GridGeometry g;
    bool have_res = false;
    std::vector<long> numbers;
    std::string magic;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "origin") ls >> g.origin.x >> g.origin.y;
            else if (key == "resolution") { ls >> g.resolution; have_res = true; }
            continue;
        }
        std::istringstream ls(line);
        if (magic.empty()) {
            ls >> magic;
            if (magic != "P2") throw Error(ErrorCode::io_failure, "only plain PGM (P2) is supported");
        }
        long v;
        while (ls >> v) numbers.push_back(v);
    }
    if (numbers.size() < 3) throw Error(ErrorCode::io_failure, "truncated PGM header");
    g.width = static_cast<int>(numbers[0]);
    g.height = static_cast<int>(numbers[1]);
    const long maxval = numbers[2];
    if (g.width <= 0 || g.height <= 0 || maxval <= 0) throw Error(ErrorCode::io_failure, "invalid PGM dimensions");
    if (numbers.size() != 3 + g.size()) throw Error(ErrorCode::io_failure, "PGM pixel count mismatch");
    if (!have_res) g.resolution = 1.0;
    OccupancyGrid grid(g);
    for (std::size_t i = 0; i < g.size(); ++i) grid.cells[i] = numbers[3 + i] * 2 < maxval ? 1 : 0;
    return grid;
}

} // namespace cpush
