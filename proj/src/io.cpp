#include "clutterpush/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "clutterpush/error.hpp"

namespace cpush {

using nlohmann::json;

namespace {

constexpr const char* kScenarioFormat = "clutterpush-scenario";
constexpr int kScenarioVersion = 1;

ShapeKind parse_kind(const std::string& s) {
    if (s == "disk") return ShapeKind::disk;
    if (s == "box") return ShapeKind::box;
    if (s == "polygon") return ShapeKind::polygon;
    throw Error(ErrorCode::invalid_scenario, "unknown shape kind '" + s + "'");
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json to_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::invalid_argument, "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const Pose2D& pose) { return json::array({pose.x, pose.y, pose.theta}); }

Pose2D pose_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::invalid_argument, "expected [x, y, theta]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const ShapeSpec& shape) {
    json j;
    switch (shape.kind) {
    case ShapeKind::disk:
        j["kind"] = "disk";
        j["radius"] = shape.radius;
        break;
    case ShapeKind::box:
        j["kind"] = "box";
        j["half_extents"] = to_json(shape.half_extents);
        break;
    case ShapeKind::polygon: {
        j["kind"] = "polygon";
        json verts = json::array();
        for (const Vec2& v : shape.vertices) verts.push_back(to_json(v));
        j["vertices"] = std::move(verts);
        break;
    }
    }
    return j;
}

ShapeSpec shape_from_json(const json& j) {
    try {
        switch (parse_kind(j.at("kind").get<std::string>())) {
        case ShapeKind::disk: return ShapeSpec::disk(j.at("radius").get<double>());
        case ShapeKind::box: {
            const Vec2 h = vec2_from_json(j.at("half_extents"));
            return ShapeSpec::box(h.x, h.y);
        }
        case ShapeKind::polygon: {
            std::vector<Vec2> verts;
            for (const json& v : j.at("vertices")) verts.push_back(vec2_from_json(v));
            return ShapeSpec::polygon(std::move(verts));
        }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_scenario, std::string("shape: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_scenario, std::string("shape: ") + e.what());
    }
    throw Error(ErrorCode::invalid_scenario, "shape: unreachable");
}

json to_json(const ScenarioSpec& spec) {
    json j;
    j["format"] = kScenarioFormat;
    j["version"] = kScenarioVersion;
    j["suite_id"] = std::string(to_string(spec.suite_id));
    json p;
    p["yaw"] = optional_json(spec.obstacle_params.yaw);
    p["scale"] = optional_json(spec.obstacle_params.scale);
    p["gap"] = optional_json(spec.obstacle_params.gap);
    p["count"] = optional_json(spec.obstacle_params.count);
    json obs = json::array();
    for (const ObstacleDef& d : spec.obstacle_params.obstacles)
        obs.push_back({{"shape", to_json(d.shape)}, {"pose", to_json(d.pose)}});
    p["obstacles"] = std::move(obs);
    j["obstacle_params"] = std::move(p);
    j["pushee_shape"] = to_json(spec.pushee_shape);
    j["rng_seed"] = spec.rng_seed;
    j["workspace"] = {{"min", to_json(spec.workspace.min)}, {"max", to_json(spec.workspace.max)}};
    return j;
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec spec;
    try {
        if (j.value("format", std::string(kScenarioFormat)) != kScenarioFormat)
            throw Error(ErrorCode::invalid_scenario, "not a scenario document");
        if (j.value("version", kScenarioVersion) != kScenarioVersion)
            throw Error(ErrorCode::invalid_scenario, "unsupported scenario version");
        spec.suite_id = parse_suite(j.at("suite_id").get<std::string>());
        if (j.contains("obstacle_params")) {
            const json& p = j.at("obstacle_params");
            spec.obstacle_params.yaw = optional_from<double>(p, "yaw");
            spec.obstacle_params.scale = optional_from<double>(p, "scale");
            spec.obstacle_params.gap = optional_from<double>(p, "gap");
            spec.obstacle_params.count = optional_from<int>(p, "count");
            if (p.contains("obstacles")) {
                for (const json& o : p.at("obstacles"))
                    spec.obstacle_params.obstacles.push_back({shape_from_json(o.at("shape")), pose_from_json(o.at("pose"))});
            }
        }
        spec.pushee_shape = shape_from_json(j.at("pushee_shape"));
        spec.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        if (j.contains("workspace"))
            spec.workspace = {vec2_from_json(j.at("workspace").at("min")), vec2_from_json(j.at("workspace").at("max"))};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_scenario, std::string("scenario: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::unknown_suite) throw;
        throw Error(ErrorCode::invalid_scenario, e.what());
    }
    validate_spec(spec);
    return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_failure, path.string() + ": " + e.what());
    }
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
    write_text_file(path, to_json(spec).dump(2) + "\n");
}

ScenarioSpec load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_json_file(path)); }

} // namespace cpush
