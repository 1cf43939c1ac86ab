#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "clutterpush/world.hpp"

namespace cpush {

// JSON documents mirror the structs field for field. Doubles are written in
// shortest round-trip form, so a load after a save is lossless.
nlohmann::json to_json(const ShapeSpec& shape);
ShapeSpec shape_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pose2D& pose);
Pose2D pose_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Vec2& v);
Vec2 vec2_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSpec& spec);
// Throws Error(invalid_scenario) on schema violations.
ScenarioSpec scenario_from_json(const nlohmann::json& j);

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);
ScenarioSpec load_scenario(const std::filesystem::path& path);

// Whole-file helpers; throw Error(io_failure).
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace cpush
