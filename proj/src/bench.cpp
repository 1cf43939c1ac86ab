#include "clutterpush/bench.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "clutterpush/error.hpp"
#include "clutterpush/io.hpp"

namespace cpush {

using nlohmann::json;

namespace {

double polyline_length(const std::vector<Vec2>& pts) { return path_length(pts); }

json points_json(const std::vector<Vec2>& pts) {
    json a = json::array();
    for (const Vec2& p : pts) a.push_back(to_json(p));
    return a;
}

std::vector<Vec2> points_from(const json& j) {
    std::vector<Vec2> out;
    for (const json& p : j) out.push_back(vec2_from_json(p));
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

// EpisodeRecord ------------------------------------------------------------

std::string EpisodeRecord::key() const {
    return suite + "/" + pushee + "/" + std::to_string(scenario_seed) + "/" + std::to_string(episode_seed);
}

double EpisodeRecord::contact_rate() const {
    return steps_after_first_touch > 0 ? static_cast<double>(contact_steps_after_first_touch) / steps_after_first_touch
                                       : 0.0;
}

double EpisodeRecord::collision_rate() const {
    return steps > 0 ? static_cast<double>(collision_steps) / steps : 0.0;
}

// Metrics ------------------------------------------------------------------

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    const auto n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (n - 1));
    }
    return s;
}

double compute_spl(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::empty_input, "SPL of an empty record set");
    double sum = 0;
    for (const EpisodeRecord& r : records) {
        const double l = r.initial_shortest_path;
        if (!(l > 0)) throw Error(ErrorCode::invalid_argument, "initial shortest path must be positive");
        if (r.success) sum += l / std::max(r.object_path_length, l);
    }
    return sum / static_cast<double>(records.size());
}

MetricsTable aggregate_metrics(const std::vector<EpisodeRecord>& records, const AggregateOptions& options) {
    if (records.empty()) throw Error(ErrorCode::empty_input, "no episodes to aggregate");
    MetricsTable t;
    t.n_episodes = static_cast<int>(records.size());
    std::vector<double> contact, collision, path;
    int successes = 0;
    for (const EpisodeRecord& r : records) {
        successes += r.success ? 1 : 0;
        collision.push_back(r.collision_rate());
        if (options.subset_keys && options.subset_keys->count(r.key()) == 0) continue;
        contact.push_back(r.contact_rate());
        path.push_back(r.object_path_length);
    }
    t.success_rate = static_cast<double>(successes) / t.n_episodes;
    t.contact_rate = summarize(contact);
    t.collision_rate = summarize(collision);
    t.path_length = summarize(path);
    t.spl = compute_spl(records);
    t.n_subset = static_cast<int>(contact.size());
    return t;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
    if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "paired samples differ in length");
    if (a.size() < 2) throw Error(ErrorCode::length_mismatch, "paired t-test needs at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const Summary s = summarize(d);
    TTestResult r;
    r.df = static_cast<int>(d.size()) - 1;
    r.mean_diff = s.mean;
    const bool constant = std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); });
    if (constant || s.sd == 0) {
        r.degenerate_variance = true;
        if (s.mean == 0) {
            r.t = 0;
            r.p_value = 1;
        } else {
            r.t = std::copysign(std::numeric_limits<double>::infinity(), s.mean);
            r.p_value = 0;
            r.significant = true;
        }
        return r;
    }
    r.t = s.mean / (s.sd / std::sqrt(static_cast<double>(d.size())));
    const boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    r.significant = r.p_value < alpha;
    return r;
}

// Policies -----------------------------------------------------------------

ActionDelta BaselinePolicy::act(const PushEnv& env, const Observation&) {
    last_ = ctl_.act(env);
    if (last_.relocating) {
        const Vec2 to_pushee = env.world().pushee().pose.position() - env.world().end_effector().pose.position();
        if (dot(Vec2{last_.action.dx, last_.action.dy}, to_pushee) > 0) ++violations_;
    }
    return last_.action;
}

ActionDelta ScriptedPolicy::act(const PushEnv&, const Observation&) {
    if (next_ < actions_.size()) return actions_[next_++];
    return {};
}

void RandomPolicy::begin(const PushEnv& env) { rng_.emplace(mix_seed(seed_, env.config().seed)); }

ActionDelta RandomPolicy::act(const PushEnv& env, const Observation&) {
    if (!rng_) rng_.emplace(seed_);
    const ActionCaps& caps = env.config().dynamics.caps;
    const double dx = rng_->uniform(-caps.dxy_max, caps.dxy_max);
    const double dy = rng_->uniform(-caps.dxy_max, caps.dxy_max);
    const double dth = rng_->uniform(-caps.dtheta_max, caps.dtheta_max);
    return {dx, dy, dth};
}

PolicyKind parse_policy(std::string_view name) {
    if (name == "baseline") return PolicyKind::baseline;
    if (name == "scripted") return PolicyKind::scripted;
    if (name == "random") return PolicyKind::random;
    if (name == "agent") return PolicyKind::agent;
    throw Error(ErrorCode::invalid_argument, "unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(PolicyKind kind) noexcept {
    switch (kind) {
    case PolicyKind::baseline: return "baseline";
    case PolicyKind::scripted: return "scripted";
    case PolicyKind::random: return "random";
    case PolicyKind::agent: return "agent";
    }
    return "unknown";
}

// Episodes -----------------------------------------------------------------

EpisodeRecord run_episode(Policy& policy, const EpisodeConfig& config, const EncoderSpec& encoder) {
    PushEnv env(encoder);
    Observation obs = env.reset(config);
    policy.begin(env);

    EpisodeRecord rec;
    rec.config = config;
    rec.suite = std::string(to_string(config.scenario.suite_id));
    rec.pushee = pushee_name(config.scenario.pushee_shape);
    rec.scenario_seed = config.scenario.rng_seed;
    rec.episode_seed = config.seed;
    rec.goal = env.world().goal;
    rec.initial_shortest_path = env.initial_path().length;
    rec.initial_path = env.initial_path().waypoints;
    rec.ee_trace.push_back(env.world().end_effector().pose.position());
    rec.object_trace.push_back(env.world().pushee().pose.position());

    bool touched = false;
    StepResult res;
    do {
        const ActionDelta a = policy.act(env, obs);
        res = env.step(a);
        obs = res.obs;
        rec.actions.push_back(a);
        rec.ee_trace.push_back(env.world().end_effector().pose.position());
        rec.object_trace.push_back(env.world().pushee().pose.position());
        touched = touched || res.info.contact;
        if (touched) {
            ++rec.steps_after_first_touch;
            rec.contact_steps_after_first_touch += res.info.contact ? 1 : 0;
        }
        rec.collision_steps += res.info.collision ? 1 : 0;
        rec.out_of_bounds_steps += res.info.out_of_bounds ? 1 : 0;
        rec.total_reward += res.reward.r_total;
    } while (!res.done);

    rec.steps = static_cast<int>(env.steps());
    rec.success = res.info.goal_reached;
    rec.final_goal_distance = res.info.goal_distance;
    rec.object_path_length = polyline_length(rec.object_trace);
    rec.ee_path_length = polyline_length(rec.ee_trace);
    return rec;
}

std::vector<EpisodeConfig> suite_episodes(const SuiteRunConfig& config) {
    if (config.episodes < 0) throw Error(ErrorCode::invalid_argument, "episode count must be >= 0");
    std::vector<ScenarioSpec> specs;
    if (config.scenario) {
        specs.push_back(*config.scenario);
    } else {
        for (ScenarioSpec& s : scenario_suite(config.suite)) {
            if (!config.pushee || pushee_name(s.pushee_shape) == *config.pushee) specs.push_back(std::move(s));
        }
        if (specs.empty()) throw Error(ErrorCode::invalid_argument, "unknown pushee '" + config.pushee.value_or("") + "'");
    }
    std::vector<EpisodeConfig> out;
    for (int i = 0; i < config.episodes; ++i) {
        EpisodeConfig c;
        c.scenario = specs[static_cast<std::size_t>(i) % specs.size()];
        if (!config.scenario) c.scenario.rng_seed = mix_seed(config.seed, 2 * static_cast<std::uint64_t>(i));
        c.seed = mix_seed(config.seed, 2 * static_cast<std::uint64_t>(i) + 1);
        c.d_min = config.d_min;
        c.d_max = config.d_max;
        c.max_steps = config.max_steps;
        c.goal_tolerance = config.goal_tolerance;
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<EpisodeRecord> run_suite(const SuiteRunConfig& config) {
    const std::vector<EpisodeConfig> episodes = suite_episodes(config);
    const auto n = static_cast<std::ptrdiff_t>(episodes.size());
    std::vector<EpisodeRecord> out(episodes.size());
    std::vector<std::exception_ptr> errors(episodes.size());
    const int threads = config.policy == PolicyKind::agent ? 1 : kernels::max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            std::unique_ptr<Policy> policy;
            switch (config.policy) {
            case PolicyKind::baseline: policy = std::make_unique<BaselinePolicy>(config.baseline_params); break;
            case PolicyKind::scripted: policy = std::make_unique<ScriptedPolicy>(config.scripted_actions); break;
            case PolicyKind::random: policy = std::make_unique<RandomPolicy>(config.seed); break;
            case PolicyKind::agent:
                policy = std::make_unique<ProtocolAgentPolicy>(config.agent_host, config.agent_port, config.agent_timeout);
                break;
            }
            out[k] = run_episode(*policy, episodes[k], config.encoder);
            out[k].episode_index = static_cast<int>(i);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

// Serialization --------------------------------------------------------------

json to_json(const EpisodeConfig& c) {
    json j;
    j["scenario"] = to_json(c.scenario);
    j["max_steps"] = c.max_steps;
    j["goal_tolerance"] = c.goal_tolerance;
    j["yaw_tolerance"] = c.yaw_tolerance ? json(*c.yaw_tolerance) : json(nullptr);
    j["curriculum_stage"] = c.curriculum_stage;
    j["d_min"] = c.d_min;
    j["d_max"] = c.d_max;
    j["seed"] = c.seed;
    j["subgoal_lag"] = c.subgoal_lag;
    j["snap_radius_cells"] = c.snap_radius_cells;
    j["arm_joints"] = c.arm_joints;
    j["dynamics"] = {{"c", c.dynamics.c},
                     {"ee_radius", c.dynamics.ee_radius},
                     {"max_substep", c.dynamics.max_substep},
                     {"dxy_max", c.dynamics.caps.dxy_max},
                     {"dtheta_max", c.dynamics.caps.dtheta_max}};
    return j;
}

EpisodeConfig episode_config_from_json(const json& j) {
    EpisodeConfig c;
    try {
        if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
        c.max_steps = j.value("max_steps", c.max_steps);
        c.goal_tolerance = j.value("goal_tolerance", c.goal_tolerance);
        if (j.contains("yaw_tolerance") && !j.at("yaw_tolerance").is_null())
            c.yaw_tolerance = j.at("yaw_tolerance").get<double>();
        c.curriculum_stage = j.value("curriculum_stage", c.curriculum_stage);
        c.d_min = j.value("d_min", c.d_min);
        c.d_max = j.value("d_max", c.d_max);
        c.seed = j.value("seed", c.seed);
        c.subgoal_lag = j.value("subgoal_lag", c.subgoal_lag);
        c.snap_radius_cells = j.value("snap_radius_cells", c.snap_radius_cells);
        c.arm_joints = j.value("arm_joints", c.arm_joints);
        if (j.contains("dynamics")) {
            const json& d = j.at("dynamics");
            c.dynamics.c = d.value("c", c.dynamics.c);
            c.dynamics.ee_radius = d.value("ee_radius", c.dynamics.ee_radius);
            c.dynamics.max_substep = d.value("max_substep", c.dynamics.max_substep);
            c.dynamics.caps.dxy_max = d.value("dxy_max", c.dynamics.caps.dxy_max);
            c.dynamics.caps.dtheta_max = d.value("dtheta_max", c.dynamics.caps.dtheta_max);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("episode config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const ControllerParams& p) {
    return {{"psi_relocate_threshold", p.psi_relocate_threshold},
            {"relocate_radius", p.relocate_radius},
            {"approach_distance", p.approach_distance},
            {"gain_push", p.gain_push},
            {"gain_relocate", p.gain_relocate},
            {"costmap_inflation", p.costmap_inflation},
            {"costmap_falloff", p.costmap_falloff},
            {"costmap_weight", p.costmap_weight},
            {"push_speed", p.push_speed},
            {"replan_deviation", p.replan_deviation}};
}

ControllerParams controller_params_from_json(const json& j, const ControllerParams& base) {
    ControllerParams p = base;
    try {
        p.psi_relocate_threshold = j.value("psi_relocate_threshold", p.psi_relocate_threshold);
        p.relocate_radius = j.value("relocate_radius", p.relocate_radius);
        p.approach_distance = j.value("approach_distance", p.approach_distance);
        p.gain_push = j.value("gain_push", p.gain_push);
        p.gain_relocate = j.value("gain_relocate", p.gain_relocate);
        p.costmap_inflation = j.value("costmap_inflation", p.costmap_inflation);
        p.costmap_falloff = j.value("costmap_falloff", p.costmap_falloff);
        p.costmap_weight = j.value("costmap_weight", p.costmap_weight);
        p.push_speed = j.value("push_speed", p.push_speed);
        p.replan_deviation = j.value("replan_deviation", p.replan_deviation);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("controller params: ") + e.what());
    }
    p.validate();
    return p;
}

std::string episodes_csv(const std::vector<EpisodeRecord>& records) {
    std::string out =
        "episode,suite,pushee,scenario_seed,episode_seed,success,steps,contact_steps_after_first_touch,"
        "steps_after_first_touch,contact_rate,collision_steps,collision_rate,out_of_bounds_steps,"
        "initial_shortest_path,object_path_length,ee_path_length,final_goal_distance,total_reward\n";
    for (const EpisodeRecord& r : records) {
        const std::vector<std::string> cells{std::to_string(r.episode_index),
                                             r.suite,
                                             r.pushee,
                                             std::to_string(r.scenario_seed),
                                             std::to_string(r.episode_seed),
                                             r.success ? "1" : "0",
                                             std::to_string(r.steps),
                                             std::to_string(r.contact_steps_after_first_touch),
                                             std::to_string(r.steps_after_first_touch),
                                             format_double(r.contact_rate()),
                                             std::to_string(r.collision_steps),
                                             format_double(r.collision_rate()),
                                             std::to_string(r.out_of_bounds_steps),
                                             format_double(r.initial_shortest_path),
                                             format_double(r.object_path_length),
                                             format_double(r.ee_path_length),
                                             format_double(r.final_goal_distance),
                                             format_double(r.total_reward)};
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
        out += "\n";
    }
    return out;
}

std::string metrics_csv(const MetricsTable& t) {
    std::string out =
        "n_episodes,success_rate,contact_rate_mean,contact_rate_sd,collision_rate_mean,collision_rate_sd,spl,"
        "path_length_mean,path_length_sd,n_subset\n";
    const std::vector<std::string> cells{std::to_string(t.n_episodes),         format_double(t.success_rate),
                                         format_double(t.contact_rate.mean),   format_double(t.contact_rate.sd),
                                         format_double(t.collision_rate.mean), format_double(t.collision_rate.sd),
                                         format_double(t.spl),                 format_double(t.path_length.mean),
                                         format_double(t.path_length.sd),      std::to_string(t.n_subset)};
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    return out + "\n";
}

json traces_json(const std::vector<EpisodeRecord>& records) {
    json eps = json::array();
    for (const EpisodeRecord& r : records) {
        json actions = json::array();
        for (const ActionDelta& a : r.actions) actions.push_back(json::array({a.dx, a.dy, a.dtheta}));
        eps.push_back({{"episode", r.episode_index},
                       {"suite", r.suite},
                       {"pushee", r.pushee},
                       {"scenario_seed", r.scenario_seed},
                       {"episode_seed", r.episode_seed},
                       {"config", to_json(r.config)},
                       {"success", r.success},
                       {"steps", r.steps},
                       {"start", r.object_trace.empty() ? json(nullptr) : to_json(r.object_trace.front())},
                       {"goal", to_json(r.goal)},
                       {"initial_shortest_path", r.initial_shortest_path},
                       {"initial_path", points_json(r.initial_path)},
                       {"actions", std::move(actions)},
                       {"ee_trace", points_json(r.ee_trace)},
                       {"object_trace", points_json(r.object_trace)},
                       {"contact_steps_after_first_touch", r.contact_steps_after_first_touch},
                       {"steps_after_first_touch", r.steps_after_first_touch},
                       {"collision_steps", r.collision_steps},
                       {"out_of_bounds_steps", r.out_of_bounds_steps},
                       {"object_path_length", r.object_path_length},
                       {"ee_path_length", r.ee_path_length},
                       {"final_goal_distance", r.final_goal_distance},
                       {"total_reward", r.total_reward}});
    }
    return {{"format", "clutterpush-traces"}, {"version", 1}, {"episodes", std::move(eps)}};
}

std::vector<EpisodeRecord> records_from_traces(const json& traces) {
    std::vector<EpisodeRecord> out;
    try {
        if (traces.value("format", std::string()) != "clutterpush-traces")
            throw Error(ErrorCode::invalid_argument, "not a traces document");
        for (const json& e : traces.at("episodes")) {
            EpisodeRecord r;
            r.episode_index = e.at("episode").get<int>();
            r.suite = e.at("suite").get<std::string>();
            r.pushee = e.at("pushee").get<std::string>();
            r.scenario_seed = e.at("scenario_seed").get<std::uint64_t>();
            r.episode_seed = e.at("episode_seed").get<std::uint64_t>();
            r.config = episode_config_from_json(e.at("config"));
            r.success = e.at("success").get<bool>();
            r.steps = e.at("steps").get<int>();
            r.goal = pose_from_json(e.at("goal"));
            r.initial_shortest_path = e.at("initial_shortest_path").get<double>();
            r.initial_path = points_from(e.at("initial_path"));
            for (const json& a : e.at("actions")) r.actions.push_back({a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()});
            r.ee_trace = points_from(e.at("ee_trace"));
            r.object_trace = points_from(e.at("object_trace"));
            r.contact_steps_after_first_touch = e.at("contact_steps_after_first_touch").get<int>();
            r.steps_after_first_touch = e.at("steps_after_first_touch").get<int>();
            r.collision_steps = e.at("collision_steps").get<int>();
            r.out_of_bounds_steps = e.at("out_of_bounds_steps").get<int>();
            r.object_path_length = e.at("object_path_length").get<double>();
            r.ee_path_length = e.at("ee_path_length").get<double>();
            r.final_goal_distance = e.at("final_goal_distance").get<double>();
            r.total_reward = e.at("total_reward").get<double>();
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("traces: ") + e.what());
    }
    return out;
}

std::vector<ReplayedTrace> replay_traces(const json& traces, const EncoderSpec& encoder) {
    std::vector<ReplayedTrace> out;
    for (EpisodeRecord& rec : records_from_traces(traces)) {
        ScriptedPolicy policy(rec.actions);
        EpisodeRecord again = run_episode(policy, rec.config, encoder);
        again.episode_index = rec.episode_index;
        again.suite = rec.suite;
        again.pushee = rec.pushee;
        ReplayedTrace t;
        t.identical = traces_json({rec}) == traces_json({again});
        t.recorded = std::move(rec);
        t.replayed = std::move(again);
        out.push_back(std::move(t));
    }
    return out;
}

void export_results(const std::vector<EpisodeRecord>& records, const MetricsTable& table,
                    const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::io_failure, "cannot create " + out_dir.string() + ": " + ec.message());
    write_text_file(out_dir / kEpisodesCsv, episodes_csv(records));
    write_text_file(out_dir / kMetricsCsv, metrics_csv(table));
    write_text_file(out_dir / kTracesJson, traces_json(records).dump() + "\n");
}

std::vector<EpisodeRow> read_episodes_csv(const std::filesystem::path& path) {
    std::stringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::io_failure, path.string() + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"suite", "pushee", "scenario_seed", "episode_seed", "success", "contact_rate",
                             "collision_rate", "object_path_length", "initial_shortest_path"}) {
        if (!col.count(need)) throw Error(ErrorCode::io_failure, path.string() + ": missing column " + need);
    }
    std::vector<EpisodeRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> c = split_csv_line(line);
        if (c.size() != header.size()) throw Error(ErrorCode::io_failure, path.string() + ": ragged row");
        try {
            EpisodeRow r;
            r.key = c[col["suite"]] + "/" + c[col["pushee"]] + "/" + c[col["scenario_seed"]] + "/" + c[col["episode_seed"]];
            r.success = c[col["success"]] == "1";
            r.contact_rate = std::stod(c[col["contact_rate"]]);
            r.collision_rate = std::stod(c[col["collision_rate"]]);
            r.object_path_length = std::stod(c[col["object_path_length"]]);
            r.initial_shortest_path = std::stod(c[col["initial_shortest_path"]]);
            rows.push_back(std::move(r));
        } catch (const std::exception&) {
            throw Error(ErrorCode::io_failure, path.string() + ": malformed number");
        }
    }
    return rows;
}

Comparison compare_runs(const std::vector<EpisodeRow>& a, const std::vector<EpisodeRow>& b, double alpha) {
    std::map<std::string, const EpisodeRow*> by_key;
    for (const EpisodeRow& r : b) by_key[r.key] = &r;
    std::vector<std::pair<const EpisodeRow*, const EpisodeRow*>> pairs;
    for (const EpisodeRow& r : a) {
        auto it = by_key.find(r.key);
        if (it != by_key.end()) pairs.emplace_back(&r, it->second);
    }
    Comparison cmp;
    cmp.n_paired = static_cast<int>(pairs.size());

    auto add = [&](const std::string& name, bool solved_only, auto value) {
        std::vector<double> va, vb;
        for (const auto& [x, y] : pairs) {
            if (solved_only && !(x->success && y->success)) continue;
            va.push_back(value(*x));
            vb.push_back(value(*y));
        }
        MetricComparison m;
        m.metric = name;
        m.mean_a = summarize(va).mean;
        m.mean_b = summarize(vb).mean;
        if (va.size() >= 2) m.test = paired_t_test(va, vb, alpha);
        cmp.metrics.push_back(std::move(m));
    };
    for (const auto& [x, y] : pairs) cmp.n_both_solved += (x->success && y->success) ? 1 : 0;
    add("success", false, [](const EpisodeRow& r) { return r.success ? 1.0 : 0.0; });
    add("contact_rate", true, [](const EpisodeRow& r) { return r.contact_rate; });
    add("collision_rate", false, [](const EpisodeRow& r) { return r.collision_rate; });
    add("spl_term", false, [](const EpisodeRow& r) {
        return r.success ? r.initial_shortest_path / std::max(r.object_path_length, r.initial_shortest_path) : 0.0;
    });
    add("path_length", true, [](const EpisodeRow& r) { return r.object_path_length; });
    return cmp;
}

} // namespace cpush
