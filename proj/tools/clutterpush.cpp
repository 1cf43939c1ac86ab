#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "clutterpush/bench.hpp"
#include "clutterpush/error.hpp"
#include "clutterpush/io.hpp"
#include "clutterpush/planner.hpp"
#include "clutterpush/protocol.hpp"
#include "clutterpush/world.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cpush;

namespace {

Vec2 parse_point(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::invalid_argument, "expected x,y but got '" + text + "'");
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument, "expected x,y but got '" + text + "'");
    }
}

std::vector<ActionDelta> load_actions(const fs::path& path) {
    const json j = read_json_file(path);
    const json& list = j.is_object() ? j.at("actions") : j;
    std::vector<ActionDelta> out;
    for (const json& a : list) out.push_back({a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()});
    return out;
}

ProtocolServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

void print_metrics(const MetricsTable& m) {
    std::printf("episodes      %d\n", m.n_episodes);
    std::printf("success_rate  %.4f\n", m.success_rate);
    std::printf("contact_rate  %.4f +- %.4f\n", m.contact_rate.mean, m.contact_rate.sd);
    std::printf("collision     %.4f +- %.4f\n", m.collision_rate.mean, m.collision_rate.sd);
    std::printf("spl           %.4f\n", m.spl);
    std::printf("path_length   %.4f +- %.4f\n", m.path_length.mean, m.path_length.sd);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planar pushing simulation and benchmark toolkit"};
    app.require_subcommand(1);

    // scenario gen
    auto* scenario = app.add_subcommand("scenario", "Scenario files");
    scenario->require_subcommand(1);
    auto* gen = scenario->add_subcommand("gen", "Write a scenario file");
    std::string gen_suite = "free_space", gen_pushee, gen_out;
    std::uint64_t gen_seed = 0;
    int gen_index = 0;
    gen->add_option("--suite", gen_suite, "Suite name")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Scenario rng seed")->capture_default_str();
    gen->add_option("--pushee", gen_pushee, "Pushee catalogue name (default: first of the suite)");
    gen->add_option("--gap-index", gen_index, "Which of the suite's specs to take")->capture_default_str();
    gen->add_option("--out", gen_out, "Output path")->required();

    // plan
    auto* plan = app.add_subcommand("plan", "Plan a path on a PGM occupancy grid");
    std::string plan_grid, plan_start, plan_goal, plan_out;
    int plan_snap = 0;
    plan->add_option("--grid", plan_grid, "P2 PGM grid")->required();
    plan->add_option("--start", plan_start, "Start x,y (world frame)")->required();
    plan->add_option("--goal", plan_goal, "Goal x,y (world frame)")->required();
    plan->add_option("--snap", plan_snap, "Snap radius in cells")->capture_default_str();
    plan->add_option("--out", plan_out, "Output JSON (stdout if omitted)");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the environment over TCP");
    int serve_port = 5555;
    std::string serve_scenario, serve_encoder;
    bool serve_any = false;
    serve->add_option("--port", serve_port, "TCP port (0 picks one)")->capture_default_str();
    serve->add_option("--scenario", serve_scenario, "Default scenario file");
    serve->add_option("--encoder", serve_encoder, "Encoder weight file");
    serve->add_flag("--any-address", serve_any, "Listen on all interfaces instead of loopback");

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark suites");
    bench->require_subcommand(1);
    auto* run = bench->add_subcommand("run", "Run a suite and export results");
    SuiteRunConfig rc;
    std::string run_suite_name = "free_space", run_policy = "baseline", run_scenario, run_params, run_out, run_actions,
                run_encoder;
    run->add_option("--suite", run_suite_name, "Suite name")->capture_default_str();
    run->add_option("--scenario", run_scenario, "Scenario file instead of the suite catalogue");
    run->add_option("--policy", run_policy, "baseline | scripted | random | agent")->capture_default_str();
    run->add_option("--episodes", rc.episodes, "Episode count")->capture_default_str();
    run->add_option("--seed", rc.seed, "Run seed")->capture_default_str();
    run->add_option("--pushee", rc.pushee, "Restrict to one pushee");
    run->add_option("--d-min", rc.d_min, "Minimum start-goal distance")->capture_default_str();
    run->add_option("--d-max", rc.d_max, "Maximum start-goal distance")->capture_default_str();
    run->add_option("--max-steps", rc.max_steps, "Step limit")->capture_default_str();
    run->add_option("--baseline-params", run_params, "Controller params JSON");
    run->add_option("--actions", run_actions, "Action list JSON for the scripted policy");
    run->add_option("--encoder", run_encoder, "Encoder weight file");
    run->add_option("--agent-host", rc.agent_host, "Agent host")->capture_default_str();
    run->add_option("--agent-port", rc.agent_port, "Agent port");
    int agent_timeout_ms = 5000;
    run->add_option("--agent-timeout-ms", agent_timeout_ms, "Agent reply deadline")->capture_default_str();
    run->add_option("--out", run_out, "Output directory")->required();

    auto* cmp = bench->add_subcommand("compare", "Paired comparison of two runs");
    std::string cmp_a, cmp_b;
    double cmp_alpha = 0.05;
    cmp->add_option("--a", cmp_a, "Result directory A")->required();
    cmp->add_option("--b", cmp_b, "Result directory B")->required();
    cmp->add_option("--alpha", cmp_alpha, "Significance level")->capture_default_str();

    // replay
    auto* replay = app.add_subcommand("replay", "Re-execute recorded traces");
    std::string replay_trace, replay_out, replay_encoder;
    replay->add_option("--trace", replay_trace, "traces.json")->required();
    replay->add_option("--out", replay_out, "Write the replayed results here");
    replay->add_option("--encoder", replay_encoder, "Encoder weight file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const SuiteId suite = parse_suite(gen_suite);
            std::vector<ScenarioSpec> specs = suite == SuiteId::custom ? std::vector<ScenarioSpec>{} : scenario_suite(suite);
            if (!gen_pushee.empty()) {
                std::erase_if(specs, [&](const ScenarioSpec& s) { return pushee_name(s.pushee_shape) != gen_pushee; });
            }
            if (specs.empty()) throw Error(ErrorCode::invalid_argument, "no scenario spec matches");
            if (gen_index < 0 || gen_index >= static_cast<int>(specs.size()))
                throw Error(ErrorCode::invalid_argument, "--gap-index out of range");
            ScenarioSpec spec = specs[static_cast<std::size_t>(gen_index)];
            spec.rng_seed = gen_seed;
            make_scenario(spec);  // fail early on unsatisfiable placements
            save_scenario(spec, gen_out);
            return 0;
        }
        if (*plan) {
            const OccupancyGrid grid = read_pgm(plan_grid);
            PlanOptions opts;
            opts.snap_radius_cells = plan_snap;
            const Path path = plan_path(grid, parse_point(plan_start), parse_point(plan_goal), opts);
            json j;
            j["waypoints"] = json::array();
            for (const Vec2& p : path.waypoints) j["waypoints"].push_back(to_json(p));
            j["length"] = path.length;
            if (plan_out.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                write_text_file(plan_out, j.dump(2) + "\n");
            }
            return 0;
        }
        if (*serve) {
            EpisodeConfig defaults;
            if (!serve_scenario.empty()) defaults.scenario = load_scenario(serve_scenario);
            const EncoderSpec enc = serve_encoder.empty() ? EncoderSpec::builtin() : load_encoder(serve_encoder);
            ProtocolServer server(defaults, enc);
            const int port = server.start(serve_port, !serve_any);
            std::printf("listening on port %d\n", port);
            std::fflush(stdout);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.wait();
            g_server = nullptr;
            return 0;
        }
        if (*run) {
            rc.suite = parse_suite(run_suite_name);
            rc.policy = parse_policy(run_policy);
            if (!run_scenario.empty()) rc.scenario = load_scenario(run_scenario);
            if (!run_params.empty())
                rc.baseline_params = controller_params_from_json(read_json_file(run_params), ControllerParams{});
            if (!run_actions.empty()) rc.scripted_actions = load_actions(run_actions);
            if (!run_encoder.empty()) rc.encoder = load_encoder(run_encoder);
            rc.agent_timeout = std::chrono::milliseconds(agent_timeout_ms);
            const auto records = run_suite(rc);
            const MetricsTable table = aggregate_metrics(records);
            export_results(records, table, run_out);
            print_metrics(table);
            return 0;
        }
        if (*cmp) {
            const auto a = read_episodes_csv(fs::path(cmp_a) / kEpisodesCsv);
            const auto b = read_episodes_csv(fs::path(cmp_b) / kEpisodesCsv);
            const Comparison c = compare_runs(a, b, cmp_alpha);
            std::printf("paired %d, both solved %d, alpha %g\n", c.n_paired, c.n_both_solved, cmp_alpha);
            std::printf("%-16s %10s %10s %10s %10s %s\n", "metric", "mean_a", "mean_b", "t", "p", "significant");
            for (const MetricComparison& m : c.metrics) {
                std::printf("%-16s %10.4f %10.4f %10.4f %10.4g %s%s\n", m.metric.c_str(), m.mean_a, m.mean_b, m.test.t,
                            m.test.p_value, m.test.significant ? "yes" : "no",
                            m.test.degenerate_variance ? " (degenerate variance)" : "");
            }
            return 0;
        }
        if (*replay) {
            const json traces = read_json_file(replay_trace);
            const EncoderSpec enc = replay_encoder.empty() ? EncoderSpec::builtin() : load_encoder(replay_encoder);
            const auto results = replay_traces(traces, enc);
            std::vector<EpisodeRecord> replayed;
            int mismatches = 0;
            for (const ReplayedTrace& r : results) {
                if (!r.identical) {
                    ++mismatches;
                    std::fprintf(stderr, "trace mismatch: %s\n", r.recorded.key().c_str());
                }
                replayed.push_back(r.replayed);
            }
            if (!replay_out.empty() && !replayed.empty()) export_results(replayed, aggregate_metrics(replayed), replay_out);
            std::printf("%zu episodes replayed, %d mismatched\n", results.size(), mismatches);
            return mismatches == 0 ? 0 : 1;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
