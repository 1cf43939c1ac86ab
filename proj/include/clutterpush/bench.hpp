#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clutterpush/baseline.hpp"
#include "clutterpush/env.hpp"
#include "clutterpush/rng.hpp"

namespace cpush {

struct EpisodeRecord {
    // Identity of the episode; pairs runs of different policies.
    std::string suite;
    std::string pushee;
    int episode_index{0};
    std::uint64_t scenario_seed{0};
    std::uint64_t episode_seed{0};

    bool success{false};
    int steps{0};
    std::vector<Vec2> ee_trace;      // includes the initial pose
    std::vector<Vec2> object_trace;  // includes the initial pose
    std::vector<ActionDelta> actions;
    std::vector<Vec2> initial_path;
    int contact_steps_after_first_touch{0};
    int steps_after_first_touch{0};
    int collision_steps{0};
    int out_of_bounds_steps{0};
    double initial_shortest_path{0};
    double object_path_length{0};
    double ee_path_length{0};
    double final_goal_distance{0};
    double total_reward{0};
    Pose2D goal;
    EpisodeConfig config;

    [[nodiscard]] std::string key() const;
    [[nodiscard]] double contact_rate() const;
    [[nodiscard]] double collision_rate() const;
};

struct Summary {
    double mean{0};
    double sd{0};  // sample standard deviation, 0 for fewer than two values
};
Summary summarize(const std::vector<double>& values);

struct MetricsTable {
    double success_rate{0};
    Summary contact_rate;
    Summary collision_rate;
    double spl{0};
    Summary path_length;  // object path
    int n_episodes{0};
    int n_subset{0};      // episodes behind the contact/path-length columns
};

// SPL = mean of S_i * l_i / max(p_i, l_i). Throws Error(empty_input), or
// Error(invalid_argument) if some l_i <= 0.
double compute_spl(const std::vector<EpisodeRecord>& records);

struct AggregateOptions {
    // Contact rate and path length are computed over the episodes whose
    // key() is in this set; all episodes when unset.
    std::optional<std::set<std::string>> subset_keys;
};

// Throws Error(empty_input).
MetricsTable aggregate_metrics(const std::vector<EpisodeRecord>& records, const AggregateOptions& options = {});

struct TTestResult {
    double t{0};
    double p_value{1};
    int df{0};
    double mean_diff{0};
    bool significant{false};
    bool degenerate_variance{false};  // all differences identical
};

// Two-sided paired t-test on a - b. Throws Error(length_mismatch) for
// unequal or too short inputs.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05);

// Policies ---------------------------------------------------------------

class Policy {
public:
    virtual ~Policy() = default;
    virtual void begin(const PushEnv& env) = 0;
    virtual ActionDelta act(const PushEnv& env, const Observation& obs) = 0;
};

class BaselinePolicy final : public Policy {
public:
    explicit BaselinePolicy(std::optional<ControllerParams> params = std::nullopt) : ctl_(params) {}
    void begin(const PushEnv& env) override { ctl_.begin(env); }
    ActionDelta act(const PushEnv& env, const Observation&) override;
    [[nodiscard]] const ControlTerms& last() const noexcept { return last_; }
    // Steps on which psi >= threshold yet the command moved toward the pushee.
    [[nodiscard]] int branch_violations() const noexcept { return violations_; }

private:
    BaselineController ctl_;
    ControlTerms last_;
    int violations_{0};
};

// Replays a fixed action list, then holds still.
class ScriptedPolicy final : public Policy {
public:
    explicit ScriptedPolicy(std::vector<ActionDelta> actions) : actions_(std::move(actions)) {}
    void begin(const PushEnv&) override { next_ = 0; }
    ActionDelta act(const PushEnv&, const Observation&) override;

private:
    std::vector<ActionDelta> actions_;
    std::size_t next_{0};
};

// Uniform actions within the caps.
class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}
    void begin(const PushEnv& env) override;
    ActionDelta act(const PushEnv& env, const Observation&) override;

private:
    std::uint64_t seed_;
    std::optional<Rng> rng_;
};

class LineClient;

// Asks an external agent for actions: sends {"obs": [...], "step": n} lines
// and expects {"action": [dx, dy, dth]} back. Throws Error(policy_timeout)
// when the agent misses the deadline, Error(io_failure) when it cannot be
// reached.
class ProtocolAgentPolicy final : public Policy {
public:
    ProtocolAgentPolicy(std::string host, int port, std::chrono::milliseconds timeout);
    ~ProtocolAgentPolicy() override;
    void begin(const PushEnv& env) override;
    ActionDelta act(const PushEnv& env, const Observation& obs) override;

private:
    std::string host_;
    int port_;
    std::chrono::milliseconds timeout_;
    std::unique_ptr<LineClient> client_;
};

// Runs one episode. Throws Error(reset_failed) and whatever the policy throws.
EpisodeRecord run_episode(Policy& policy, const EpisodeConfig& config, const EncoderSpec& encoder = EncoderSpec::builtin());

enum class PolicyKind { baseline, scripted, random, agent };
PolicyKind parse_policy(std::string_view name);
std::string_view to_string(PolicyKind kind) noexcept;

struct SuiteRunConfig {
    SuiteId suite{SuiteId::free_space};
    std::optional<ScenarioSpec> scenario;  // overrides the suite's catalogue specs
    std::optional<std::string> pushee;     // restrict to one catalogue shape
    PolicyKind policy{PolicyKind::baseline};
    int episodes{100};
    std::uint64_t seed{0};
    double d_min{0.2};
    double d_max{0.6};
    int max_steps{500};
    double goal_tolerance{0.03};
    std::optional<ControllerParams> baseline_params;
    std::vector<ActionDelta> scripted_actions;  // same list for every episode
    std::string agent_host{"127.0.0.1"};
    int agent_port{0};
    std::chrono::milliseconds agent_timeout{5000};
    EncoderSpec encoder{};
};

// Episode configs of a suite run; episode i draws its scenario and episode
// seeds from (seed, i), so runs of different policies pair up.
std::vector<EpisodeConfig> suite_episodes(const SuiteRunConfig& config);

// Episodes run in parallel; results are ordered by episode index.
std::vector<EpisodeRecord> run_suite(const SuiteRunConfig& config);

// Files -------------------------------------------------------------------

inline constexpr const char* kEpisodesCsv = "episodes.csv";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kTracesJson = "traces.json";

std::string episodes_csv(const std::vector<EpisodeRecord>& records);
std::string metrics_csv(const MetricsTable& table);
nlohmann::json traces_json(const std::vector<EpisodeRecord>& records);

// Writes episodes.csv, metrics.csv and traces.json. Throws Error(io_failure).
void export_results(const std::vector<EpisodeRecord>& records, const MetricsTable& table,
                    const std::filesystem::path& out_dir);

nlohmann::json to_json(const EpisodeConfig& config);
EpisodeConfig episode_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ControllerParams& params);
ControllerParams controller_params_from_json(const nlohmann::json& j, const ControllerParams& base = {});

struct ReplayedTrace {
    EpisodeRecord recorded;
    EpisodeRecord replayed;
    bool identical{false};
};

// Re-executes every recorded action sequence of a traces document.
std::vector<ReplayedTrace> replay_traces(const nlohmann::json& traces, const EncoderSpec& encoder = EncoderSpec::builtin());
std::vector<EpisodeRecord> records_from_traces(const nlohmann::json& traces);

// Per-episode rows read back from episodes.csv.
struct EpisodeRow {
    std::string key;
    bool success{false};
    double contact_rate{0};
    double collision_rate{0};
    double object_path_length{0};
    double initial_shortest_path{0};
};
std::vector<EpisodeRow> read_episodes_csv(const std::filesystem::path& path);

struct MetricComparison {
    std::string metric;
    double mean_a{0};
    double mean_b{0};
    TTestResult test;
};

struct Comparison {
    int n_paired{0};
    int n_both_solved{0};
    std::vector<MetricComparison> metrics;
};

// Pairs episodes by key; success and collision rate use every pair, contact
// rate and path length only pairs both runs solved.
Comparison compare_runs(const std::vector<EpisodeRow>& a, const std::vector<EpisodeRow>& b, double alpha);

} // namespace cpush
