// Acceptance run: one PASS/FAIL line per top-level criterion, nonzero exit
// if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clutterpush/aer_buffer.hpp"
#include "clutterpush/baseline.hpp"
#include "clutterpush/bench.hpp"
#include "clutterpush/env.hpp"
#include "clutterpush/error.hpp"
#include "clutterpush/io.hpp"
#include "clutterpush/perception.hpp"
#include "clutterpush/planner.hpp"
#include "clutterpush/push_sim.hpp"
#include "clutterpush/rng.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cpush;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass{true};
    std::string detail;
};

// Collects failed checks; the first few messages go into the detail line.
class Checker {
public:
    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass_ = false;
        if (++failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
    Outcome done() const {
        std::string d = info_;
        if (!pass_) d += (d.empty() ? "" : " | ") + std::to_string(failures_) + " failed: " + notes_;
        return {pass_, d};
    }

private:
    bool pass_{true};
    int failures_{0};
    std::string notes_, info_;
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

OccupancyGrid random_grid(Rng& rng, int w, int h, double density, double res = 1.0) {
    OccupancyGrid g(GridGeometry{w, h, res, {}});
    for (auto& c : g.cells) c = rng.uniform() < density ? 1 : 0;
    return g;
}

WorldState open_world(Pose2D pushee, Vec2 ee, Vec2 goal) {
    WorldState w;
    w.bodies.push_back({pushee, ShapeSpec::box(0.025, 0.025), BodyRole::pushee});
    w.bodies.push_back(make_end_effector({ee.x, ee.y, 0}));
    w.goal = {goal.x, goal.y, 0};
    return w;
}

ActionDelta probe_action(const WorldState& w, Rng& rng) {
    const Vec2 d = w.pushee().pose.position() - w.end_effector().pose.position();
    if (rng.uniform() < 0.5 && norm(d) > 0) {
        const Vec2 u = d / norm(d);
        return {0.01 * u.x + rng.uniform(-0.003, 0.003), 0.01 * u.y + rng.uniform(-0.003, 0.003), rng.uniform(-0.05, 0.05)};
    }
    return {rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.09, 0.09)};
}

bool identity_holds(const RewardBreakdown& r) { return r.r_total == r.r_dist + r.r_collision + r.r_touch; }

// --------------------------------------------------------------------------

Outcome reward_exactness() {
    Checker c;
    const EpisodeConfig cfg;
    int steps = 0;
    {
        PushEnv env;
        env.reset(open_world({0.5, 0.5, 0}, {0.4, 0.5}, {0.52, 0.5}), cfg);
        const StepResult r = env.step({});
        c.require(r.info.goal_reached && r.reward.r_dist == 50.0, "goal step r_dist != 50");
        c.require(identity_holds(r.reward), "identity (goal)");
        ++steps;
    }
    {
        PushEnv env;
        env.reset(open_world({0.96, 0.5, 0}, {0.96 - 0.0355, 0.5}, {0.5, 0.5}), cfg);
        StepResult r;
        while (!env.done()) {
            r = env.step({0.01, 0, 0});
            c.require(identity_holds(r.reward), "identity (oob run)");
            ++steps;
        }
        c.require(r.info.out_of_bounds && r.reward.r_collision == -10.0, "out-of-bounds step lacks -10");
    }
    {
        WorldState w = open_world({0.3, 0.5, 0}, {0.7, 0.5}, {0.3, 0.8});
        w.bodies.insert(w.bodies.begin(), BodyState{{0.76, 0.5, 0}, ShapeSpec::box(0.0495, 0.05), BodyRole::obstacle});
        PushEnv env;
        env.reset(w, cfg);
        const StepResult r = env.step({});
        c.require(r.info.collision && r.reward.r_collision == -5.0, "collision step lacks -5");
        c.require(identity_holds(r.reward), "identity (collision)");
        ++steps;
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        PushEnv env;
        EpisodeConfig e;
        e.scenario = scenario_suite(SuiteId::free_space).front();
        e.seed = seed;
        env.reset(e);
        const StepResult r = env.step({});
        c.require(r.reward.r_total == -2.0, "stationary first step total " + fmt(r.reward.r_total, 17));
        c.require(identity_holds(r.reward), "identity (stationary)");
        ++steps;
    }
    c.note(std::to_string(steps) + " steps checked");
    return c.done();
}

Outcome observation_contract() {
    Checker c;
    Rng rng(2024);
    int steps = 0;
    double worst = 0;
    const SuiteId suites[] = {SuiteId::free_space, SuiteId::env_a, SuiteId::env_c, SuiteId::complex_1, SuiteId::complex_2};
    for (int ep = 0; steps < 1000; ++ep) {
        EpisodeConfig cfg;
        cfg.scenario = scenario_suite(suites[ep % 5]).front();
        cfg.scenario.rng_seed = 500 + ep;
        cfg.seed = 500 + ep;
        cfg.d_min = 0.1;
        cfg.d_max = 0.4;
        cfg.max_steps = 80;
        cfg.arm_joints = ep % 2 == 0;
        PushEnv a, b;
        const Observation oa = a.reset(cfg);
        const Vec2 offset{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Observation ob = b.reset(translate_world(a.world(), offset), cfg);
        for (int i = 0; i < obs_layout::kSize; ++i) worst = std::max(worst, std::abs(oa[i] - ob[i]));
        while (!a.done() && steps < 1000) {
            const ActionDelta act = probe_action(a.world(), rng);
            const StepResult ra = a.step(act);
            const StepResult rb = b.step(act);
            ++steps;
            c.require(ra.obs.size() == 49, "observation size");
            for (double v : ra.obs) c.require(std::isfinite(v), "non-finite observation value");
            c.require(ra.obs[obs_layout::kContact] == (ra.info.contact ? 1.0 : 0.0), "contact slot");
            for (int i = 0; i < obs_layout::kSize; ++i) worst = std::max(worst, std::abs(ra.obs[i] - rb.obs[i]));
            c.require(ra.done == rb.done, "translated episode diverged");
        }
    }
    c.require(worst <= 1e-9, "translation drift " + fmt(worst));
    c.note(std::to_string(steps) + " steps, max drift " + fmt(worst));
    return c.done();
}

Outcome planner_optimality() {
    Checker c;
    Rng rng(mix_seed(99, 0));
    double worst_vg = 0, worst_a8 = 0;
    int grids = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Rng trng(mix_seed(99, static_cast<std::uint64_t>(trial)));
        const OccupancyGrid g = random_grid(trng, 64, 64, trng.uniform(0.1, 0.3));
        int sr, sc, gr, gc;
        double a8;
        do {
            sr = static_cast<int>(trng.below(64));
            sc = static_cast<int>(trng.below(64));
            gr = static_cast<int>(trng.below(64));
            gc = static_cast<int>(trng.below(64));
            a8 = (g.occupied(sr, sc) || g.occupied(gr, gc)) ? std::numeric_limits<double>::infinity()
                                                             : oracle::astar8_length(g, sr, sc, gr, gc);
        } while (!std::isfinite(a8) || (sr == gr && sc == gc));
        const Vec2 s{sc + 0.5, sr + 0.5}, t{gc + 0.5, gr + 0.5};
        Path p;
        try {
            p = plan_path(g, s, t);
        } catch (const Error& e) {
            c.require(false, "grid " + std::to_string(trial) + ": " + e.what());
            continue;
        }
        const double vg = oracle::visibility_graph_length(g, s, t);
        c.require(p.length <= 1.02 * vg, "grid " + std::to_string(trial) + " ratio " + fmt(p.length / vg));
        c.require(p.length >= distance(s, t) - 1e-9, "grid " + std::to_string(trial) + " shorter than straight line");
        c.require(p.length <= a8 + 1e-9, "grid " + std::to_string(trial) + " longer than 8-connected A*");
        worst_vg = std::max(worst_vg, p.length / vg);
        worst_a8 = std::max(worst_a8, p.length / a8);
        ++grids;
    }
    c.note(std::to_string(grids) + " grids, worst/visibility " + fmt(worst_vg, 6) + ", worst/A*8 " + fmt(worst_a8, 6));
    return c.done();
}

Outcome subgoal_rule() {
    Checker c;
    double worst = 0;
    auto expect = [&](const Path& p, Vec2 want) {
        const Vec2 got = subgoal_point(p);
        worst = std::max(worst, distance(got, want));
    };
    expect(Path{{{0, 0}, {1, 0}, {1, 1}}, 2}, {0.4, 0});
    expect(Path{{{0, 0}, {0.1, 0}, {0.1, 1}}, 1.1}, {0.1, 0.12});
    expect(Path{{{1, 1}, {4, 5}}, 5}, {1.6, 1.8});
    expect(Path{{{0, 0}, {0, 0.3}, {0.4, 0.3}, {0.4, 1.3}}, 1.7}, {0.04, 0.3});
    // Staircase of n unit steps: 20% of n lands at a closed-form corner offset.
    for (int n = 1; n <= 12; ++n) {
        std::vector<Vec2> pts{{0, 0}};
        for (int k = 0; k < n; ++k) pts.push_back(pts.back() + (k % 2 == 0 ? Vec2{1, 0} : Vec2{0, 1}));
        const double s = 0.2 * n;
        const int whole = static_cast<int>(std::floor(s));
        const double frac = s - whole;
        Vec2 want = pts[static_cast<std::size_t>(whole)];
        if (whole < n) want = want + (whole % 2 == 0 ? Vec2{frac, 0} : Vec2{0, frac});
        expect(Path{pts, double(n)}, want);
    }
    // Circle arc approximated by a regular polygon with equal edges.
    for (int m : {5, 10, 20, 40}) {
        std::vector<Vec2> pts;
        for (int k = 0; k <= m; ++k) {
            const double a = std::numbers::pi * k / m;
            pts.push_back({std::cos(a), std::sin(a)});
        }
        const double edge = 2 * std::sin(std::numbers::pi / (2 * m));
        const double s = 0.2 * m * edge;
        const int k = static_cast<int>(std::floor(s / edge + 1e-12));
        const double f = s / edge - k;
        const Vec2 want = k >= m ? pts.back() : pts[k] + (pts[k + 1] - pts[k]) * f;
        expect(Path{pts, m * edge}, want);
    }
    c.require(worst <= 1e-9, "max error " + fmt(worst));
    c.note("max error " + fmt(worst));
    return c.done();
}

Outcome inflation_correctness() {
    Checker c;
    Rng rng(31337);
    std::size_t cells = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const OccupancyGrid g = random_grid(rng, 32, 32, rng.uniform(0.01, 0.2), 0.01);
        const double radius = rng.uniform(0.0, 0.1);
        const OccupancyGrid fast = inflate(g, radius);
        const OccupancyGrid brute = oracle::brute_inflate(g, radius);
        c.require(fast == brute, "grid " + std::to_string(trial) + " differs");
        cells += fast.count_occupied();
    }
    c.note("50 grids, " + std::to_string(cells) + " inflated cells compared");
    return c.done();
}

Outcome dynamics_sanity() {
    Checker c;
    // Center-line pushes on disks.
    for (double yaw : {0.0, 0.7, -2.1}) {
        WorldState w;
        w.bodies.push_back({{0.5, 0.5, 0.3}, ShapeSpec::disk(0.025), BodyRole::pushee});
        w.bodies.push_back(make_end_effector({0.5 - 0.0355 * std::cos(yaw), 0.5 - 0.0355 * std::sin(yaw), 0}));
        for (int i = 0; i < 30; ++i) w = step_ee(w, {0.01 * std::cos(yaw), 0.01 * std::sin(yaw), 0}).world;
        c.require(w.pushee().pose.theta == 0.3, "center push rotated the disk");
    }
    // Off-center pushes against a 100x finer integration.
    LimitSurfaceParams fine;
    fine.max_substep /= 100.0;
    double worst_pos = 0, worst_rot = 0;
    Rng rng(8);
    for (int ep = 0; ep < 12; ++ep) {
        const ShapeSpec shape = ep % 3 == 0 ? ShapeSpec::box(0.025, 0.025)
                                : ep % 3 == 1 ? pushee_shape("fragment")
                                              : ShapeSpec::box(0.04, 0.04);
        const double off = rng.uniform(0.005, 0.02) * (ep % 2 ? 1 : -1);
        WorldState a;
        a.bodies.push_back({{0.25, 0.5, rng.uniform(-0.3, 0.3)}, shape, BodyRole::pushee});
        a.bodies.push_back(make_end_effector({0.25 - shape.circumscribed_radius() - 0.012, 0.5 + off, 0}));
        WorldState b = a;
        for (int i = 0; i < 100; ++i) {
            const ActionDelta act{0.006, rng.uniform(-0.002, 0.002), 0};
            a = step_ee(a, act).world;
            b = step_ee(b, act, fine).world;
        }
        worst_pos = std::max(worst_pos, distance(a.pushee().pose.position(), b.pushee().pose.position()));
        worst_rot = std::max(worst_rot, std::abs(normalize_angle(a.pushee().pose.theta - b.pushee().pose.theta)));
    }
    c.require(worst_pos <= 1e-3, "position error " + fmt(worst_pos));
    c.require(worst_rot <= 1e-2, "rotation error " + fmt(worst_rot));
    // Penetration and obstacle immobility along cluttered baseline and probe episodes.
    double worst_pen = 0;
    int steps = 0;
    for (int ep = 0; ep < 16; ++ep) {
        EpisodeConfig cfg;
        cfg.scenario = scenario_suite(ep % 2 ? SuiteId::complex_2 : SuiteId::env_e).front();
        cfg.scenario.rng_seed = 900 + ep;
        cfg.seed = 900 + ep;
        cfg.d_min = 0.15;
        cfg.d_max = 0.5;
        cfg.max_steps = 150;
        PushEnv env;
        env.reset(cfg);
        std::vector<BodyState> obstacles;
        for (const BodyState* o : env.world().obstacles()) obstacles.push_back(*o);
        BaselineController ctl;
        ctl.begin(env);
        Rng prng(ep);
        while (!env.done()) {
            const ActionDelta act = ep % 4 < 2 ? ctl.act(env).action : probe_action(env.world(), prng);
            env.step(act);
            ++steps;
            const WorldState& w = env.world();
            const BodyState& p = w.pushee();
            const BodyState& e = w.end_effector();
            worst_pen = std::max(worst_pen, -separation(e.shape, e.pose, p.shape, p.pose));
            std::size_t k = 0;
            for (const BodyState* o : w.obstacles()) {
                worst_pen = std::max(worst_pen, -separation(p.shape, p.pose, o->shape, o->pose));
                c.require(*o == obstacles[k++], "an obstacle moved");
            }
        }
    }
    c.require(worst_pen <= kPenetrationTolerance, "penetration " + fmt(worst_pen));
    c.note("fine-step error " + fmt(worst_pos) + " m / " + fmt(worst_rot) + " rad, max penetration " +
           fmt(std::max(0.0, worst_pen)) + " m over " + std::to_string(steps) + " steps");
    return c.done();
}

Outcome aer_semantics() {
    Checker c;
    c.require(ReplayBuffer().capacity() == 1'000'000, "default capacity");
    c.require(AerParams{}.bs == 512 && AerParams{}.k == 4, "default bs/k");
    c.require(aer_defaults::kBatchSize == 512 && aer_defaults::kOversample == 4 && aer_defaults::kCapacity == 1'000'000,
              "declared defaults");

    ReplayBuffer buf(6000);
    Rng rng(77);
    for (int i = 0; i < 6000; ++i) {
        Transition t;
        const int hot = rng.uniform() < 0.3 ? 0 : 1;
        for (int d = 0; d < obs_layout::kSize; ++d) t.obs[d] = rng.uniform(-0.5, 0.5) + ((d % 2) == hot ? 1.0 : 0.0);
        t.next_obs = t.obs;
        t.reward = rng.uniform(-2, 0);
        buf.push(t);
    }
    Observation q{};
    for (int d = 0; d < obs_layout::kSize; d += 2) q[d] = 1.0;

    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const AerBatch b = sample_aer(buf, q, {64, 1, {}}, seed);
        std::vector<std::size_t> sel = b.selected;
        std::sort(sel.begin(), sel.end());
        c.require(sel == b.presample && sel == uniform_presample(buf.size(), 64, seed), "k=1 batch differs from presample");
    }

    std::vector<double> aer, uni;
    for (int d = 0; d < 1000; ++d) {
        const AerBatch b = sample_aer(buf, q, {32, 4, {}}, mix_seed(1, d));
        double sa = 0, su = 0;
        for (std::size_t i : b.selected) sa += cosine_similarity(buf.at(i).obs, q);
        for (std::size_t i : uniform_presample(buf.size(), 32, mix_seed(2, d))) su += cosine_similarity(buf.at(i).obs, q);
        aer.push_back(sa / 32);
        uni.push_back(su / 32);
    }
    const TTestResult t = paired_t_test(aer, uni);
    const double one_sided = t.t > 0 ? t.p_value / 2 : 1 - t.p_value / 2;
    c.require(t.t > 0 && one_sided < 0.01, "one-sided p " + fmt(one_sided));
    c.note("mean similarity AER " + fmt(summarize(aer).mean) + " vs uniform " + fmt(summarize(uni).mean) + ", t " +
           fmt(t.t) + ", one-sided p " + fmt(one_sided));
    return c.done();
}

Outcome baseline_behavior() {
    Checker c;
    SuiteRunConfig run;
    run.suite = SuiteId::free_space;
    run.episodes = 100;
    run.seed = 3;
    run.d_min = 0.2;
    run.d_max = 0.6;
    std::vector<EpisodeRecord> records;
    int violations = 0, relocating = 0, steps = 0;
    for (const EpisodeConfig& cfg : suite_episodes(run)) {
        // Episode loop with the policy in hand so the branch check sees every step.
        PushEnv env;
        env.reset(cfg);
        BaselineController ctl;
        ctl.begin(env);
        EpisodeRecord rec;
        rec.initial_shortest_path = env.initial_path().length;
        std::vector<Vec2> trace{env.world().pushee().pose.position()};
        bool touched = false;
        StepResult r;
        while (!env.done()) {
            const ControlTerms terms = ctl.act(env);
            const Vec2 to_pushee = env.world().pushee().pose.position() - env.world().end_effector().pose.position();
            if (terms.psi >= 0.6) {
                ++relocating;
                if (!terms.relocating || dot(Vec2{terms.action.dx, terms.action.dy}, to_pushee) > 0) ++violations;
            }
            r = env.step(terms.action);
            ++steps;
            trace.push_back(env.world().pushee().pose.position());
            touched = touched || r.info.contact;
            if (touched) {
                ++rec.steps_after_first_touch;
                rec.contact_steps_after_first_touch += r.info.contact;
            }
        }
        rec.success = r.info.goal_reached;
        rec.object_path_length = path_length(trace);
        records.push_back(rec);
    }
    const MetricsTable m = aggregate_metrics(records);
    c.require(m.success_rate >= 0.95, "success " + fmt(m.success_rate));
    c.require(m.contact_rate.mean >= 0.80, "contact " + fmt(m.contact_rate.mean));
    c.require(violations == 0, std::to_string(violations) + " branch violations");
    // The library's own suite runner must agree with the hand-rolled loop.
    const MetricsTable lib = aggregate_metrics(run_suite(run));
    c.require(lib.success_rate == m.success_rate && lib.contact_rate.mean == m.contact_rate.mean, "run_suite disagrees");
    c.note("success " + fmt(m.success_rate) + ", contact " + fmt(m.contact_rate.mean) + ", spl " + fmt(m.spl) + ", " +
           std::to_string(relocating) + " relocation steps of " + std::to_string(steps) + ", " +
           std::to_string(violations) + " violations");
    return c.done();
}

Outcome metrics() {
    Checker c;
    auto rec = [](bool s, double l, double p) {
        EpisodeRecord r;
        r.success = s;
        r.initial_shortest_path = l;
        r.object_path_length = p;
        return r;
    };
    c.require(compute_spl({rec(true, 0.3, 0.3)}) == 1.0, "SPL 1.0 case");
    c.require(compute_spl({rec(false, 0.3, 0.3)}) == 0.0, "SPL 0.0 case");
    c.require(compute_spl({rec(true, 0.4, 0.8), rec(false, 0.5, 0.5)}) == 0.25, "SPL 0.25 composite (half path, one failure)");
    c.require(compute_spl({rec(true, 1, 1), rec(false, 1, 1), rec(false, 1, 3), rec(false, 2, 2)}) == 0.25,
              "SPL 0.25 composite (one of four)");

    const json doc = read_json_file(fs::path(CPUSH_TEST_DATA_DIR) / "ttest_cases.json");
    double worst_t = 0;
    for (const json& k : doc.at("cases")) {
        const TTestResult r = paired_t_test(k.at("a").get<std::vector<double>>(), k.at("b").get<std::vector<double>>());
        worst_t = std::max(worst_t, std::abs(r.t - k.at("t").get<double>()));
    }
    c.require(worst_t <= 1e-6, "t error " + fmt(worst_t));

    int runs = 0;
    for (SuiteId s : {SuiteId::free_space, SuiteId::env_a, SuiteId::env_b, SuiteId::env_c, SuiteId::env_d, SuiteId::env_e,
                      SuiteId::complex_1, SuiteId::complex_2}) {
        for (PolicyKind p : {PolicyKind::baseline, PolicyKind::random}) {
            SuiteRunConfig run;
            run.suite = s;
            run.policy = p;
            run.episodes = 8;
            run.seed = 17;
            run.d_min = 0.1;
            run.d_max = 0.3;
            run.max_steps = 250;
            const MetricsTable m = aggregate_metrics(run_suite(run));
            c.require(m.spl <= m.success_rate, std::string(to_string(s)) + " SPL above success");
            ++runs;
        }
    }
    c.note("t error " + fmt(worst_t) + ", SPL <= success on " + std::to_string(runs) + " suite runs");
    return c.done();
}

int sh(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

bool same_bytes(const fs::path& a, const fs::path& b) {
    try {
        return read_text_file(a) == read_text_file(b);
    } catch (const Error&) {
        return false;
    }
}

Outcome end_to_end() {
    Checker c;
    const fs::path dir = fs::temp_directory_path() / "cpush_acceptance_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = CPUSH_CLI_PATH;
    const std::string scn = (dir / "scenario.json").string();
    c.require(sh(cli + " scenario gen --suite complex_1 --seed 42 --out " + scn) == 0, "scenario gen failed");

    // Recorded baseline run, replayed from its traces.
    const fs::path rec = dir / "recorded", rep = dir / "replayed";
    c.require(sh(cli + " bench run --scenario " + scn + " --policy baseline --episodes 3 --seed 9 --max-steps 200 --out " +
                 rec.string()) == 0,
              "bench run failed");
    c.require(sh(cli + " replay --trace " + (rec / kTracesJson).string() + " --out " + rep.string()) == 0,
              "replay reported a mismatch");
    c.require(same_bytes(rec / kEpisodesCsv, rep / kEpisodesCsv), "replayed episodes.csv differs");
    c.require(same_bytes(rec / kTracesJson, rep / kTracesJson), "replayed traces.json differs");

    // A random run's recorded actions fed back as a scripted run.
    const fs::path rnd = dir / "random", scr = dir / "scripted";
    c.require(sh(cli + " bench run --scenario " + scn + " --policy random --episodes 1 --seed 5 --max-steps 120 --out " +
                 rnd.string()) == 0,
              "random run failed");
    try {
        const json traces = read_json_file(rnd / kTracesJson);
        write_text_file(dir / "actions.json", json{{"actions", traces.at("episodes").at(0).at("actions")}}.dump());
    } catch (const std::exception& e) {
        c.require(false, std::string("cannot extract actions: ") + e.what());
    }
    c.require(sh(cli + " bench run --scenario " + scn + " --policy scripted --actions " + (dir / "actions.json").string() +
                 " --episodes 1 --seed 5 --max-steps 120 --out " + scr.string()) == 0,
              "scripted run failed");
    c.require(same_bytes(rnd / kEpisodesCsv, scr / kEpisodesCsv), "scripted episodes.csv differs");
    c.require(same_bytes(rnd / kTracesJson, scr / kTracesJson), "scripted traces.json differs");
    c.note("replay and scripted re-run byte-identical");
    return c.done();
}

struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"reward_exactness", 1, reward_exactness},
        {"observation_contract", 30, observation_contract},
        {"planner_optimality", 120, planner_optimality},
        {"subgoal_rule", 1, subgoal_rule},
        {"inflation_correctness", 30, inflation_correctness},
        {"dynamics_sanity", 120, dynamics_sanity},
        {"aer_semantics", 60, aer_semantics},
        {"baseline_behavior", 300, baseline_behavior},
        {"metrics", 300, metrics},
        {"end_to_end_determinism", 300, end_to_end},
    };
    int failed = 0;
    for (const Criterion& k : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = k.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > k.budget_s) {
            o.pass = false;
            o.detail += " | over the " + fmt(k.budget_s) + " s budget";
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %-24s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", k.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
