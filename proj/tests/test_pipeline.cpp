#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgp/io.hpp"
#include "mgp/pipeline.hpp"
#include "mgp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace mgp;
using doctest::Approx;

namespace {

ScenarioConfig open_sky(double duration = 10.0)
{
    ScenarioConfig c;
    c.duration_s = duration;
    c.fix.wrong_fix_prob = 0.0;
    c.snr.fading_amplitude_db = 0.0;
    c.trajectory.static_position = Vec3(5, -3, 2);
    c.attitude.roll_deg.knots = {{0.0, 2.0}};
    c.attitude.yaw_deg.knots = {{0.0, -20.0}, {10.0, 60.0}};
    return c;
}

const std::vector<EpochRecord>& multipath_stream()
{
    static const std::vector<EpochRecord> epochs =
        simulate(io::load_scenario(std::string(MGP_SCENARIO_DIR) + "/multipath_static.json"));
    return epochs;
}

PipelineConfig bundled_config()
{
    return io::load_pipeline_config(std::string(MGP_SCENARIO_DIR) + "/pipeline.json");
}

MetricsReport run_quiet(std::span<const EpochRecord> epochs, const PipelineConfig& config, std::string* poses = nullptr)
{
    std::ostringstream out;
    std::ostringstream log;
    const MetricsReport r = run(epochs, config, out, log);
    if (poses) *poses = out.str();
    return r;
}

double best_antenna(const MetricsReport& r)
{
    double best = 0.0;
    for (const auto& [id, rate] : r.per_antenna_fix_rate) best = std::max(best, *rate);
    return best;
}

}  // namespace

TEST_CASE("PipelineConfig validation and antenna subsets")
{
    PipelineConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.antennas() == std::vector<AntennaId>{1, 2, 3, 4, 5, 6});
    CHECK(c.effective_min_inliers() == 4);

    c.active_antennas = {5, 1, 3};
    CHECK(c.antennas() == std::vector<AntennaId>{1, 3, 5});
    CHECK(c.effective_min_inliers() == 3);

    c.active_antennas = {1, 7};
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c.active_antennas = {1, 1};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.active_antennas = {2};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.active_antennas.clear();
    c.attitude_min_baselines = 1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("process_epoch: open sky uses every baseline and every antenna")
{
    const auto epochs = simulate(open_sky(1.0));
    for (const EpochRecord& e : epochs) {
        REQUIRE(e.baselines.size() == 15);
        const EpochResult r = process_epoch(e, PipelineConfig{});
        CHECK(r.attitude.available);
        CHECK(r.attitude.used_observations.size() == 15);
        CHECK(r.outlier_pairs.empty());
        CHECK(r.position.available);
        CHECK(r.position.n_used == 6);
        CHECK_FALSE(r.requeried);
        CHECK(angle_between(*r.attitude.q, e.truth->attitude) * kRadToDeg < 1.0);
    }
}

TEST_CASE("process_epoch: a lone lever-arm fix without baselines gives nothing")
{
    EpochRecord e;
    e.t = 1.0;
    e.fixes = {{2, Vec3(1, 2, 3), FixStatus::FIXED, 9}, {3, std::nullopt, FixStatus::NONE, 3}};
    const EpochResult r = process_epoch(e, PipelineConfig{});
    CHECK_FALSE(r.attitude.available);
    CHECK_FALSE(r.position.available);
    CHECK(r.position.n_used == 0);
}

TEST_CASE("process_epoch: zero-noise open sky reproduces the truth")
{
    ScenarioConfig c = open_sky(2.0);
    c.noise.position_fixed_sigma = 0.0;
    c.noise.baseline_fixed_sigma = 0.0;
    for (const EpochRecord& e : simulate(c)) {
        const EpochResult r = process_epoch(e, PipelineConfig{});
        REQUIRE(r.attitude.available);
        CHECK(angle_between(*r.attitude.q, e.truth->attitude) < 1e-9);
        CHECK((*r.position.p - e.truth->position).norm() < 1e-9);
    }
}

TEST_CASE("process_epoch: malformed epochs are rejected")
{
    EpochRecord e;
    e.fixes = {{1, Vec3::Zero(), FixStatus::FIXED, 8}, {1, Vec3::Zero(), FixStatus::FIXED, 8}};
    CHECK_THROWS_AS(process_epoch(e, PipelineConfig{}), ValidationError);
}

TEST_CASE("run: empty stream")
{
    std::string poses;
    const MetricsReport r = run_quiet({}, PipelineConfig{}, &poses);
    CHECK(r.epochs_processed == 0);
    CHECK_FALSE(r.hybrid_fix_rate);
    CHECK_FALSE(r.hybrid_fix_rate_multipath);
    CHECK_FALSE(r.attitude_availability);
    CHECK_FALSE(r.attitude_sd_deg);
    CHECK_FALSE(r.position_sd_mm);
    for (const auto& [id, rate] : r.per_antenna_fix_rate) CHECK_FALSE(rate);
    CHECK(poses == "t,E,N,U,qx,qy,qz,qw,n_fix,att_available\n");
    CHECK(io::metrics_to_json(r).find("\"hybrid_fix_rate\": null") != std::string::npos);
}

TEST_CASE("run: bad, duplicate and out-of-order epochs are skipped, not fatal")
{
    auto epochs = simulate(open_sky(1.0));
    std::vector<EpochRecord> stream(epochs.begin(), epochs.begin() + 5);
    stream.insert(stream.begin() + 2, stream[1]);  // duplicate time
    stream.push_back(epochs[0]);                   // goes back in time
    EpochRecord broken = epochs[6];
    broken.baselines.push_back(broken.baselines.front());
    stream.push_back(broken);
    stream.push_back(epochs[7]);

    std::ostringstream poses;
    std::ostringstream log;
    const MetricsReport r = run(stream, PipelineConfig{}, poses, log);
    CHECK(r.epochs_processed == 6);
    CHECK(r.epochs_skipped == 3);
    CHECK(log.str().find("epoch 3: skipped") != std::string::npos);

    // Pose rows strictly increase in time.
    std::istringstream in(poses.str());
    std::string line;
    std::getline(in, line);
    double last = -1.0;
    int rows = 0;
    while (std::getline(in, line)) {
        const double t = std::stod(line.substr(0, line.find(',')));
        CHECK(t > last);
        last = t;
        ++rows;
    }
    CHECK(rows == 6);

    // A reader-level failure is also logged and skipped.
    int calls = 0;
    const MetricsReport r2 = run(
        [&](EpochRecord& e) {
            ++calls;
            if (calls == 2) throw ValidationError("bad line");
            if (calls > 3) return false;
            e = epochs[static_cast<std::size_t>(calls)];
            return true;
        },
        PipelineConfig{}, poses, log);
    CHECK(r2.epochs_processed == 2);
    CHECK(r2.epochs_skipped == 1);
}

TEST_CASE("run: pose rows leave unavailable fields empty")
{
    EpochResult r;
    r.t = 0.25;
    std::ostringstream out;
    write_pose_row(out, r);
    CHECK(out.str() == "0.250,,,,,,,,0,0\n");
}

TEST_CASE("metrics: SD about the mean without truth, against truth with it")
{
    auto epochs = simulate(open_sky(5.0));
    const MetricsReport with = run_quiet(epochs, PipelineConfig{});
    CHECK(with.sd_against_truth);
    CHECK(with.attitude_availability == Approx(100.0));
    CHECK(with.hybrid_fix_rate == Approx(100.0));

    for (EpochRecord& e : epochs) e.truth.reset();
    const MetricsReport without = run_quiet(epochs, PipelineConfig{});
    CHECK_FALSE(without.sd_against_truth);
    CHECK_FALSE(without.multipath_precision);
    CHECK_FALSE(without.hybrid_fix_rate_multipath == std::nullopt);
    CHECK(without.attitude_sd_deg->yaw_deg > 10.0);
    CHECK(with.attitude_sd_deg->yaw_deg < 1.0);
    CHECK(without.position_sd_mm->x() < 10.0);
}

TEST_CASE("multipath scenario: feedback, conservation and antenna subsets")
{
    const auto& epochs = multipath_stream();
    REQUIRE(epochs.size() == 6000);
    const PipelineConfig config = bundled_config();

    const MetricsReport six = run_quiet(epochs, config);
    CHECK(six.epochs_processed == 6000);
    MESSAGE("hybrid " << *six.hybrid_fix_rate << " %, with feedback " << *six.hybrid_fix_rate_multipath
                      << " %, attitude " << *six.attitude_availability << " %");
    CHECK(*six.hybrid_fix_rate_multipath > *six.hybrid_fix_rate);
    CHECK(*six.hybrid_fix_rate > best_antenna(six));
    CHECK(*six.multipath_precision >= 0.9);
    CHECK(*six.multipath_recall >= 0.9);

    PipelineConfig off = config;
    off.multipath_feedback = false;
    const MetricsReport plain = run_quiet(epochs, off);
    CHECK(*plain.hybrid_fix_rate == *six.hybrid_fix_rate);
    CHECK_FALSE(plain.hybrid_fix_rate_multipath);

    PipelineConfig subset = config;
    subset.active_antennas = {1, 3, 5};
    const MetricsReport three = run_quiet(epochs, subset);
    CHECK(three.per_antenna_fix_rate.size() == 3);
    CHECK(*six.attitude_availability >= *three.attitude_availability);
    MESSAGE("3-antenna attitude " << *three.attitude_availability << " %");
}

TEST_CASE("run: replay is byte-identical")
{
    const auto& all = multipath_stream();
    const std::span<const EpochRecord> part(all.data(), 600);
    std::string a;
    std::string b;
    const MetricsReport ra = run_quiet(part, bundled_config(), &a);
    const MetricsReport rb = run_quiet(part, bundled_config(), &b);
    CHECK(a == b);
    CHECK(io::metrics_to_json(ra) == io::metrics_to_json(rb));
}
