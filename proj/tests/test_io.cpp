#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgp/io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mgp;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = MGP_SCENARIO_DIR;

/// Scratch directory removed at the end of the test case.
struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("mgp_test_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int cli(const std::string& args)
{
    const std::string command = std::string(MGP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ScenarioConfig small_scenario()
{
    ScenarioConfig c = io::load_scenario(kScenarios + "/multipath_static.json");
    c.duration_s = 3.0;
    c.fix.wrong_fix_prob = 0.3;
    return c;
}

}  // namespace

TEST_CASE("bundled configuration files load")
{
    const ScenarioConfig still = io::load_scenario(kScenarios + "/multipath_static.json");
    CHECK(still.seed == 20240611);
    CHECK(still.epoch_count() == 6000);
    CHECK(still.fix.target_rates.size() == 6);
    CHECK(still.sky_mask.size() == 1);

    const ScenarioConfig flight = io::load_scenario(kScenarios + "/flight_mapping.json");
    CHECK(flight.trajectory.kind == Trajectory::Kind::WAYPOINT);
    CHECK(flight.reflectors.size() == 6);
    REQUIRE(flight.scanner);
    CHECK(flight.scanner->beams == 16);

    const PipelineConfig p = io::load_pipeline_config(kScenarios + "/pipeline.json");
    CHECK(p.ransac.seed == 7);
    CHECK(p.multipath.threshold == 4.0);
    CHECK(p.multipath_feedback);

    const io::CalibrationFile calib = io::load_calibration(kScenarios + "/calib.json");
    CHECK(calib.max_pose_gap == 0.06);
    CHECK(calib.calib.lever_arm == Vec3::Zero());

    const io::ReflectorFile refl = io::load_reflectors(kScenarios + "/reflectors.json");
    CHECK(refl.reflectors.size() == 6);
    CHECK(refl.min_hits == 3);
}

TEST_CASE("configuration errors")
{
    CHECK_THROWS_AS(io::load_scenario("/nonexistent/scenario.json"), IoError);
    CHECK_THROWS_AS(io::parse_scenario("{\"seed\": 1, \"sede\": 2}"), ConfigurationError);
    CHECK_THROWS_AS(io::parse_scenario("{\"seed\": "), ConfigurationError);
    CHECK_THROWS_AS(io::parse_scenario("{\"rate_hz\": \"fast\"}"), ConfigurationError);
    CHECK_THROWS_AS(io::parse_scenario("{\"rate_hz\": -1}"), ValidationError);
    CHECK_THROWS_AS(io::parse_pipeline_config("{\"ransac\": {\"iterations\": 5}}"), ConfigurationError);
    CHECK_THROWS_AS(io::parse_pipeline_config("{\"ransac\": {\"inlier_threshold\": 0}}"), ValidationError);
    CHECK_THROWS_AS(io::parse_pipeline_config("{\"active_antennas\": [1, 9]}"), ConfigurationError);
    CHECK_THROWS_AS(io::parse_calibration("{\"lever_arm\": [0, 0]}"), ConfigurationError);
    CHECK_THROWS_AS(io::parse_reflectors("{\"reflectors\": [[0, 0, 0]], \"radius\": 1}"), ConfigurationError);

    const PipelineConfig p = io::parse_pipeline_config(
        "{\"active_antennas\": [1, 3, 5], \"outputs\": {\"poses\": \"a.csv\", \"metrics\": \"m.json\"}}");
    CHECK(p.active_antennas == std::vector<AntennaId>{1, 3, 5});
    CHECK(p.poses_path == "a.csv");
    CHECK(p.metrics_path == "m.json");
}

TEST_CASE("antenna list parsing")
{
    CHECK(io::parse_antenna_list("1,3,5") == std::vector<AntennaId>{1, 3, 5});
    CHECK(io::parse_antenna_list(" 2 , 4 ") == std::vector<AntennaId>{2, 4});
    CHECK_THROWS_AS(io::parse_antenna_list("1,,3"), ValidationError);
    CHECK_THROWS_AS(io::parse_antenna_list("a"), ValidationError);
    CHECK_THROWS_AS(io::parse_antenna_list(""), ValidationError);
}

TEST_CASE("epoch records round-trip losslessly, truth included")
{
    for (const EpochRecord& e : simulate(small_scenario())) {
        const std::string text = io::epoch_to_json(e);
        CHECK(text.find('\n') == std::string::npos);
        const EpochRecord back = io::epoch_from_json(text);
        CHECK(io::epoch_to_json(back) == text);
        CHECK(back.t == e.t);
        REQUIRE(back.fixes.size() == e.fixes.size());
        for (std::size_t i = 0; i < e.fixes.size(); ++i) CHECK(back.fixes[i].p == e.fixes[i].p);
        REQUIRE(back.truth);
        CHECK(back.truth->attitude == e.truth->attitude);
        CHECK(back.truth->multipath_sats == e.truth->multipath_sats);

        const std::set<std::string> drop{"G02"};
        CHECK(io::epoch_to_json({e.t, requery_outcomes(back, drop).fixes, {}, {}, {}}) ==
              io::epoch_to_json({e.t, requery_outcomes(e, drop).fixes, {}, {}, {}}));
    }
}

TEST_CASE("epoch stream: header, bad lines and end of stream")
{
    const auto epochs = simulate(small_scenario());
    std::ostringstream out;
    io::EpochWriter writer(out);
    writer.write(epochs[0]);
    out << "{\"t\": \"soon\"}\n";
    writer.write(epochs[1]);
    CHECK(out.str().rfind("{\"format\":\"mgp-epoch\",\"version\":1}\n", 0) == 0);

    std::istringstream in(out.str());
    io::EpochReader reader(in);
    EpochRecord e;
    CHECK(reader.next(e));
    CHECK(e.t == epochs[0].t);
    CHECK_THROWS_AS(reader.next(e), ValidationError);
    CHECK(reader.next(e));
    CHECK(e.t == epochs[1].t);
    CHECK_FALSE(reader.next(e));

    std::istringstream empty("");
    CHECK_THROWS_AS(io::EpochReader{empty}, IoError);
    std::istringstream wrong("{\"format\":\"mgp-scan\",\"version\":1}\n");
    CHECK_THROWS_AS(io::EpochReader{wrong}, IoError);
    std::istringstream future("{\"format\":\"mgp-epoch\",\"version\":2}\n");
    CHECK_THROWS_AS(io::EpochReader{future}, IoError);

    CHECK_THROWS_AS(io::epoch_from_json("{\"t\": 0, \"fixes\": [], \"extra\": 1}"), ValidationError);
    CHECK_THROWS_AS(io::epoch_from_json("not json"), ValidationError);
}

TEST_CASE("scan stream round-trip")
{
    ScanLine line;
    line.t = 0.1;
    line.points = {{Vec3(0.1, -2.0 / 3.0, -30.0), true}, {Vec3(1e-17, 5, -29), false}};
    std::ostringstream out;
    io::write_scan_header(out);
    io::write_scan_line(out, line);
    std::istringstream in(out.str());
    const auto back = io::read_scan_stream(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].t == 0.1);
    REQUIRE(back[0].points.size() == 2);
    CHECK(back[0].points[0].p == line.points[0].p);
    CHECK(back[0].points[0].reflector_flag);
    CHECK(back[0].points[1].p == line.points[1].p);
    CHECK_FALSE(back[0].points[1].reflector_flag);

    std::istringstream bad("{\"format\":\"mgp-epoch\",\"version\":1}\n");
    CHECK_THROWS_AS(io::read_scan_stream(bad), IoError);
}

TEST_CASE("pose CSV keeps complete rows only")
{
    std::istringstream in("t,E,N,U,qx,qy,qz,qw,n_fix,att_available\n"
                          "0.000,1.000000,2.000000,3.000000,0,0,0,1,6,1\n"
                          "0.100,1.000000,2.000000,3.000000,,,,,6,0\n"
                          "0.200,,,,0,0,0.6,0.8,0,1\n"
                          "0.300,4.000000,5.000000,6.000000,0,0,0.6,0.8,6,1\n");
    const auto poses = io::read_pose_csv(in);
    REQUIRE(poses.size() == 2);
    CHECK(poses[0].p == Vec3(1, 2, 3));
    CHECK(poses[1].t == 0.3);
    CHECK(angle_between(poses[1].q, UnitQuaternion::from_components(0, 0, 0.6, 0.8)) < 1e-12);

    std::istringstream bad("t,E,N\n");
    CHECK_THROWS_AS(io::read_pose_csv(bad), IoError);
    std::istringstream short_row("t,E,N,U,qx,qy,qz,qw,n_fix,att_available\n0.1,1,2\n");
    CHECK_THROWS_AS(io::read_pose_csv(short_row), ValidationError);
}

TEST_CASE("point clouds: ASCII and binary")
{
    TempDir dir;
    const std::vector<GeoPoint> cloud{{Vec3(1.25, -3.5, 0.125), 0.0, true}, {Vec3(-1.0 / 3.0, 2, 7), 0.0, false}};

    io::write_cloud(dir / "c.bin", cloud);
    CHECK(fs::file_size(dir / "c.bin") == 2 * 25);
    const auto bin = io::read_cloud(dir / "c.bin");
    REQUIRE(bin.size() == 2);
    CHECK(bin[1].p == cloud[1].p);
    CHECK(bin[0].reflector_flag);
    CHECK_FALSE(bin[1].reflector_flag);

    io::write_cloud(dir / "c.xyz", cloud);
    CHECK(io::read_text_file(dir / "c.xyz") == "1.250000 -3.500000 0.125000 1\n-0.333333 2.000000 7.000000 0\n");
    const auto xyz = io::read_cloud(dir / "c.xyz");
    REQUIRE(xyz.size() == 2);
    CHECK((xyz[1].p - cloud[1].p).norm() < 1e-6);

    io::write_text_file(dir / "broken.bin", "abc");
    CHECK_THROWS_AS(io::read_cloud(dir / "broken.bin"), ValidationError);
    CHECK_THROWS_AS(io::read_cloud(dir / "missing.xyz"), IoError);
}

TEST_CASE("metrics report formatting")
{
    MetricsReport r;
    r.epochs_processed = 3;
    r.per_antenna_fix_rate[1] = 200.0 / 3.0;
    r.per_antenna_fix_rate[2] = std::nullopt;
    r.hybrid_fix_rate = 100.0;
    r.attitude_sd_deg = EulerAngles{0.123456, 0.0, 1.0};
    r.position_sd_mm = Vec3(1.234, 5.0, 0.0);
    r.sd_against_truth = true;
    const std::string text = io::metrics_to_json(r);
    CHECK(text.find("\"1\": 66.7") != std::string::npos);
    CHECK(text.find("\"2\": null") != std::string::npos);
    CHECK(text.find("\"hybrid_fix_rate_multipath\": null") != std::string::npos);
    CHECK(text.find("\"roll\": 0.1235") != std::string::npos);
    CHECK(text.find("\"E\": 1.23") != std::string::npos);
    CHECK(text.find("\"sd_reference\": \"truth\"") != std::string::npos);
}

TEST_CASE("command line: exit codes")
{
    TempDir dir;
    CHECK(cli("") == 1);
    CHECK(cli("estimate") == 1);
    CHECK(cli("--help") == 0);

    // Missing input file: I/O error.
    CHECK(cli("estimate --epochs " + dir / "none.jsonl" + " --poses " + dir / "p.csv" + " --metrics " +
              dir / "m.json") == 1);

    // Unknown key: configuration error. Out-of-range value: validation error.
    io::write_text_file(dir / "typo.json", "{\"seeed\": 1}");
    CHECK(cli("simulate --config " + dir / "typo.json" + " --out " + dir / "e.jsonl") == 1);
    io::write_text_file(dir / "bad.json", "{\"rate_hz\": 0}");
    CHECK(cli("simulate --config " + dir / "bad.json" + " --out " + dir / "e.jsonl") == 2);

    // Scan output needs a scanner section.
    io::write_text_file(dir / "short.json", "{\"duration_s\": 2}");
    CHECK(cli("simulate --config " + dir / "short.json" + " --out " + dir / "e.jsonl" + " --scan " +
              dir / "s.jsonl") == 1);

    REQUIRE(cli("simulate --config " + dir / "short.json" + " --seed 5 --out " + dir / "e.jsonl") == 0);
    CHECK(cli("estimate --epochs " + dir / "e.jsonl" + " --config " + kScenarios +
              "/pipeline.json --poses " + dir / "p.csv" + " --metrics " + dir / "m.json") == 0);
    CHECK(io::read_text_file(dir / "m.json").find("\"epochs_processed\": 20") != std::string::npos);
    CHECK(cli("estimate --epochs " + dir / "e.jsonl" + " --poses " + dir / "p.csv" + " --metrics " + dir / "m.json" +
              " --antennas 1,9") == 1);
    CHECK(cli("estimate --epochs " + dir / "e.jsonl" + " --poses " + dir / "p.csv" + " --metrics " + dir / "m.json" +
              " --antennas 1,1") == 2);
    CHECK(cli("estimate --epochs " + dir / "e.jsonl") == 1);  // no output paths anywhere

    CHECK(cli("oracle wahba-svd --epochs " + dir / "e.jsonl" + " --out " + dir / "o.csv") == 0);
    CHECK(io::read_text_file(dir / "o.csv").rfind("t,qx,qy,qz,qw,n_baselines,vs_qmethod_deg,vs_truth_deg\n", 0) == 0);

    // Bad stream header.
    io::write_text_file(dir / "junk.jsonl", "hello\n");
    CHECK(cli("estimate --epochs " + dir / "junk.jsonl" + " --poses " + dir / "p.csv" + " --metrics " +
              dir / "m.json") == 1);
}
