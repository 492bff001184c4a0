// Command-line front end.

#include "mgp/io.hpp"
#include "mgp/pipeline.hpp"
#include "mgp/simulator.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace mgp;

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

void close_checked(std::ofstream& out, const std::string& path)
{
    out.close();
    if (!out) throw IoError("error while writing '" + path + "'");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scan;
};

int cmd_simulate(const SimulateArgs& args)
{
    ScenarioConfig config = io::load_scenario(args.config);
    if (args.seed) config.seed = *args.seed;
    if (!args.scan.empty() && !config.scanner) throw ConfigurationError("--scan needs a scanner section in the scenario");

    const Simulator sim(config);
    std::ofstream out = open_output(args.out);
    io::EpochWriter writer(out);
    for (std::size_t k = 0; k < sim.epoch_count(); ++k) writer.write(sim.epoch(k));
    close_checked(out, args.out);
    std::cerr << "simulate: " << sim.epoch_count() << " epochs -> " << args.out << '\n';

    if (!args.scan.empty()) {
        const std::vector<ScanLine> lines = scan_stream(config, *config.scanner);
        std::ofstream scan = open_output(args.scan);
        io::write_scan_header(scan);
        std::size_t points = 0;
        for (const ScanLine& line : lines) {
            io::write_scan_line(scan, line);
            points += line.points.size();
        }
        close_checked(scan, args.scan);
        std::cerr << "simulate: " << lines.size() << " scan lines, " << points << " points -> " << args.scan << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string epochs;
    std::string config;
    std::string poses;
    std::string metrics;
    std::string antennas;
    bool no_feedback = false;
};

int cmd_estimate(const EstimateArgs& args)
{
    PipelineConfig config = args.config.empty() ? PipelineConfig{} : io::load_pipeline_config(args.config);
    if (!args.antennas.empty()) config.active_antennas = io::parse_antenna_list(args.antennas);
    if (args.no_feedback) config.multipath_feedback = false;
    config.validate();

    const std::string poses_path = args.poses.empty() ? config.poses_path : args.poses;
    const std::string metrics_path = args.metrics.empty() ? config.metrics_path : args.metrics;
    if (poses_path.empty() || metrics_path.empty())
        throw ConfigurationError("pose and metrics outputs must be given on the command line or in the config");

    std::ifstream in = open_input(args.epochs);
    io::EpochReader reader(in);
    std::ofstream poses = open_output(poses_path);
    const MetricsReport report = run([&](EpochRecord& e) { return reader.next(e); }, config, poses, std::cerr);
    close_checked(poses, poses_path);
    io::write_text_file(metrics_path, io::metrics_to_json(report));

    std::cerr << "estimate: " << report.epochs_processed << " epochs processed, " << report.epochs_skipped
              << " skipped\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct GeorefArgs {
    std::string poses;
    std::string scan;
    std::string calib;
    std::string cloud;
};

int cmd_georef(const GeorefArgs& args)
{
    const io::CalibrationFile calib = io::load_calibration(args.calib);
    std::ifstream pose_in = open_input(args.poses);
    const PoseTable poses(io::read_pose_csv(pose_in));
    std::ifstream scan_in = open_input(args.scan);
    const std::vector<ScanLine> lines = io::read_scan_stream(scan_in);

    GeoreferenceStats stats;
    const std::vector<GeoPoint> cloud = georeference_scans(lines, poses, calib.calib, calib.max_pose_gap, &stats);
    io::write_cloud(args.cloud, cloud);
    std::cerr << "georef: " << stats.points_out << " points written, " << stats.points_dropped << " dropped ("
              << stats.lines_dropped << " lines without a pose within " << calib.max_pose_gap << " s)\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string cloud;
    std::string reflectors;
    std::string report;
};

int cmd_evaluate(const EvaluateArgs& args)
{
    const io::ReflectorFile setup = io::load_reflectors(args.reflectors);
    const std::vector<GeoPoint> cloud = io::read_cloud(args.cloud);
    const ReflectorEvaluation ev = evaluate_reflectors(cloud, setup.reflectors, setup.cluster_radius, setup.min_hits);
    io::write_text_file(args.report, io::evaluation_to_json(ev, setup));
    if (ev.unresolved > 0) std::cerr << "evaluate: warning, " << ev.unresolved << " reflector(s) unresolved\n";
    if (ev.rms_horizontal)
        std::cerr << "evaluate: RMS horizontal " << *ev.rms_horizontal << " m, vertical " << *ev.rms_vertical
                  << " m\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
    std::string epochs;
    std::string out;
};

/// SVD attitude on every epoch's fixed baselines, next to the production
/// q-method on the same set and the truth when present.
int cmd_oracle_wahba(const OracleArgs& args)
{
    std::ifstream in = open_input(args.epochs);
    io::EpochReader reader(in);
    std::ofstream file;
    if (!args.out.empty()) file = open_output(args.out);
    std::ostream& out = args.out.empty() ? std::cout : file;

    out << "t,qx,qy,qz,qw,n_baselines,vs_qmethod_deg,vs_truth_deg\n";
    std::size_t rows = 0;
    double worst = 0.0;
    for (;;) {
        EpochRecord e;
        try {
            if (!reader.next(e)) break;
        } catch (const ValidationError& ex) {
            std::cerr << "oracle: skipped, " << ex.what() << '\n';
            continue;
        }
        std::vector<VectorObservation> fixed;
        for (const VectorObservation& b : e.baselines)
            if (b.fixed) fixed.push_back(b);
        std::vector<double> weights;
        double total = 0.0;
        for (const VectorObservation& b : fixed) total += b.w.norm();
        for (const VectorObservation& b : fixed) weights.push_back(b.w.norm() / total);

        char buf[256];
        std::snprintf(buf, sizeof buf, "%.3f,", e.t);
        out << buf;
        try {
            const UnitQuaternion q = oracle::wahba_svd(fixed, weights);
            std::snprintf(buf, sizeof buf, "%.12f,%.12f,%.12f,%.12f,%zu,", q.x(), q.y(), q.z(), q.w(), fixed.size());
            out << buf;
            const AttitudeSolution s = estimate_attitude(fixed);
            const double d = angle_between(q, *s.q) * kRadToDeg;
            worst = std::max(worst, d);
            std::snprintf(buf, sizeof buf, "%.3e,", d);
            out << buf;
            if (e.truth) {
                std::snprintf(buf, sizeof buf, "%.6f", angle_between(q, e.truth->attitude) * kRadToDeg);
                out << buf;
            }
        } catch (const Error&) {
            out << ",,,," << fixed.size() << ",,";
        }
        out << '\n';
        ++rows;
    }
    if (!args.out.empty()) close_checked(file, args.out);
    std::cerr << "oracle wahba-svd: " << rows << " epochs, max SVD vs q-method difference " << worst << " deg\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-antenna GNSS attitude/position pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a simulated epoch stream (and scan stream)");
    simulate->add_option("--config", sim.config, "Scenario JSON")->required();
    simulate->add_option("--seed", sim.seed, "Override the scenario seed");
    simulate->add_option("--out", sim.out, "Epoch stream output (JSON Lines)")->required();
    simulate->add_option("--scan", sim.scan, "Scan stream output (JSON Lines)");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Run the attitude/position pipeline on an epoch stream");
    estimate->add_option("--epochs", est.epochs, "Epoch stream (JSON Lines)")->required();
    estimate->add_option("--config", est.config, "Pipeline JSON");
    estimate->add_option("--poses", est.poses, "Pose CSV output");
    estimate->add_option("--metrics", est.metrics, "Metrics JSON output");
    estimate->add_option("--antennas", est.antennas, "Antenna subset, e.g. 1,3,5");
    estimate->add_flag("--no-multipath-feedback", est.no_feedback, "Disable multipath exclusion feedback");

    GeorefArgs geo;
    auto* georef = app.add_subcommand("georef", "Georeference a scan stream with a pose CSV");
    georef->add_option("--poses", geo.poses, "Pose CSV")->required();
    georef->add_option("--scan", geo.scan, "Scan stream (JSON Lines)")->required();
    georef->add_option("--calib", geo.calib, "Mount calibration JSON")->required();
    georef->add_option("--cloud", geo.cloud, "Cloud output (.xyz or .bin)")->required();

    EvaluateArgs eva;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a point cloud against surveyed reflectors");
    evaluate->add_option("--cloud", eva.cloud, "Point cloud (.xyz or .bin)")->required();
    evaluate->add_option("--reflectors", eva.reflectors, "Reflector JSON")->required();
    evaluate->add_option("--report", eva.report, "Report JSON output")->required();

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle", "Independent reference solvers");
    oracle->require_subcommand(1);
    auto* wahba = oracle->add_subcommand("wahba-svd", "SVD attitude per epoch, compared with the q-method");
    wahba->add_option("--epochs", orc.epochs, "Epoch stream (JSON Lines)")->required();
    wahba->add_option("--out", orc.out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*estimate) return cmd_estimate(est);
        if (*georef) return cmd_georef(geo);
        if (*evaluate) return cmd_evaluate(eva);
        if (*wahba) return cmd_oracle_wahba(orc);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateGeometryError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
