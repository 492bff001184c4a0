#include "mgp/pipeline.hpp"

#include "mgp/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace mgp {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void PipelineConfig::validate() const
{
    ransac.validate();
    multipath.validate();
    if (attitude_min_baselines < 2) throw ValidationError("attitude_min_baselines must be >= 2");
    std::set<AntennaId> seen;
    for (AntennaId id : active_antennas) {
        if (!layout.contains(id))
            throw ConfigurationError("active antenna " + std::to_string(id) + " is not in the layout");
        if (!seen.insert(id).second) throw ValidationError("active antenna " + std::to_string(id) + " listed twice");
    }
    if (!active_antennas.empty() && active_antennas.size() < 2)
        throw ValidationError("at least two active antennas are needed");
}

std::vector<AntennaId> PipelineConfig::antennas() const
{
    if (!active_antennas.empty()) {
        std::vector<AntennaId> ids = active_antennas;
        std::sort(ids.begin(), ids.end());
        return ids;
    }
    std::vector<AntennaId> ids;
    for (AntennaId id = 1; id <= layout.antenna_count(); ++id) ids.push_back(id);
    return ids;
}

int PipelineConfig::effective_min_inliers() const
{
    const int pairs = pair_count(static_cast<int>(antennas().size()));
    return std::max(attitude_min_baselines, std::min(ransac.min_inliers, pairs));
}

// ---------------------------------------------------------------------------
// Epoch processing
// ---------------------------------------------------------------------------

namespace {

struct Subset {
    std::vector<FixSolution> fixes;
    std::vector<VectorObservation> baselines;
};

Subset restrict(std::span<const FixSolution> fixes, std::span<const VectorObservation> baselines,
                const std::set<AntennaId>& active)
{
    Subset s;
    for (const FixSolution& f : fixes)
        if (active.count(f.antenna_id)) s.fixes.push_back(f);
    for (const VectorObservation& b : baselines)
        if (active.count(b.pair.from) && active.count(b.pair.to)) s.baselines.push_back(b);
    return s;
}

std::vector<SnrRow> restrict_rows(std::span<const SnrRow> rows, const std::set<AntennaId>& active)
{
    std::vector<SnrRow> out;
    for (const SnrRow& row : rows) {
        SnrRow r;
        r.sat_id = row.sat_id;
        r.snr.resize(row.snr.size());
        bool any = false;
        for (std::size_t i = 0; i < row.snr.size(); ++i) {
            if (row.snr[i] && active.count(static_cast<AntennaId>(i + 1))) {
                r.snr[i] = row.snr[i];
                any = true;
            }
        }
        if (any) out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

EpochResult process_epoch(const EpochRecord& epoch, const PipelineConfig& config)
{
    validate(epoch);
    const std::vector<AntennaId> ids = config.antennas();
    const std::set<AntennaId> active(ids.begin(), ids.end());

    EpochResult result;
    result.t = epoch.t;

    Subset data = restrict(epoch.fixes, epoch.baselines, active);
    result.multipath = detect_multipath(restrict_rows(epoch.snr_rows, active), config.multipath);

    if (config.multipath_feedback && epoch.truth && !result.multipath.excluded_sats.empty()) {
        const RequeryOutcome replay = requery_outcomes(epoch, result.multipath.excluded_sats);
        data = restrict(replay.fixes, replay.baselines, active);
        result.requeried = true;
    }

    std::vector<VectorObservation> fixed;
    for (const VectorObservation& b : data.baselines)
        if (b.fixed) fixed.push_back(b);

    if (static_cast<int>(fixed.size()) >= config.attitude_min_baselines) {
        RansacParams params = config.ransac;
        params.min_inliers = config.effective_min_inliers();
        params.seed = mix_seed(config.ransac.seed, std::bit_cast<std::uint64_t>(epoch.t));
        try {
            RobustAttitudeResult robust = ransac_attitude(fixed, params);
            result.attitude = std::move(robust.solution);
            result.outlier_pairs = std::move(robust.outlier_pairs);
        } catch (const InsufficientDataError&) {
        } catch (const DegenerateGeometryError&) {
        }
    }

    result.position = hybrid_position(data.fixes, result.attitude.q, config.layout);
    result.fixes = std::move(data.fixes);
    return result;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

void MetricsAccumulator::Sum::add(double x)
{
    // Neumaier summation.
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

void MetricsAccumulator::Moments::add(double x)
{
    s1.add(x);
    s2.add(x * x);
    ++n;
}

MetricsAccumulator::MetricsAccumulator(const PipelineConfig& config) : config_(config)
{
    for (AntennaId id : config_.antennas()) fixed_counts_[id] = 0;
}

void MetricsAccumulator::add(const EpochRecord& epoch, const EpochResult& result, const EpochResult& baseline)
{
    ++processed_;
    for (const FixSolution& f : baseline.fixes)
        if (f.status == FixStatus::FIXED && fixed_counts_.count(f.antenna_id)) ++fixed_counts_[f.antenna_id];
    if (baseline.position.available) ++hybrid_;
    if (result.position.available) ++hybrid_feedback_;
    if (result.attitude.available) ++attitude_;

    if (!epoch.truth) all_truth_ = false;
    if (result.attitude.available) {
        const EulerAngles est = euler_from_quat(*result.attitude.q);
        const std::array<double, 3> e{est.roll_deg, est.pitch_deg, est.yaw_deg};
        if (epoch.truth) {
            const EulerAngles tru = euler_from_quat(epoch.truth->attitude);
            const std::array<double, 3> t{tru.roll_deg, tru.pitch_deg, tru.yaw_deg};
            for (std::size_t i = 0; i < 3; ++i) att_err_[i].add(wrap_degrees(e[i] - t[i]));
        }
        for (std::size_t i = 0; i < 3; ++i) att_val_[i].add(e[i]);
    }
    if (result.position.available) {
        const Vec3 p = *result.position.p;
        for (int i = 0; i < 3; ++i) {
            if (epoch.truth) pos_err_[static_cast<std::size_t>(i)].add(1000.0 * (p[i] - epoch.truth->position[i]));
            pos_val_[static_cast<std::size_t>(i)].add(1000.0 * p[i]);
        }
    }

    if (epoch.truth) {
        for (const SatelliteAssessment& a : result.multipath.satellites) {
            const bool flagged = a.verdict == MultipathVerdict::MULTIPATH;
            const bool actual = epoch.truth->multipath_sats.count(a.sat_id) > 0;
            tp_ += flagged && actual;
            fp_ += flagged && !actual;
            fn_ += !flagged && actual;
        }
    }
}

namespace {

std::optional<double> percent(std::size_t count, std::size_t total)
{
    if (total == 0) return std::nullopt;
    return 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

MetricsReport MetricsAccumulator::report() const
{
    MetricsReport r;
    r.epochs_processed = processed_;
    r.epochs_skipped = skipped_;
    for (const auto& [id, count] : fixed_counts_) r.per_antenna_fix_rate[id] = percent(count, processed_);
    r.hybrid_fix_rate = percent(hybrid_, processed_);
    if (config_.multipath_feedback) r.hybrid_fix_rate_multipath = percent(hybrid_feedback_, processed_);
    r.attitude_availability = percent(attitude_, processed_);

    const bool truth = all_truth_ && processed_ > 0;
    r.sd_against_truth = truth;
    // Against truth: RMS of the error. Otherwise: spread about the mean.
    const auto spread = [truth](const Moments& m) {
        const double n = static_cast<double>(m.n);
        const double mean_sq = m.s2.value() / n;
        if (truth) return std::sqrt(mean_sq);
        const double mean = m.s1.value() / n;
        return std::sqrt(std::max(0.0, mean_sq - mean * mean));
    };
    const auto& att = truth ? att_err_ : att_val_;
    const auto& pos = truth ? pos_err_ : pos_val_;
    if (att[0].n > 0) r.attitude_sd_deg = EulerAngles{spread(att[0]), spread(att[1]), spread(att[2])};
    if (pos[0].n > 0) r.position_sd_mm = Vec3(spread(pos[0]), spread(pos[1]), spread(pos[2]));

    if (truth) {
        if (tp_ + fp_ > 0) r.multipath_precision = static_cast<double>(tp_) / static_cast<double>(tp_ + fp_);
        if (tp_ + fn_ > 0) r.multipath_recall = static_cast<double>(tp_) / static_cast<double>(tp_ + fn_);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Pose output and run loop
// ---------------------------------------------------------------------------

void write_pose_header(std::ostream& out)
{
    out << "t,E,N,U,qx,qy,qz,qw,n_fix,att_available\n";
}

void write_pose_row(std::ostream& out, const EpochResult& result)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.3f,", result.t);
    out << buf;
    if (result.position.available) {
        const Vec3& p = *result.position.p;
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,", p.x(), p.y(), p.z());
        out << buf;
    } else {
        out << ",,,";
    }
    if (result.attitude.available) {
        const UnitQuaternion& q = *result.attitude.q;
        std::snprintf(buf, sizeof buf, "%.12f,%.12f,%.12f,%.12f,", q.x(), q.y(), q.z(), q.w());
        out << buf;
    } else {
        out << ",,,,";
    }
    out << result.position.n_used << ',' << (result.attitude.available ? 1 : 0) << '\n';
}

MetricsReport run(const std::function<bool(EpochRecord&)>& next, const PipelineConfig& config,
                  std::ostream& poses, std::ostream& log)
{
    config.validate();
    PipelineConfig plain = config;
    plain.multipath_feedback = false;

    MetricsAccumulator metrics(config);
    write_pose_header(poses);
    double last_t = -std::numeric_limits<double>::infinity();
    std::size_t line = 0;
    for (;;) {
        EpochRecord epoch;
        ++line;
        try {
            if (!next(epoch)) break;
        } catch (const Error& e) {
            log << "epoch " << line << ": skipped, " << e.what() << '\n';
            metrics.add_skipped();
            continue;
        }
        if (!(epoch.t > last_t)) {
            log << "epoch " << line << ": skipped, time " << epoch.t << " does not increase\n";
            metrics.add_skipped();
            continue;
        }
        try {
            const EpochResult result = process_epoch(epoch, config);
            const EpochResult baseline = result.requeried ? process_epoch(epoch, plain) : result;
            write_pose_row(poses, result);
            metrics.add(epoch, result, baseline);
            last_t = epoch.t;
        } catch (const Error& e) {
            log << "epoch " << line << " (t=" << epoch.t << "): skipped, " << e.what() << '\n';
            metrics.add_skipped();
        }
    }
    return metrics.report();
}

MetricsReport run(std::span<const EpochRecord> epochs, const PipelineConfig& config, std::ostream& poses,
                  std::ostream& log)
{
    std::size_t i = 0;
    return run(
        [&](EpochRecord& out) {
            if (i >= epochs.size()) return false;
            out = epochs[i++];
            return true;
        },
        config, poses, log);
}

}  // namespace mgp
