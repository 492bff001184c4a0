/**
 * @file pipeline.hpp
 * @brief Per-epoch processing (multipath -> attitude -> position) and run metrics.
 */

#ifndef MGP_PIPELINE_HPP
#define MGP_PIPELINE_HPP

#include "mgp/multipath.hpp"
#include "mgp/positioning.hpp"
#include "mgp/robust.hpp"
#include "mgp/simulator.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mgp {

struct PipelineConfig {
    AntennaLayout layout = AntennaLayout::hexagon();
    RansacParams ransac;
    MultipathParams multipath;
    bool multipath_feedback = true;
    int attitude_min_baselines = 2;
    /// Antennas to use; empty means every antenna of the layout.
    std::vector<AntennaId> active_antennas;
    /// Default output files; command-line paths take precedence.
    std::string poses_path;
    std::string metrics_path;

    void validate() const;
    std::vector<AntennaId> antennas() const;

    /// RANSAC consensus size required for this antenna subset: the
    /// configured min_inliers, capped by the number of available pairs,
    /// and never below attitude_min_baselines.
    int effective_min_inliers() const;
};

struct EpochResult {
    double t = 0.0;
    AttitudeSolution attitude;
    PositionSolution position;
    MultipathReport multipath;
    std::vector<AntennaPair> outlier_pairs;
    std::vector<FixSolution> fixes;  ///< after subsetting (and re-query when applied)
    bool requeried = false;
};

/// One epoch: (1) multipath detection on the SNR rows; (2) with feedback
/// enabled and a truth channel present, the fix/baseline outcomes are
/// re-queried with the excluded satellites removed; (3) RANSAC attitude
/// from the fixed baselines; (4) hybrid position with that attitude.
/// Throws ValidationError for malformed epochs.
EpochResult process_epoch(const EpochRecord& epoch, const PipelineConfig& config);

/// Percentages are in [0, 100]; empty optionals mean "undefined".
struct MetricsReport {
    std::size_t epochs_processed = 0;
    std::size_t epochs_skipped = 0;
    std::map<AntennaId, std::optional<double>> per_antenna_fix_rate;
    std::optional<double> hybrid_fix_rate;            ///< without multipath feedback
    std::optional<double> hybrid_fix_rate_multipath;  ///< with feedback; empty if disabled
    std::optional<double> attitude_availability;
    std::optional<EulerAngles> attitude_sd_deg;
    std::optional<Vec3> position_sd_mm;
    bool sd_against_truth = false;
    /// Detection scores against simulator labels (micro-averaged over epochs).
    std::optional<double> multipath_precision;
    std::optional<double> multipath_recall;
};

/// Streaming accumulator behind run(), with Neumaier-compensated sums.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(const PipelineConfig& config);

    /// `baseline` is the same epoch processed without multipath feedback.
    void add(const EpochRecord& epoch, const EpochResult& result, const EpochResult& baseline);
    void add_skipped() { ++skipped_; }

    MetricsReport report() const;

private:
    struct Sum {
        double sum = 0.0;
        double comp = 0.0;
        void add(double x);
        double value() const { return sum + comp; }
    };
    struct Moments {
        Sum s1;
        Sum s2;
        std::size_t n = 0;
        void add(double x);
    };

    PipelineConfig config_;
    std::size_t processed_ = 0;
    std::size_t skipped_ = 0;
    std::map<AntennaId, std::size_t> fixed_counts_;
    std::size_t hybrid_ = 0;
    std::size_t hybrid_feedback_ = 0;
    std::size_t attitude_ = 0;
    bool all_truth_ = true;
    std::array<Moments, 3> att_err_;
    std::array<Moments, 3> att_val_;
    std::array<Moments, 3> pos_err_;
    std::array<Moments, 3> pos_val_;
    std::size_t tp_ = 0;
    std::size_t fp_ = 0;
    std::size_t fn_ = 0;
};

/// Writes the pose CSV header.
void write_pose_header(std::ostream& out);
void write_pose_row(std::ostream& out, const EpochResult& result);

/// Processes a stream in order. Malformed epochs and epochs whose time does not increase
/// are skipped with a diagnostic on `log` and never abort the run.
/// `next` returns false at end of stream.
MetricsReport run(const std::function<bool(EpochRecord&)>& next, const PipelineConfig& config,
                  std::ostream& poses, std::ostream& log);

MetricsReport run(std::span<const EpochRecord> epochs, const PipelineConfig& config, std::ostream& poses,
                  std::ostream& log);

}  // namespace mgp

#endif  // MGP_PIPELINE_HPP
