/**
 * @file mapping.hpp
 * @brief Direct georeferencing of scanner points and reflector-based accuracy checks.
 */

#ifndef MGP_MAPPING_HPP
#define MGP_MAPPING_HPP

#include "mgp/core.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mgp {

struct MountCalibration {
    Vec3 lever_arm = Vec3::Zero();  ///< scanner origin in body frame [m]
    UnitQuaternion boresight;       ///< scanner -> body
};

/// Platform pose at time t; q is body -> ENU.
struct Pose {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    UnitQuaternion q;
};

struct ScanPoint {
    Vec3 p = Vec3::Zero();  ///< scanner frame [m]
    bool reflector_flag = false;
};

/// All points of one scanner revolution, stamped with a single time.
struct ScanLine {
    double t = 0.0;
    std::vector<ScanPoint> points;
    /// Simulator-only truth, parallel to `points` when present.
    std::vector<Vec3> truth_world;
    std::vector<int> truth_reflector;  ///< reflector index or -1
};

struct GeoPoint {
    Vec3 p = Vec3::Zero();  ///< ENU [m]
    double t = 0.0;
    bool reflector_flag = false;
};

/// Scan lines further than this from every pose are dropped [s].
constexpr double kDefaultMaxPoseGap = 0.06;

/// p_world = pose.p + R_eb (lever_arm + R_boresight * scan_point)
GeoPoint georeference(const Pose& pose, const MountCalibration& calib, const ScanPoint& point, double t);

/// Nearest-in-time pose lookup over a time-sorted pose list.
class PoseTable {
public:
    explicit PoseTable(std::vector<Pose> poses);

    /// nullptr when no pose lies within max_gap of t.
    const Pose* nearest(double t, double max_gap) const;

    std::size_t size() const { return poses_.size(); }

private:
    std::vector<Pose> poses_;
};

struct GeoreferenceStats {
    std::size_t points_in = 0;
    std::size_t points_out = 0;
    std::size_t points_dropped = 0;
    std::size_t lines_dropped = 0;
};

std::vector<GeoPoint> georeference_scans(std::span<const ScanLine> lines, const PoseTable& poses,
                                         const MountCalibration& calib, double max_pose_gap,
                                         GeoreferenceStats* stats = nullptr);

struct ReflectorResult {
    Vec3 truth = Vec3::Zero();
    int hits = 0;
    bool resolved = false;
    std::optional<Vec3> estimate;
    std::optional<Vec3> error;  ///< estimate - truth
};

struct ReflectorEvaluation {
    std::vector<ReflectorResult> reflectors;
    std::optional<double> rms_horizontal;  ///< [m]; empty when nothing resolved
    std::optional<double> rms_vertical;    ///< [m]
    int unresolved = 0;
};

/// Each reflector estimate is the centroid of flagged points within
/// cluster_radius of its surveyed position; reflectors with fewer than
/// min_hits points are reported unresolved and left out of the RMS.
ReflectorEvaluation evaluate_reflectors(std::span<const GeoPoint> cloud, std::span<const Vec3> truth_reflectors,
                                        double cluster_radius = 0.5, int min_hits = 3);

}  // namespace mgp

#endif  // MGP_MAPPING_HPP
