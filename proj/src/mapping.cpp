#include "mgp/mapping.hpp"

#include <algorithm>
#include <cmath>

namespace mgp {

GeoPoint georeference(const Pose& pose, const MountCalibration& calib, const ScanPoint& point, double t)
{
    GeoPoint g;
    g.p = pose.p + pose.q.rotate(calib.lever_arm + calib.boresight.rotate(point.p));
    g.t = t;
    g.reflector_flag = point.reflector_flag;
    return g;
}

PoseTable::PoseTable(std::vector<Pose> poses) : poses_(std::move(poses))
{
    for (std::size_t i = 1; i < poses_.size(); ++i)
        if (!(poses_[i].t > poses_[i - 1].t)) throw ValidationError("pose times must be strictly increasing");
}

const Pose* PoseTable::nearest(double t, double max_gap) const
{
    if (poses_.empty()) return nullptr;
    const auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                                     [](const Pose& p, double value) { return p.t < value; });
    const Pose* best = nullptr;
    double best_gap = max_gap;
    if (it != poses_.end() && std::abs(it->t - t) <= best_gap) {
        best = &*it;
        best_gap = std::abs(it->t - t);
    }
    if (it != poses_.begin()) {
        const auto prev = std::prev(it);
        if (std::abs(prev->t - t) <= best_gap && (best == nullptr || std::abs(prev->t - t) < best_gap))
            best = &*prev;
    }
    return best;
}

std::vector<GeoPoint> georeference_scans(std::span<const ScanLine> lines, const PoseTable& poses,
                                         const MountCalibration& calib, double max_pose_gap,
                                         GeoreferenceStats* stats)
{
    GeoreferenceStats local;
    std::vector<GeoPoint> cloud;
    for (const ScanLine& line : lines) {
        local.points_in += line.points.size();
        const Pose* pose = poses.nearest(line.t, max_pose_gap);
        if (pose == nullptr) {
            local.points_dropped += line.points.size();
            ++local.lines_dropped;
            continue;
        }
        for (const ScanPoint& pt : line.points) cloud.push_back(georeference(*pose, calib, pt, line.t));
    }
    local.points_out = cloud.size();
    if (stats) *stats = local;
    return cloud;
}

ReflectorEvaluation evaluate_reflectors(std::span<const GeoPoint> cloud, std::span<const Vec3> truth_reflectors,
                                        double cluster_radius, int min_hits)
{
    if (!(cluster_radius > 0.0)) throw ValidationError("cluster radius must be positive");
    if (min_hits < 1) throw ValidationError("min_hits must be >= 1");

    ReflectorEvaluation out;
    double sum_h2 = 0.0;
    double sum_v2 = 0.0;
    int resolved = 0;
    for (const Vec3& truth : truth_reflectors) {
        ReflectorResult r;
        r.truth = truth;
        Vec3 sum = Vec3::Zero();
        for (const GeoPoint& g : cloud) {
            if (!g.reflector_flag) continue;
            if ((g.p - truth).norm() > cluster_radius) continue;
            sum += g.p;
            ++r.hits;
        }
        if (r.hits >= min_hits) {
            r.resolved = true;
            r.estimate = sum / static_cast<double>(r.hits);
            r.error = *r.estimate - truth;
            sum_h2 += r.error->x() * r.error->x() + r.error->y() * r.error->y();
            sum_v2 += r.error->z() * r.error->z();
            ++resolved;
        } else {
            ++out.unresolved;
        }
        out.reflectors.push_back(std::move(r));
    }
    if (resolved > 0) {
        out.rms_horizontal = std::sqrt(sum_h2 / resolved);
        out.rms_vertical = std::sqrt(sum_v2 / resolved);
    }
    return out;
}

}  // namespace mgp
