/**
 * @file robust.hpp
 * @brief RANSAC rejection of wrong-fix baselines before attitude estimation.
 *
 * Hypotheses are q-method solutions from two non-collinear baselines; the
 * consensus is scored with the full-length residual |v - R_eb w| in meters so
 * the threshold can be read against an L1 ambiguity slip (~0.19 m).
 */

#ifndef MGP_ROBUST_HPP
#define MGP_ROBUST_HPP

#include "mgp/attitude.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mgp {

struct RansacParams {
    int max_iterations = 100;
    double inlier_threshold = 0.05;  ///< [m]
    int min_sample = 2;
    int min_inliers = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RobustAttitudeResult {
    AttitudeSolution solution;
    std::vector<AntennaPair> inlier_pairs;
    std::vector<AntennaPair> outlier_pairs;
    int iterations_used = 0;
};

/// |v - R(q) w| [m], q body -> ENU.
double baseline_residual(const VectorObservation& obs, const UnitQuaternion& q);

/// Samples whose body baselines are closer than this to (anti)parallel are skipped.
constexpr double kMinSampleAngleDeg = 5.0;

RobustAttitudeResult ransac_attitude(std::span<const VectorObservation> observations,
                                     const RansacParams& params);

}  // namespace mgp

#endif  // MGP_ROBUST_HPP
