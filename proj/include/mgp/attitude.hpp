/**
 * @file attitude.hpp
 * @brief Davenport q-method attitude from weighted baseline vectors.
 *
 * Each observation pairs a baseline measured in ENU (v) with the same
 * baseline in the body frame (w). Both are unit-normalized internally; the
 * baseline length enters only through the weight a_i = |w_i| / sum |w_j|.
 * The gain g(q) = q^T K q = sum a_i w_i^T R(q) v_i is maximized by the
 * eigenvector of the largest eigenvalue of K; that eigenvector is the
 * ENU -> body rotation, and estimate_attitude() returns its inverse.
 */

#ifndef MGP_ATTITUDE_HPP
#define MGP_ATTITUDE_HPP

#include "mgp/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mgp {

struct VectorObservation {
    Vec3 v = Vec3::Zero();  ///< measured baseline, ENU [m]
    Vec3 w = Vec3::Zero();  ///< reference baseline, body [m]
    AntennaPair pair;
    bool fixed = true;      ///< RTK ambiguity status of this baseline
};

/// Throws ValidationError when norms are zero/non-finite or the pair ids coincide.
void validate(const VectorObservation& obs);

struct AttitudeSolution {
    std::optional<UnitQuaternion> q;  ///< body -> ENU; empty when unavailable
    double lambda_max = 0.0;
    double weights_sum = 0.0;
    std::vector<AntennaPair> used_observations;
    bool available = false;
};

/// a_i = |w_i| / sum_j |w_j|.
std::vector<double> baseline_weights(std::span<const VectorObservation> observations);

/// B = sum a_i w_i v_i^T over unit vectors.
Mat3 profile_matrix(std::span<const VectorObservation> observations, std::span<const double> weights);

/// K = [[B + B^T - tr(B) I, z], [z^T, tr(B)]], quaternion ordering (x, y, z, w).
Mat4 davenport_from_profile(const Mat3& profile);

/// Requires at least two observations with matching weights.
Mat4 davenport_matrix(std::span<const VectorObservation> observations, std::span<const double> weights);

/// q^T K q with q ordered (x, y, z, w).
double quadratic_gain(const Mat4& k, const UnitQuaternion& q);

struct SymmetricEigen4 {
    Eigen::Vector4d values;   ///< descending
    Mat4 vectors;             ///< column i belongs to values[i]
    int sweeps = 0;
};

/// Cyclic Jacobi eigen-decomposition of a symmetric 4x4 matrix.
SymmetricEigen4 jacobi_eigen(const Mat4& k);

struct MaxEigenpair {
    double lambda = 0.0;
    UnitQuaternion q;
};

/// Largest eigenpair; throws DegenerateGeometryError when the top
/// eigenvalue is not simple (gap < 1e-9).
MaxEigenpair solve_max_eigenpair(const Mat4& k);

/// Attitude (body -> ENU) from at least two non-collinear observations.
AttitudeSolution estimate_attitude(std::span<const VectorObservation> observations);

}  // namespace mgp

#endif  // MGP_ATTITUDE_HPP
