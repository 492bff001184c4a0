#include "oracles.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <random>

namespace mgp::oracle {

UnitQuaternion wahba_svd(std::span<const VectorObservation> observations, std::span<const double> weights)
{
    if (observations.size() < 2) throw InsufficientDataError("wahba_svd needs at least two observations");
    if (weights.size() != observations.size()) throw ValidationError("one weight per observation is required");

    // Maximize tr(R^T M) with M = sum a v w^T (v in ENU, w in body).
    Mat3 m = Mat3::Zero();
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Vec3 v = observations[i].v.normalized();
        const Vec3 w = observations[i].w.normalized();
        m += weights[i] * v * w.transpose();
    }

    const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d s = svd.singularValues();
    if (!(s(1) > 1e-9 * std::max(1.0, s(0))))
        throw DegenerateGeometryError("observations span fewer than two directions");

    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    const double d = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Mat3 r = u * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() * v.transpose();

    const Eigen::Quaterniond q(r);
    return UnitQuaternion::normalized(q.x(), q.y(), q.z(), q.w());
}

GainScanResult gain_scan(const Mat4& k, std::size_t n_samples, std::uint64_t seed)
{
    if (n_samples < 10000) throw ValidationError("gain_scan needs at least 10^4 samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    GainScanResult best;
    best.gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_samples; ++i) {
        Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
        const double n = q.norm();
        if (n < 1e-12) continue;
        q /= n;
        const double gain = q.dot(k * q);
        if (gain > best.gain) {
            best.gain = gain;
            best.q = UnitQuaternion::normalized(q(0), q(1), q(2), q(3));
        }
    }
    return best;
}

double mapping_error_budget(double sigma_pos, double sigma_att_rad, double altitude)
{
    if (sigma_pos < 0.0 || sigma_att_rad < 0.0 || altitude < 0.0)
        throw ValidationError("mapping_error_budget inputs must be nonnegative");
    const double angular = altitude * sigma_att_rad;
    return std::sqrt(sigma_pos * sigma_pos + angular * angular);
}

}  // namespace mgp::oracle
