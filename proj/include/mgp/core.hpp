/**
 * @file core.hpp
 * @brief Rotation algebra and the shared domain types.
 *
 * Conventions used throughout the library:
 *   - ENU is a local East-North-Up frame anchored at a scenario origin.
 *   - BODY is the platform frame (x forward, y left, z up), origin at the
 *     platform center.
 *   - Quaternions are scalar-last (x, y, z, w) Hamilton quaternions with the
 *     canonical sign w >= 0. rotate(q, v) == quat_to_matrix(q) * v.
 *   - The stored attitude is always body -> ENU (R_eb).
 */

#ifndef MGP_CORE_HPP
#define MGP_CORE_HPP

#include <Eigen/Dense>

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mgp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

/// Single-frequency GPS L1 carrier wavelength [m]; the unit of an ambiguity slip.
constexpr double kL1Wavelength = 0.19;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input violates a type invariant (non-unit quaternion, out-of-range SNR...).
struct ValidationError : Error {
    using Error::Error;
};

/// Not enough observations for the requested estimate.
struct InsufficientDataError : Error {
    using Error::Error;
};

/// Observation geometry does not determine the estimate (e.g. collinear baselines).
struct DegenerateGeometryError : Error {
    using Error::Error;
};

/// Configuration references something that does not exist.
struct ConfigurationError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

enum class FrameTag { ENU, BODY };

std::string_view to_string(FrameTag tag);
FrameTag frame_from_string(std::string_view name);

/// A vector together with the frame it is expressed in.
struct FramedVector {
    Vec3 value = Vec3::Zero();
    FrameTag frame = FrameTag::ENU;
};

// ---------------------------------------------------------------------------
// Rotations
// ---------------------------------------------------------------------------

class UnitQuaternion {
public:
    /// Identity rotation.
    UnitQuaternion() = default;

    /// Validating constructor: |q| must be 1 within 1e-9. Result is canonical-sign.
    static UnitQuaternion from_components(double x, double y, double z, double w);

    /// Normalizes an arbitrary nonzero 4-vector.
    static UnitQuaternion normalized(double x, double y, double z, double w);

    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);

    /// Rotation vector (axis * angle, radians).
    static UnitQuaternion from_rotation_vector(const Vec3& rotvec);

    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    double w() const { return w_; }

    /// (x, y, z, w)
    Eigen::Vector4d coeffs() const { return {x_, y_, z_, w_}; }

    UnitQuaternion conjugate() const;
    Vec3 rotate(const Vec3& v) const;

    friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);
    friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

private:
    UnitQuaternion(double x, double y, double z, double w);

    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
    double w_ = 1.0;
};

/// Angle of the relative rotation between a and b, radians in [0, pi].
double angle_between(const UnitQuaternion& a, const UnitQuaternion& b);

class RotationMatrix {
public:
    RotationMatrix() = default;

    /// Validates orthogonality and det = +1 within 1e-9.
    static RotationMatrix from_matrix(const Mat3& m);

    const Mat3& matrix() const { return m_; }
    RotationMatrix transpose() const;
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    RotationMatrix operator*(const RotationMatrix& other) const;

private:
    explicit RotationMatrix(const Mat3& m) : m_(m) {}

    Mat3 m_ = Mat3::Identity();
};

RotationMatrix quat_to_matrix(const UnitQuaternion& q);

/// Shepperd's method; returns the canonical-sign quaternion.
UnitQuaternion matrix_to_quat(const RotationMatrix& r);

struct EulerAngles {
    double roll_deg = 0.0;
    double pitch_deg = 0.0;
    double yaw_deg = 0.0;
};

/// Intrinsic Z-Y-X decomposition. At gimbal lock (|pitch| = 90 deg) roll is
/// reported as 0 and the whole yaw-roll combination goes into yaw.
EulerAngles euler_from_quat(const UnitQuaternion& q);

/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
UnitQuaternion quat_from_euler(const EulerAngles& e);

/// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

// ---------------------------------------------------------------------------
// Antennas
// ---------------------------------------------------------------------------

/// Antenna ids are 1-based.
using AntennaId = int;

/// Ordered antenna pair; the baseline points from `from` to `to`.
struct AntennaPair {
    AntennaId from = 0;
    AntennaId to = 0;

    auto operator<=>(const AntennaPair&) const = default;
};

std::string to_string(const AntennaPair& pair);

class AntennaLayout {
public:
    /// Positions in the body frame, index i holds antenna id i + 1.
    explicit AntennaLayout(std::vector<Vec3> body_positions);

    /// Regular polygon in the body x-y plane, antenna 1 on the +x axis.
    static AntennaLayout hexagon(double circumradius = 0.9, int count = 6);

    int antenna_count() const { return static_cast<int>(positions_.size()); }
    bool contains(AntennaId id) const { return id >= 1 && id <= antenna_count(); }

    /// Throws ConfigurationError for unknown ids.
    const Vec3& position(AntennaId id) const;

    /// b_to - b_from, body frame.
    Vec3 baseline(const AntennaPair& pair) const;

    /// Every (i, j) with i < j, in lexicographic order.
    std::vector<AntennaPair> all_pairs() const;

    const std::vector<Vec3>& body_positions() const { return positions_; }

private:
    std::vector<Vec3> positions_;
};

/// Number of unordered pairs among n antennas.
constexpr int pair_count(int n) { return n * (n - 1) / 2; }

}  // namespace mgp

#endif  // MGP_CORE_HPP
