#include "mgp/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mgp {

namespace {

constexpr double kUnitTolerance = 1e-9;

bool finite4(double a, double b, double c, double d)
{
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
}

}  // namespace

std::string_view to_string(FrameTag tag)
{
    return tag == FrameTag::ENU ? "ENU" : "BODY";
}

FrameTag frame_from_string(std::string_view name)
{
    if (name == "ENU") return FrameTag::ENU;
    if (name == "BODY") return FrameTag::BODY;
    throw ValidationError("unknown frame tag '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// UnitQuaternion
// ---------------------------------------------------------------------------

UnitQuaternion::UnitQuaternion(double x, double y, double z, double w)
{
    // q and -q are the same rotation; keep w >= 0, and on w == 0 make the
    // first nonzero vector component positive.
    bool flip = w < 0.0;
    if (w == 0.0) {
        if (x != 0.0)
            flip = x < 0.0;
        else if (y != 0.0)
            flip = y < 0.0;
        else
            flip = z < 0.0;
    }
    const double s = flip ? -1.0 : 1.0;
    x_ = s * x;
    y_ = s * y;
    z_ = s * z;
    w_ = s * w;
}

UnitQuaternion UnitQuaternion::from_components(double x, double y, double z, double w)
{
    if (!finite4(x, y, z, w)) throw ValidationError("quaternion has non-finite components");
    const double n = std::sqrt(x * x + y * y + z * z + w * w);
    if (std::abs(n - 1.0) > kUnitTolerance) {
        std::ostringstream os;
        os << "quaternion norm " << n << " is not 1 within " << kUnitTolerance;
        throw ValidationError(os.str());
    }
    return {x, y, z, w};
}

UnitQuaternion UnitQuaternion::normalized(double x, double y, double z, double w)
{
    if (!finite4(x, y, z, w)) throw ValidationError("quaternion has non-finite components");
    const double n = std::sqrt(x * x + y * y + z * z + w * w);
    if (n < 1e-300) throw ValidationError("cannot normalize a zero quaternion");
    return {x / n, y / n, z / n, w / n};
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad)
{
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("rotation axis must be nonzero");
    const Vec3 u = axis / n;
    const double s = std::sin(0.5 * angle_rad);
    return normalized(u.x() * s, u.y() * s, u.z() * s, std::cos(0.5 * angle_rad));
}

UnitQuaternion UnitQuaternion::from_rotation_vector(const Vec3& rotvec)
{
    const double angle = rotvec.norm();
    if (angle < 1e-300) return {};
    return from_axis_angle(rotvec, angle);
}

UnitQuaternion UnitQuaternion::conjugate() const
{
    return {-x_, -y_, -z_, w_};
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const
{
    // v' = v + 2 u x (u x v + w v)
    const Vec3 u(x_, y_, z_);
    const Vec3 t = 2.0 * u.cross(v);
    return v + w_ * t + u.cross(t);
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b)
{
    const double w = a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_;
    const double x = a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_;
    const double y = a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_;
    const double z = a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_;
    return UnitQuaternion::normalized(x, y, z, w);
}

double angle_between(const UnitQuaternion& a, const UnitQuaternion& b)
{
    const UnitQuaternion d = a.conjugate() * b;
    const double vn = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
    return 2.0 * std::atan2(vn, std::abs(d.w()));
}

// ---------------------------------------------------------------------------
// RotationMatrix
// ---------------------------------------------------------------------------

RotationMatrix RotationMatrix::from_matrix(const Mat3& m)
{
    if (!m.allFinite()) throw ValidationError("rotation matrix has non-finite entries");
    const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > kUnitTolerance) throw ValidationError("matrix is not orthogonal");
    if (std::abs(m.determinant() - 1.0) > kUnitTolerance)
        throw ValidationError("matrix determinant is not +1");
    return RotationMatrix(m);
}

RotationMatrix RotationMatrix::transpose() const
{
    return RotationMatrix(m_.transpose());
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const
{
    return RotationMatrix(m_ * other.m_);
}

RotationMatrix quat_to_matrix(const UnitQuaternion& q)
{
    const double x = q.x(), y = q.y(), z = q.z(), w = q.w();
    Mat3 r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w),
         2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w),
         2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y);
    return RotationMatrix::from_matrix(r);
}

UnitQuaternion matrix_to_quat(const RotationMatrix& rot)
{
    const Mat3& r = rot.matrix();
    const double tr = r.trace();
    const double d0 = r(0, 0), d1 = r(1, 1), d2 = r(2, 2);

    double x, y, z, w;
    if (tr >= d0 && tr >= d1 && tr >= d2) {
        const double s = 2.0 * std::sqrt(1.0 + tr);
        w = 0.25 * s;
        x = (r(2, 1) - r(1, 2)) / s;
        y = (r(0, 2) - r(2, 0)) / s;
        z = (r(1, 0) - r(0, 1)) / s;
    } else if (d0 >= d1 && d0 >= d2) {
        const double s = 2.0 * std::sqrt(1.0 + d0 - d1 - d2);
        x = 0.25 * s;
        w = (r(2, 1) - r(1, 2)) / s;
        y = (r(0, 1) + r(1, 0)) / s;
        z = (r(0, 2) + r(2, 0)) / s;
    } else if (d1 >= d2) {
        const double s = 2.0 * std::sqrt(1.0 + d1 - d0 - d2);
        y = 0.25 * s;
        w = (r(0, 2) - r(2, 0)) / s;
        x = (r(0, 1) + r(1, 0)) / s;
        z = (r(1, 2) + r(2, 1)) / s;
    } else {
        const double s = 2.0 * std::sqrt(1.0 + d2 - d0 - d1);
        z = 0.25 * s;
        w = (r(1, 0) - r(0, 1)) / s;
        x = (r(0, 2) + r(2, 0)) / s;
        y = (r(1, 2) + r(2, 1)) / s;
    }
    return UnitQuaternion::normalized(x, y, z, w);
}

EulerAngles euler_from_quat(const UnitQuaternion& q)
{
    const double x = q.x(), y = q.y(), z = q.z(), w = q.w();
    const double sin_pitch = 2.0 * (w * y - z * x);

    EulerAngles e;
    if (std::abs(sin_pitch) >= 1.0 - 1e-12) {
        e.pitch_deg = std::copysign(90.0, sin_pitch);
        e.roll_deg = 0.0;
        e.yaw_deg = wrap_degrees(2.0 * std::atan2(z, w) * kRadToDeg);
        return e;
    }
    e.roll_deg = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y)) * kRadToDeg;
    e.pitch_deg = std::asin(sin_pitch) * kRadToDeg;
    e.yaw_deg = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)) * kRadToDeg;
    return e;
}

UnitQuaternion quat_from_euler(const EulerAngles& e)
{
    const UnitQuaternion qz = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), e.yaw_deg * kDegToRad);
    const UnitQuaternion qy = UnitQuaternion::from_axis_angle(Vec3::UnitY(), e.pitch_deg * kDegToRad);
    const UnitQuaternion qx = UnitQuaternion::from_axis_angle(Vec3::UnitX(), e.roll_deg * kDegToRad);
    return qz * qy * qx;
}

double wrap_degrees(double deg)
{
    double r = std::fmod(deg, 360.0);
    if (r <= -180.0) r += 360.0;
    if (r > 180.0) r -= 360.0;
    return r;
}

// ---------------------------------------------------------------------------
// AntennaLayout
// ---------------------------------------------------------------------------

std::string to_string(const AntennaPair& pair)
{
    return std::to_string(pair.from) + "-" + std::to_string(pair.to);
}

AntennaLayout::AntennaLayout(std::vector<Vec3> body_positions) : positions_(std::move(body_positions))
{
    if (positions_.size() < 2) throw ValidationError("antenna layout needs at least 2 antennas");
    for (const Vec3& p : positions_)
        if (!p.allFinite()) throw ValidationError("antenna position is not finite");

    for (std::size_t i = 0; i < positions_.size(); ++i)
        for (std::size_t j = i + 1; j < positions_.size(); ++j)
            if ((positions_[i] - positions_[j]).norm() < 1e-6)
                throw ValidationError("antennas " + std::to_string(i + 1) + " and " +
                                      std::to_string(j + 1) + " share a position");

    // Need two linearly independent baselines for a 3D attitude.
    const Vec3 first = positions_[1] - positions_[0];
    bool independent = false;
    for (std::size_t k = 2; k < positions_.size() && !independent; ++k) {
        const Vec3 other = positions_[k] - positions_[0];
        independent = first.cross(other).norm() > 1e-9 * first.norm() * other.norm();
    }
    if (!independent) throw ValidationError("antenna layout is collinear; attitude is unobservable");
}

AntennaLayout AntennaLayout::hexagon(double circumradius, int count)
{
    if (count < 3) throw ValidationError("polygon layout needs at least 3 antennas");
    if (!(circumradius > 0.0)) throw ValidationError("circumradius must be positive");
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double a = 2.0 * kPi * i / count;
        pts.emplace_back(circumradius * std::cos(a), circumradius * std::sin(a), 0.0);
    }
    return AntennaLayout(std::move(pts));
}

const Vec3& AntennaLayout::position(AntennaId id) const
{
    if (!contains(id)) throw ConfigurationError("antenna id " + std::to_string(id) + " is not in the layout");
    return positions_[static_cast<std::size_t>(id - 1)];
}

Vec3 AntennaLayout::baseline(const AntennaPair& pair) const
{
    return position(pair.to) - position(pair.from);
}

std::vector<AntennaPair> AntennaLayout::all_pairs() const
{
    std::vector<AntennaPair> pairs;
    for (AntennaId i = 1; i <= antenna_count(); ++i)
        for (AntennaId j = i + 1; j <= antenna_count(); ++j) pairs.push_back({i, j});
    return pairs;
}

}  // namespace mgp
