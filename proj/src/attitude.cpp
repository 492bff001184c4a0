#include "mgp/attitude.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace mgp {

namespace {

constexpr double kDegenerateGap = 1e-9;
constexpr int kMaxSweeps = 60;

}  // namespace

void validate(const VectorObservation& obs)
{
    if (!obs.v.allFinite() || !obs.w.allFinite())
        throw ValidationError("baseline " + to_string(obs.pair) + " has non-finite components");
    if (!(obs.v.norm() > 0.0) || !(obs.w.norm() > 0.0))
        throw ValidationError("baseline " + to_string(obs.pair) + " has zero length");
    if (obs.pair.from == obs.pair.to)
        throw ValidationError("baseline " + to_string(obs.pair) + " joins an antenna to itself");
}

std::vector<double> baseline_weights(std::span<const VectorObservation> observations)
{
    if (observations.empty()) throw InsufficientDataError("no baseline observations");
    std::vector<double> weights;
    weights.reserve(observations.size());
    double total = 0.0;
    for (const auto& obs : observations) {
        validate(obs);
        weights.push_back(obs.w.norm());
        total += weights.back();
    }
    for (double& a : weights) a /= total;
    return weights;
}

Mat3 profile_matrix(std::span<const VectorObservation> observations, std::span<const double> weights)
{
    if (observations.size() != weights.size())
        throw ValidationError("observation and weight counts differ");
    Mat3 b = Mat3::Zero();
    for (std::size_t i = 0; i < observations.size(); ++i) {
        validate(observations[i]);
        b += weights[i] * observations[i].w.normalized() * observations[i].v.normalized().transpose();
    }
    return b;
}

Mat4 davenport_from_profile(const Mat3& b)
{
    const double sigma = b.trace();
    // Axial vector of B - B^T with the sign that makes q^T K q equal
    // sum a_i w_i^T R(q) v_i for the Hamilton matrix R(q).
    const Vec3 z(b(2, 1) - b(1, 2), b(0, 2) - b(2, 0), b(1, 0) - b(0, 1));

    Mat4 k;
    k.topLeftCorner<3, 3>() = b + b.transpose() - sigma * Mat3::Identity();
    k.topRightCorner<3, 1>() = z;
    k.bottomLeftCorner<1, 3>() = z.transpose();
    k(3, 3) = sigma;
    return k;
}

Mat4 davenport_matrix(std::span<const VectorObservation> observations, std::span<const double> weights)
{
    if (observations.size() < 2)
        throw InsufficientDataError("attitude needs at least two baselines, got " +
                                    std::to_string(observations.size()));
    return davenport_from_profile(profile_matrix(observations, weights));
}

double quadratic_gain(const Mat4& k, const UnitQuaternion& q)
{
    const Eigen::Vector4d c = q.coeffs();
    return c.dot(k * c);
}

SymmetricEigen4 jacobi_eigen(const Mat4& k)
{
    Mat4 a = k;
    Mat4 v = Mat4::Identity();
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

    SymmetricEigen4 out;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-17 * scale) break;
        out.sweeps = sweep + 1;

        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int r = 0; r < 4; ++r) {
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (int r = 0; r < 4; ++r) {
                    const double apr = a(p, r);
                    const double aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
                for (int r = 0; r < 4; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
    for (int i = 0; i < 4; ++i) {
        out.values[i] = a(order[i], order[i]);
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

MaxEigenpair solve_max_eigenpair(const Mat4& k)
{
    if (!k.allFinite()) throw ValidationError("Davenport matrix has non-finite entries");
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw ValidationError("Davenport matrix is not symmetric");

    const SymmetricEigen4 eig = jacobi_eigen(0.5 * (k + k.transpose()));
    if (eig.values[0] - eig.values[1] < kDegenerateGap * scale)
        throw DegenerateGeometryError("largest eigenvalue is not simple; attitude is unobservable");

    const Eigen::Vector4d q = eig.vectors.col(0);
    return {eig.values[0], UnitQuaternion::normalized(q[0], q[1], q[2], q[3])};
}

AttitudeSolution estimate_attitude(std::span<const VectorObservation> observations)
{
    if (observations.size() < 2)
        throw InsufficientDataError("attitude needs at least two baselines, got " +
                                    std::to_string(observations.size()));
    const std::vector<double> weights = baseline_weights(observations);
    const MaxEigenpair top = solve_max_eigenpair(davenport_matrix(observations, weights));

    AttitudeSolution sol;
    sol.q = top.q.conjugate();
    sol.lambda_max = top.lambda;
    sol.weights_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    sol.available = true;
    sol.used_observations.reserve(observations.size());
    for (const auto& obs : observations) sol.used_observations.push_back(obs.pair);
    return sol;
}

}  // namespace mgp
