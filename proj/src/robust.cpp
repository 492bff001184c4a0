#include "mgp/robust.hpp"

#include "mgp/random.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace mgp {

void RansacParams::validate() const
{
    if (max_iterations < 1) throw ValidationError("ransac max_iterations must be >= 1");
    if (!(inlier_threshold > 0.0)) throw ValidationError("ransac inlier_threshold must be > 0");
    if (min_sample != 2) throw ValidationError("ransac min_sample must be 2");
    if (min_inliers < 2) throw ValidationError("ransac min_inliers must be >= 2");
}

double baseline_residual(const VectorObservation& obs, const UnitQuaternion& q)
{
    return (obs.v - q.rotate(obs.w)).norm();
}

namespace {

bool near_collinear(const Vec3& a, const Vec3& b)
{
    const double s = a.cross(b).norm() / (a.norm() * b.norm());
    return s < std::sin(kMinSampleAngleDeg * kDegToRad);
}

struct Consensus {
    std::vector<std::size_t> inliers;
    double residual_sum = 0.0;
};

Consensus score(std::span<const VectorObservation> observations, const UnitQuaternion& q, double threshold)
{
    Consensus c;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const double r = baseline_residual(observations[i], q);
        if (r <= threshold) {
            c.inliers.push_back(i);
            c.residual_sum += r;
        }
    }
    return c;
}

}  // namespace

RobustAttitudeResult ransac_attitude(std::span<const VectorObservation> observations,
                                     const RansacParams& params)
{
    params.validate();
    const std::size_t n = observations.size();
    if (n < static_cast<std::size_t>(params.min_sample))
        throw InsufficientDataError("ransac needs at least 2 baselines, got " + std::to_string(n));
    for (const auto& obs : observations) validate(obs);

    Rng rng(params.seed);
    std::uniform_int_distribution<std::size_t> first_dist(0, n - 1);
    std::uniform_int_distribution<std::size_t> second_dist(0, n - 2);

    Consensus best;
    bool have_best = false;
    int iterations = 0;
    const long max_attempts = 10L * params.max_iterations;

    for (long attempt = 0; attempt < max_attempts && iterations < params.max_iterations; ++attempt) {
        const std::size_t i = first_dist(rng);
        std::size_t j = second_dist(rng);
        if (j >= i) ++j;
        if (near_collinear(observations[i].w, observations[j].w)) continue;

        const std::array<VectorObservation, 2> sample{observations[i], observations[j]};
        UnitQuaternion q;
        try {
            q = *estimate_attitude(sample).q;
        } catch (const DegenerateGeometryError&) {
            continue;
        }
        ++iterations;

        Consensus c = score(observations, q, params.inlier_threshold);
        const bool better = !have_best || c.inliers.size() > best.inliers.size() ||
                            (c.inliers.size() == best.inliers.size() && c.residual_sum < best.residual_sum);
        if (better) {
            best = std::move(c);
            have_best = true;
        }
    }

    if (!have_best) throw DegenerateGeometryError("every ransac sample was degenerate");

    RobustAttitudeResult result;
    result.iterations_used = iterations;
    std::vector<bool> is_inlier(n, false);
    for (std::size_t idx : best.inliers) is_inlier[idx] = true;
    std::vector<VectorObservation> inlier_obs;
    for (std::size_t k = 0; k < n; ++k) {
        if (is_inlier[k]) {
            result.inlier_pairs.push_back(observations[k].pair);
            inlier_obs.push_back(observations[k]);
        } else {
            result.outlier_pairs.push_back(observations[k].pair);
        }
    }

    if (best.inliers.size() < static_cast<std::size_t>(params.min_inliers)) return result;
    try {
        result.solution = estimate_attitude(inlier_obs);
    } catch (const Error&) {
        result.solution = AttitudeSolution{};
    }
    return result;
}

}  // namespace mgp
