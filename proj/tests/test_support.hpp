// Shared fixtures for the unit and acceptance tests.

#ifndef MGP_TEST_SUPPORT_HPP
#define MGP_TEST_SUPPORT_HPP

#include "mgp/attitude.hpp"
#include "mgp/core.hpp"
#include "mgp/random.hpp"

#include <random>
#include <vector>

namespace mgp::test {

/// Uniformly distributed rotation.
inline UnitQuaternion random_rotation(Rng& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    return UnitQuaternion::normalized(n(rng), n(rng), n(rng), n(rng));
}

inline Vec3 random_vec(Rng& rng, double sigma)
{
    return {gaussian(rng, sigma), gaussian(rng, sigma), gaussian(rng, sigma)};
}

/// All pair baselines of `layout` observed under attitude q (body -> ENU)
/// with per-axis Gaussian noise.
inline std::vector<VectorObservation> observe(const AntennaLayout& layout, const UnitQuaternion& q, double sigma,
                                              Rng& rng)
{
    std::vector<VectorObservation> out;
    for (const AntennaPair& pair : layout.all_pairs()) {
        VectorObservation o;
        o.pair = pair;
        o.w = layout.baseline(pair);
        o.v = q.rotate(o.w) + random_vec(rng, sigma);
        out.push_back(o);
    }
    return out;
}

/// Integer-cycle L1 slip along a random direction of the {-1, 0, 1}^3 lattice.
inline Vec3 random_slip(Rng& rng, int max_cycles = 3)
{
    std::uniform_int_distribution<int> axis(-1, 1);
    std::uniform_int_distribution<int> cycles(1, max_cycles);
    Vec3 d;
    do {
        d = Vec3(axis(rng), axis(rng), axis(rng));
    } while (d.isZero());
    return kL1Wavelength * cycles(rng) * d;
}

inline double deg(double rad) { return rad * kRadToDeg; }

}  // namespace mgp::test

#endif  // MGP_TEST_SUPPORT_HPP
