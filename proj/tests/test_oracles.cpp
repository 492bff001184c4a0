#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgp/attitude.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace mgp;
using doctest::Approx;

namespace {

std::vector<double> weights_of(std::span<const VectorObservation> obs)
{
    double total = 0.0;
    for (const auto& o : obs) total += o.w.norm();
    std::vector<double> w;
    for (const auto& o : obs) w.push_back(o.w.norm() / total);
    return w;
}

}  // namespace

TEST_CASE("wahba_svd: identity and exact recovery")
{
    const AntennaLayout layout = AntennaLayout::hexagon();
    Rng rng(11);
    const auto same = test::observe(layout, UnitQuaternion(), 0.0, rng);
    CHECK(angle_between(oracle::wahba_svd(same, weights_of(same)), UnitQuaternion()) < 1e-12);

    for (int i = 0; i < 50; ++i) {
        const UnitQuaternion q = test::random_rotation(rng);
        const auto obs = test::observe(layout, q, 0.0, rng);
        CHECK(angle_between(oracle::wahba_svd(obs, weights_of(obs)), q) < 1e-12);
    }
}

TEST_CASE("wahba_svd: error conditions")
{
    const std::vector<VectorObservation> one{{Vec3::UnitX(), Vec3::UnitX(), {1, 2}}};
    const std::vector<double> w1{1.0};
    CHECK_THROWS_AS(oracle::wahba_svd(one, w1), InsufficientDataError);

    const std::vector<VectorObservation> line{{Vec3::UnitX(), Vec3::UnitX(), {1, 2}},
                                              {-2.0 * Vec3::UnitX(), -2.0 * Vec3::UnitX(), {1, 3}}};
    const std::vector<double> w2{0.5, 0.5};
    CHECK_THROWS_AS(oracle::wahba_svd(line, w2), DegenerateGeometryError);
}

TEST_CASE("wahba_svd agrees with the q-method on 1000 noisy problems")
{
    const AntennaLayout layout = AntennaLayout::hexagon();
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto obs = test::observe(layout, test::random_rotation(rng), 0.005, rng);
        const UnitQuaternion svd = oracle::wahba_svd(obs, weights_of(obs));
        worst = std::max(worst, angle_between(svd, *estimate_attitude(obs).q));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("gain_scan: bounded by the top eigenvalue")
{
    Mat4 k = Mat4::Zero();
    k(3, 3) = 1.0;
    const oracle::GainScanResult diag = oracle::gain_scan(k, 100000, 3);
    CHECK(diag.gain <= 1.0 + 1e-12);
    CHECK(diag.gain > 0.98);

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        Mat4 a;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) a(r, c) = gaussian(rng, 1.0);
        const Mat4 sym = 0.5 * (a + a.transpose());
        const double lambda = Eigen::SelfAdjointEigenSolver<Mat4>(sym).eigenvalues().maxCoeff();
        CHECK(oracle::gain_scan(sym, 10000, static_cast<std::uint64_t>(i)).gain <= lambda + 1e-12);
        CHECK(oracle::gain_scan(sym, 10000, static_cast<std::uint64_t>(i)).gain <=
              solve_max_eigenpair(sym).lambda + 1e-12);
    }
    CHECK_THROWS_AS(oracle::gain_scan(k, 9999), ValidationError);
}

TEST_CASE("noise-free gain at the true rotation is one")
{
    const AntennaLayout layout = AntennaLayout::hexagon();
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const UnitQuaternion q = test::random_rotation(rng);
        const auto obs = test::observe(layout, q, 0.0, rng);
        const Mat4 k = davenport_matrix(obs, weights_of(obs));
        const Eigen::Vector4d c = q.conjugate().coeffs();
        CHECK(c.dot(k * c) == Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("mapping_error_budget")
{
    CHECK(oracle::mapping_error_budget(0.0, 0.0, 30.0) == 0.0);
    CHECK(oracle::mapping_error_budget(0.01, 0.0, 30.0) == Approx(0.01));
    const double budget = oracle::mapping_error_budget(0.01, 0.07 * kDegToRad, 30.0);
    CHECK(budget == Approx(std::sqrt(0.01 * 0.01 + std::pow(30.0 * 0.07 * kPi / 180.0, 2))));
    CHECK(budget == Approx(0.0379).epsilon(0.002));
    CHECK_THROWS_AS(oracle::mapping_error_budget(-0.01, 0.0, 30.0), ValidationError);
}
