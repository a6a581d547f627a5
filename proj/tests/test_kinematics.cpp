#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ipp/error.hpp"
#include <Eigen/LU>

#include "ipp/kinematics.hpp"

using namespace ipp;

TEST_CASE("rotation matrix at zero angles is the identity") {
    CHECK((rotation_matrix(0.0, 0.0, 0.0) - Matrix3::Identity()).norm() == 0.0);
    CHECK((euler_rate_matrix(0.0, 0.0) - Matrix3::Identity()).norm() == 0.0);
}

TEST_CASE("pure pitch maps forward speed to climb") {
    const double th = std::numbers::pi / 6.0;
    const Vector3 v = rotation_matrix(0.0, th, 0.0) * Vector3(1.0, 0.0, 0.0);
    CHECK(v.x() == doctest::Approx(std::cos(th)));
    CHECK(v.y() == doctest::Approx(0.0));
    CHECK(v.z() == doctest::Approx(-std::sin(th)));
}

TEST_CASE("rotation matrices are proper orthonormal") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> pitch(-1.4, 1.4);
    for (int i = 0; i < 1000; ++i) {
        const Matrix3 R = rotation_matrix(ang(gen), pitch(gen), ang(gen));
        CHECK((R.transpose() * R - Matrix3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(R.determinant() - 1.0) < 1e-12);
    }
}

TEST_CASE("euler rate matrix inverts the body rate matrix") {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> pitch(-1.4, 1.4);
    for (int i = 0; i < 1000; ++i) {
        const double phi = ang(gen), theta = pitch(gen);
        const Matrix3 P = euler_rate_matrix(phi, theta) * body_rate_matrix(phi, theta);
        CHECK((P - Matrix3::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("euler rate matrix is singular at gimbal lock") {
    CHECK_THROWS_AS(euler_rate_matrix(0.3, std::numbers::pi / 2.0 - 1e-16), SingularityError);
    CHECK_THROWS_AS(euler_rate_matrix(0.3, std::numbers::pi / 2.0), SingularityError);
    CHECK_NOTHROW(euler_rate_matrix(0.3, 1.4));
}

TEST_CASE("full kinematic state helpers agree with the matrices") {
    FullKinematicState k{0.2, 0.1, -0.3, 300.0, 2.0, -1.0, 10.0, 0.5, -0.2};
    const Vector3 v = k.inertial_velocity();
    CHECK((v - rotation_matrix(0.2, 0.1, -0.3) * Vector3(300.0, 2.0, -1.0)).norm() < 1e-12);
    CHECK(v.norm() == doctest::Approx(Vector3(300.0, 2.0, -1.0).norm()));
    const Vector3 rates = k.euler_rates();
    CHECK((body_rate_matrix(0.2, 0.1) * rates - Vector3(10.0, 0.5, -0.2)).norm() < 1e-10);
}
