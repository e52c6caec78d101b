#include <doctest.h>

#include <cmath>
#include <random>

#include "abp/quadrature.hpp"
#include "oracles.hpp"

using namespace abp;

// Closed form for the unit bump: integrating |(1-r^2)^3 (36 - 180 r^2)| over
// the unit disk gives 5.89824*pi (sign change at r^2 = 0.2).
static const double kBumpAbsDetIntegral = 5.89824 * M_PI;

TEST_CASE("abs-det integral vanishes for affine and zero fields") {
    const Domain K = Domain::make_rect({-1, -1}, {1, 1});
    const Grid g = make_grid(K, 64, 64);
    CHECK(integrate_abs_det_hessian(make_affine(0.3, 0.7, -0.2), K, g).value == 0.0);
    CHECK(integrate_abs_det_hessian(make_zero(), K, g).value == 0.0);
}

TEST_CASE("radial bump integral matches the polar oracle and the closed form") {
    const ScalarField f = make_bump({0, 0}, 1.0, 1.0);
    const Domain K = Domain::make_disk({0, 0}, 1.0);
    const double oracle = oracles::polar_abs_det_integral(f, {0, 0}, 1.0, 4096, 4096);
    CHECK(std::abs(oracle - kBumpAbsDetIntegral) / kBumpAbsDetIntegral < 1e-6);

    const IntegralResult r = integrate_abs_det_hessian(f, K, make_grid(K, 1024, 1024));
    CHECK(std::abs(r.value - oracle) / oracle < 0.01);
}

TEST_CASE("integral kernel: serial and parallel results are bit-identical") {
    const ScalarField f = make_modulated_bump({0, 0}, 1.0, 1.0);
    const Domain K = Domain::make_disk({0, 0}, 1.0);
    const Grid g = make_grid(K, 257, 193);
    const double a = integrate_abs_det_hessian(f, K, g, Exec::serial).value;
    const double b = integrate_abs_det_hessian(f, K, g, Exec::parallel).value;
    CHECK(a == b);
}

TEST_CASE("integral is monotone under domain inclusion") {
    const ScalarField f = make_bump({0, 0}, 1.0, 1.0);
    const Domain K1 = Domain::make_disk({0, 0}, 0.8);
    const Domain K2 = Domain::make_disk({0, 0}, 1.0);
    // matched spacings: 0.00625 in both grids
    const double v1 = integrate_abs_det_hessian(f, K1, make_grid(K1, 257, 257)).value;
    const double v2 = integrate_abs_det_hessian(f, K2, make_grid(K2, 321, 321)).value;
    CHECK(v1 <= v2 * 1.005);
}

TEST_CASE("integral convergence under grid doubling, whole catalog") {
    for (const auto& e : catalog()) {
        const IntegralResult r = integrate_abs_det_hessian(
            e.field, e.domain, make_grid(e.domain, 512, 512), Exec::parallel, /*with_richardson=*/true);
        REQUIRE(r.richardson_estimate.has_value());
        INFO(e.field.id);
        if (r.value == 0.0) {
            CHECK(*r.richardson_estimate == 0.0);
        } else {
            CHECK(std::abs(r.value - *r.richardson_estimate) / r.value < 0.01);
        }
    }
}

TEST_CASE("degenerate grid is rejected") {
    const Domain K = Domain::make_rect({0, 0}, {1, 1});
    Grid g = make_grid(K, 2, 2);
    g.nx = 1;
    CHECK_THROWS_AS(integrate_abs_det_hessian(make_zero(), K, g), std::invalid_argument);
}

TEST_CASE("oscillation basics") {
    const Domain K = Domain::make_disk({0, 0}, 1.0);
    const ScalarField f = make_bump({0, 0}, 1.0, 1.0);
    const Grid g = make_grid(K, 129, 129);  // odd: the peak node is sampled exactly
    CHECK(oscillation_over_grid(f, K, g) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(oscillation_over_boundary(f, K, 512) <= 1e-30);
    CHECK(oscillation_over_grid(make_zero(), K, g) == 0.0);
    CHECK_THROWS_AS(oscillation(f, std::span<const Vec2>{}), std::invalid_argument);
}

TEST_CASE("oscillation shift and scale behavior") {
    const Domain K = Domain::make_rect({-1, -1}, {1, 1});
    const Grid g = make_grid(K, 65, 65);
    const ScalarField f = make_bump({0, 0}, 1.0, 1.0);
    const ScalarField f_shift = make_sum({f, make_affine(0, 0, 5.0)}, "shifted");
    CHECK(oscillation_over_grid(f_shift, K, g) == oscillation_over_grid(f, K, g));
    const ScalarField f3 = make_bump({0, 0}, 1.0, 3.0);
    CHECK(oscillation_over_grid(f3, K, g) == doctest::Approx(3.0 * oscillation_over_grid(f, K, g)));
}

TEST_CASE("vertical oscillation: constants, circle, and the pairwise oracle") {
    // constant samples
    {
        const auto c = oracles::circle_component({0, 0}, 1.0, 100);
        std::vector<double> u(c.vertices.size(), 3.25);
        CHECK(vertical_oscillation(c.vertices, u, 0.05) == 0.0);
    }
    // u = x2 on the unit circle: the extreme pair is (0,1) vs (0,-1)
    {
        const int n = 360;
        const auto c = oracles::circle_component({0, 0}, 1.0, n);
        std::vector<double> u;
        for (const Vec2& p : c.vertices) u.push_back(p.y);
        const double spacing = 2.0 * M_PI / n;
        const double v = vertical_oscillation(c.vertices, u, spacing);
        const double slack = 2.0 * (1.0 - std::cos(M_PI / n));
        CHECK(v <= 2.0 + 1e-12);
        CHECK(v >= 2.0 - slack - 1e-12);
    }
    // random point sets against the O(n^2) oracle
    {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Vec2> pts;
            std::vector<double> u;
            const int n = 50 + static_cast<int>(oracles::urand(rng, 0, 150));
            for (int k = 0; k < n; ++k) {
                pts.push_back({oracles::urand(rng, -1, 1), oracles::urand(rng, -1, 1)});
                u.push_back(oracles::urand(rng, -2, 2));
            }
            const double tol = oracles::urand(rng, 0.01, 0.3);
            CHECK(vertical_oscillation(pts, u, tol) == oracles::naive_vosc(pts, u, tol));
        }
    }
    // monotone graph over x1: no two vertices share a fiber
    {
        std::vector<Vec2> pts;
        std::vector<double> u;
        for (int k = 0; k < 100; ++k) {
            pts.push_back({k * 0.1, std::sin(k * 0.3)});
            u.push_back(std::cos(k * 0.2));
        }
        CHECK(vertical_oscillation(pts, u, 0.05) == 0.0);
    }
}

TEST_CASE("schur determinant identity") {
    Mat3 I;
    I.m[0][0] = I.m[1][1] = I.m[2][2] = 1.0;
    CHECK(schur_det_identity(I) == 0.0);

    Mat3 D;
    D.m[0][0] = 2;
    D.m[1][1] = 3;
    D.m[2][2] = 4;
    CHECK(schur_det_identity(D) == 0.0);

    std::mt19937_64 rng(23);
    for (int k = 0; k < 100; ++k) {
        Mat3 M;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) M.m[i][j] = M.m[j][i] = oracles::urand(rng, -1, 1);
        while (std::abs(M.m[2][2]) < 0.1) M.m[2][2] = oracles::urand(rng, -1, 1);
        // independent route: Sarrus expansion for det(M)
        const auto& m = M.m;
        const double sarrus = m[0][0] * m[1][1] * m[2][2] + m[0][1] * m[1][2] * m[2][0] +
                              m[0][2] * m[1][0] * m[2][1] - m[0][2] * m[1][1] * m[2][0] -
                              m[0][0] * m[1][2] * m[2][1] - m[0][1] * m[1][0] * m[2][2];
        CHECK(std::abs(M.det() - sarrus) < 1e-14);
        CHECK(schur_det_identity(M) < 1e-12);
    }

    Mat3 S;
    S.m[2][2] = 1e-13;
    CHECK_THROWS_AS(schur_det_identity(S), std::domain_error);
}
