#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "doctest.h"
#include "hnorm/bessel.hpp"
#include "hnorm/errors.hpp"

using namespace hnorm;

namespace {

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
double k_integral(int nu, double x) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double t) {
        const double e = -x * std::cosh(t);
        return 0.5 * (std::exp(e + nu * t) + std::exp(e - nu * t));
    });
}

}  // namespace

TEST_CASE("K0 and K1 at 1 match the integral representation") {
    CHECK(bessel_k0(1.0) == doctest::Approx(k_integral(0, 1.0)).epsilon(1e-10));
    CHECK(bessel_k1(1.0) == doctest::Approx(k_integral(1, 1.0)).epsilon(1e-10));
    CHECK(bessel_k0(1.0) == doctest::Approx(0.421024).epsilon(1e-6));
    CHECK(bessel_k1(1.0) == doctest::Approx(0.601907).epsilon(1e-6));
}

TEST_CASE("relative accuracy against Boost over a wide range") {
    double worst = 0.0;
    for (int i = 1; i <= 4000; ++i) {
        const double x = 0.005 * i;
        worst = std::max(worst, std::abs(bessel_k0(x) / boost::math::cyl_bessel_k(0, x) - 1.0));
        worst = std::max(worst, std::abs(bessel_k1(x) / boost::math::cyl_bessel_k(1, x) - 1.0));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("the two evaluation branches agree across the switchover") {
    for (double x = 1.5; x <= 2.5; x += 0.01) {
        CHECK(bessel_k0(x) == doctest::Approx(k_integral(0, x)).epsilon(1e-10));
        CHECK(bessel_k1(x) == doctest::Approx(k_integral(1, x)).epsilon(1e-10));
    }
    const auto [k0, k1] = bessel_k01(2.0);
    CHECK(k0 == bessel_k0(2.0));
    CHECK(k1 == bessel_k1(2.0));
}

TEST_CASE("limits") {
    CHECK(1e-8 * bessel_k1(1e-8) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bessel_k0(10.0) / bessel_k1(10.0) == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(bessel_k0(0.0), DomainError);
    CHECK_THROWS_AS(bessel_k1(-1.0), DomainError);
}

TEST_CASE("signed derivative identity holds on the table") {
    const auto table = bessel_identity_table(0.1, 10.0, 100);
    REQUIRE(table.size() == 100);
    CHECK(table.front().z == doctest::Approx(0.1));
    CHECK(table.back().z == doctest::Approx(10.0));
    double worst = 0.0;
    for (const auto& r : table) worst = std::max(worst, r.residual);
    CHECK(worst < 1e-8);
    CHECK_THROWS_AS(bessel_identity_table(1.0, 0.5, 10), PreconditionError);
}
