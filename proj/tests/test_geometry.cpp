#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixture_path.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"

using namespace hnorm;

namespace {

const double kPi = std::numbers::pi;

// Lobachevsky function from its integral definition.
double lobachevsky_integral(double theta) {
    boost::math::quadrature::tanh_sinh<double> q;
    return -q.integrate([](double t) { return std::log(std::abs(2.0 * std::sin(t))); }, 0.0, theta);
}

// Largest distance from a sampled point of the fundamental domain to the nearest lattice point.
double brute_force_diameter(cplx xi, cplx eta, int n = 200) {
    double best = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cplx p = (i / double(n)) * xi + (j / double(n)) * eta;
            double nearest = 1e300;
            for (int a = -3; a <= 3; ++a)
                for (int b = -3; b <= 3; ++b) nearest = std::min(nearest, std::abs(p - (double(a) * xi + double(b) * eta)));
            best = std::max(best, nearest);
        }
    return best;
}

TriangulatedManifold with_cusps(const std::vector<std::pair<cplx, cplx>>& lattices) {
    TriangulatedManifold M;
    for (const auto& [xi, eta] : lattices) M.cusps.push_back(cusp_from_translations(xi, eta));
    M.systole = 1.0;
    return M;
}

}  // namespace

TEST_CASE("Lobachevsky series matches the integral definition") {
    for (double th : {0.1, 0.5, kPi / 3, 1.2, 2.0, 2.9})
        CHECK(lobachevsky(th) == doctest::Approx(lobachevsky_integral(th)).epsilon(1e-10));
}

TEST_CASE("regular ideal tetrahedron and known census volumes") {
    const double regular = 3.0 * lobachevsky_integral(kPi / 3);
    CHECK(ideal_tet_volume(std::polar(1.0, kPi / 3)) == doctest::Approx(regular).epsilon(1e-11));
    CHECK(regular == doctest::Approx(1.0149416064096536).epsilon(1e-12));
    // Census volumes from SnapPy.
    CHECK(volume(parse_manifold(fixture("gieseking.mfd"))) == doctest::Approx(1.01494160641).epsilon(1e-10));
    CHECK(volume(parse_manifold(fixture("figure8.mfd"))) == doctest::Approx(2.0298832128).epsilon(1e-10));
    CHECK(volume(parse_manifold(fixture("s789.mfd"))) == doctest::Approx(5.33348956690).epsilon(1e-10));
    CHECK(volume(parse_manifold(fixture("s789_cover.mfd"))) == doctest::Approx(2 * 5.33348956690).epsilon(1e-10));
}

TEST_CASE("volume is additive and invariant under reordering of the tetrahedra") {
    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    double sum = 0.0;
    for (const cplx& z : M.shapes) sum += ideal_tet_volume(z);
    CHECK(volume(M) == doctest::Approx(sum).epsilon(1e-14));
    double reversed = 0.0;
    for (auto it = M.shapes.rbegin(); it != M.shapes.rend(); ++it) reversed += ideal_tet_volume(*it);
    CHECK(reversed == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("degenerate shape is rejected") {
    CHECK_THROWS_AS(ideal_tet_volume(cplx(0.5, 0.0)), ValidationError);
    CHECK_THROWS_AS(ideal_tet_volume(cplx(0.5, -0.1)), ValidationError);
}

TEST_CASE("cusp lattice geometry") {
    const CuspData sq = cusp_from_translations({1, 0}, {0, 1});
    CHECK(sq.waist == doctest::Approx(1.0));
    CHECK(sq.area == doctest::Approx(1.0));
    const CuspData hex = cusp_from_translations({1, 0}, {0.5, std::sqrt(3.0) / 2});
    CHECK(hex.waist == doctest::Approx(1.0));
    CHECK(hex.area == doctest::Approx(std::sqrt(3.0) / 2));
    const CuspData big = cusp_from_translations({3, 0}, {0, 3});
    CHECK(big.diameter == doctest::Approx(3.0 * std::sqrt(2.0) / 2).epsilon(1e-12));
    CHECK(big.diameter == doctest::Approx(brute_force_diameter({3, 0}, {0, 3})).epsilon(2e-2));
    CHECK(hex.diameter == doctest::Approx(brute_force_diameter({1, 0}, {0.5, std::sqrt(3.0) / 2})).epsilon(2e-2));
    CHECK_THROWS_AS(cusp_from_translations({1, 0}, {2, 0}), ValidationError);
}

TEST_CASE("flat lattice bounds on random lattices") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        const cplx xi(u(gen), u(gen)), eta(u(gen), u(gen));
        if (std::abs((std::conj(xi) * eta).imag()) < 0.05) continue;
        const CuspData c = cusp_from_translations(xi, eta);
        CHECK(c.waist <= 2.0 * c.diameter + 1e-12);
        CHECK(c.waist * c.waist <= 4.0 / 3.0 * c.area + 1e-12);
        if (k < 20) CHECK(c.diameter == doctest::Approx(brute_force_diameter(xi, eta, 120)).epsilon(3e-2));
    }
}

TEST_CASE("truncation constants follow the formula exactly") {
    const TriangulatedManifold one = with_cusps({{{1, 0}, {0, 1}}});
    const TruncationConstants a = truncation_constants(one, 0.2);
    CHECK(a.L0 == 2.0);
    CHECK(a.tau == std::log(6.0));
    const TriangulatedManifold two = with_cusps({{{1, 0}, {0, 1}}, {{2, 0}, {0, 2}}});
    const TruncationConstants b = truncation_constants(two, 1.0);
    CHECK(b.L0 == 4.0);
    CHECK(b.tau == std::log(12.0));
    const TruncationConstants c = truncation_constants(one, 1.5);
    CHECK(c.L0 == std::exp(1.5));
    CHECK(c.tau == std::log(3.0 * c.L0));
    CHECK_THROWS_AS(truncation_constants(with_cusps({}), 0.0), PreconditionError);
}

TEST_CASE("thick-thin constants echo the systole") {
    TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    ThickThin t = thick_thin_constants(M);
    CHECK(t.mu == 0.29);
    CHECK(t.systole == M.systole);
    CHECK(t.no_margulis_tubes);
    M.systole = 0.5;
    CHECK(thick_thin_constants(M).no_margulis_tubes);
    M.systole = 0.1;
    CHECK_FALSE(thick_thin_constants(M).no_margulis_tubes);
}
